#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "floquet/asymptotics.hpp"
#include "floquet/casestudy.hpp"

namespace floquet {

inline constexpr int kSchemaVersion = 1;

using Json = nlohmann::ordered_json;

Json to_json(cplx z);
Json to_json(const SpectralReport& r);
Json to_json(const GapSum& g);
Json to_json(const EigenvalueList& e);
Json to_json(const ResonanceList& r);
Json to_json(const DiskResult& d);
Json to_json(const AsymptoticsPrediction& p);
Json to_json(const ValidationReport& v);
Json to_json(const GapVerdict& g);
Json to_json(const TraceReport& t);
Json to_json(const QuasimomentumSample& q);
Json to_json(const BifurcationRecord& b);
Json to_json(const StabilityReport& s);

/// Mean Lyapunov exponent over the branches.
double mean_exponent(const std::vector<cplx>& deltas, double slack = 0.0);

/// Columns kind, lo, hi, type, lower_labels, upper_labels, truncated.
std::string spectrum_csv(const SpectralReport& r);
/// Columns z, count, q, re_delta1, im_delta1, ..., re_rho, im_rho.
std::string samples_csv(const SpectralReport& r);
/// Columns kind, z, multiplicity, cell, residual, winding_checked.
std::string eigenvalues_csv(const std::vector<EigenvalueList>& lists);
/// Columns re, im, multiplicity, residual, source.
std::string resonances_csv(const ResonanceList& r);
/// Columns n, family, predicted, numeric, residual, residual_n2.
std::string residuals_csv(const ValidationReport& v);
/// Columns y, re_k_minus_z, im_k_minus_z, re_log_det_l, im_log_det_l, detl_defect.
std::string traces_csv(const TraceReport& t);

}  // namespace floquet
