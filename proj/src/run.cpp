#include "floquet/run.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "floquet/errors.hpp"
#include "floquet/report.hpp"
#include "floquet/text.hpp"

namespace floquet {

namespace fs = std::filesystem;

namespace {

const std::set<std::string> kPotentialKeys{"N", "builtin", "values", "a", "tau", "nu"};

std::vector<double> numbers(const std::string& value, const std::string& what) {
  std::vector<double> out;
  std::istringstream is(value);
  std::string tok;
  while (is >> tok) out.push_back(parse_double(tok, what));
  return out;
}

std::vector<double> exactly(const std::string& value, std::size_t count, const std::string& what) {
  auto v = numbers(value, what);
  if (v.size() != count) throw InvalidInput(what + ": expected " + std::to_string(count) + " numbers");
  return v;
}

int as_int(double x, const std::string& what) {
  if (x != std::floor(x) || std::abs(x) > 1e6) throw InvalidInput(what + ": expected an integer");
  return static_cast<int>(x);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

RunConfig parse_run_config(const std::string& text, const std::string& source, const std::string& command) {
  RunConfig cfg;
  const auto kvs = parse_key_values(text, source);
  std::set<std::string> seen;
  std::ostringstream potential;
  int line = 1;
  std::string potential_file;
  for (const auto& kv : kvs) {
    const std::string where = source + ":" + std::to_string(kv.line) + ": " + kv.key;
    if (!seen.insert(kv.key).second) throw InvalidInput(where + ": duplicate key");
    if (kv.key == "command") {
      cfg.command = kv.value;
    } else if (kv.key == "out") {
      cfg.out_dir = kv.value;
    } else if (kv.key == "rtol") {
      cfg.rtol = parse_double(kv.value, where);
    } else if (kv.key == "jobs") {
      const int j = as_int(parse_double(kv.value, where), where);
      if (j < 0) throw InvalidInput(where + ": must be non-negative");
      cfg.jobs = static_cast<unsigned>(j);
    } else if (kv.key == "window") {
      const auto v = exactly(kv.value, 2, where);
      cfg.window = Window{v[0], v[1]};
    } else if (kv.key == "n_range") {
      const auto v = exactly(kv.value, 2, where);
      cfg.n_range = std::make_pair(as_int(v[0], where), as_int(v[1], where));
    } else if (kv.key == "disk") {
      const auto v = exactly(kv.value, 3, where);
      cfg.disk = Disk{cplx(v[0], v[1]), v[2]};
    } else if (kv.key == "grid_step") {
      cfg.grid_step = parse_double(kv.value, where);
    } else if (kv.key == "heights") {
      cfg.heights = numbers(kv.value, where);
    } else if (kv.key == "tau_values") {
      cfg.casestudy.tau_values = numbers(kv.value, where);
    } else if (kv.key == "n_max") {
      cfg.casestudy.n_max = as_int(parse_double(kv.value, where), where);
    } else if (kv.key == "potential_file") {
      potential_file = kv.value;
    } else if (kPotentialKeys.count(kv.key) || (kv.key.size() > 2 && kv.key.rfind("v[", 0) == 0)) {
      // Keep the original line numbers for diagnostics from the potential parser.
      for (; line < kv.line; ++line) potential << '\n';
      potential << kv.key << " = " << kv.value << '\n';
      ++line;
    } else {
      throw InvalidInput(where + ": unknown key");
    }
  }
  if (!command.empty()) cfg.command = command;
  cfg.potential_text = potential.str();
  cfg.potential_source = source;
  if (!potential_file.empty()) {
    if (trim(cfg.potential_text).size() > 0 && cfg.command != "casestudy") {
      throw InvalidInput(source + ": potential_file and inline potential keys are mutually exclusive");
    }
    fs::path path(potential_file);
    if (path.is_relative()) path = fs::path(source).parent_path() / path;
    cfg.potential_text = read_file(path.string());
    cfg.potential_source = path.string();
  }
  // For casestudy the keys a and nu describe the sweep, not a potential.
  if (cfg.command == "casestudy") {
    for (const auto& kv : parse_key_values(cfg.potential_text, source)) {
      if (kv.key == "a") cfg.casestudy.a = parse_double(kv.value, source + ": a");
      else if (kv.key == "nu") cfg.casestudy.nu = parse_double(kv.value, source + ": nu");
      else throw InvalidInput(source + ":" + std::to_string(kv.line) + ": " + kv.key + ": not a casestudy key");
    }
    cfg.potential_text.clear();
  }
  return cfg;
}

RunConfig load_run_config(const std::string& path, const std::string& command) {
  return parse_run_config(read_file(path), path, command);
}

void check_run_config(const RunConfig& cfg) {
  if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
    throw InvalidInput("command: unknown command '" + cfg.command + "'");
  }
  if (!(cfg.rtol >= 1e-13 && cfg.rtol <= 1e-6)) throw InvalidInput("rtol: must lie in [1e-13, 1e-6]");
  if (cfg.jobs > 1024) throw InvalidInput("jobs: at most 1024");
  if (!(cfg.grid_step > 0.0 && cfg.grid_step <= kPi / 200.0)) throw InvalidInput("grid_step: must lie in (0, pi/200]");
  if (cfg.out_dir.empty()) throw InvalidInput("out: empty output directory");
  if (cfg.window && !(std::isfinite(cfg.window->lo) && std::isfinite(cfg.window->hi) && cfg.window->lo < cfg.window->hi)) {
    throw InvalidInput("window: must satisfy lo < hi");
  }
  if (cfg.n_range && cfg.n_range->first > cfg.n_range->second) throw InvalidInput("n_range: must satisfy lo <= hi");
  if (cfg.disk && !(cfg.disk->radius > 0.0 && std::isfinite(cfg.disk->radius))) throw InvalidInput("disk: radius must be positive");

  const std::string& c = cfg.command;
  if (c == "casestudy") {
    check_config(cfg.casestudy);
    return;
  }
  if (trim(cfg.potential_text).empty()) throw InvalidInput("potential: no potential given (inline keys or potential_file)");
  if (c == "bands" && !cfg.window) throw InvalidInput("window: required for bands");
  if (c == "eigenvalues" && !cfg.n_range) throw InvalidInput("n_range: required for eigenvalues");
  if (c == "resonances" && !cfg.window && !cfg.disk) throw InvalidInput("window: resonances need a window or a disk");
  if (c == "asymptotics") {
    if (!cfg.n_range) throw InvalidInput("n_range: required for asymptotics");
    if (cfg.n_range->first < 2 || cfg.n_range->second > 60) throw InvalidInput("n_range: asymptotics needs 2 <= lo <= hi <= 60");
  }
  if (c == "traces") {
    if (cfg.heights.size() < 4) throw InvalidInput("heights: at least 4 values");
    for (double y : cfg.heights)
      if (!(y >= 10.0 && y <= 50.0)) throw InvalidInput("heights: values must lie in [10, 50]");
  }
}

namespace {

struct Artifacts {
  fs::path dir;
  std::vector<std::string> files;
  void write(const std::string& name, const std::string& content) {
    std::ofstream out(dir / name, std::ios::binary);
    if (!out) throw InvalidInput("out: cannot write '" + (dir / name).string() + "'");
    out << content;
    files.push_back(name);
  }
};

std::string fmt(double x) { return fmt_double(x); }

Json config_json(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["rtol"] = cfg.rtol;
  if (cfg.window) j["window"] = {cfg.window->lo, cfg.window->hi};
  if (cfg.n_range) j["n_range"] = {cfg.n_range->first, cfg.n_range->second};
  if (cfg.disk) j["disk"] = {cfg.disk->center.real(), cfg.disk->center.imag(), cfg.disk->radius};
  j["grid_step"] = cfg.grid_step;
  if (cfg.command == "traces") j["heights"] = cfg.heights;
  if (cfg.command == "casestudy") {
    j["a"] = cfg.casestudy.a;
    j["nu"] = cfg.casestudy.nu;
    j["tau_values"] = cfg.casestudy.tau_values;
    j["n_max"] = cfg.casestudy.n_max;
  }
  return j;
}

RootOptions root_options(const RunConfig& cfg) {
  RootOptions opt;
  opt.grid_step = std::min(cfg.grid_step, kPi / 256.0);
  opt.jobs = cfg.jobs;
  return opt;
}

void run_bands(const RunConfig& cfg, const PeriodicPotential& p, Json& results, std::ostringstream& summary,
               std::vector<std::string>& flags, Artifacts& art) {
  const SpectralReport rep = scan_bands(p, *cfg.window, cfg.grid_step, cfg.rtol, cfg.jobs);
  const GapSum gs = gap_sum_check(rep, p);
  const double q0 = p.norm2() / (4.0 * static_cast<double>(p.n()));
  double q_full = 0.0, q2_excess = -std::numeric_limits<double>::infinity();
  for (const auto& s : rep.samples) {
    const double q = mean_exponent(s.deltas, edge_slack(cfg.rtol));
    if (s.count == static_cast<int>(p.n())) q_full = std::max(q_full, q);
    if (s.count <= 1) q2_excess = std::max(q2_excess, q * q - 2.0 * q0);
  }
  results["spectrum"] = to_json(rep);
  results["gap_sum"] = to_json(gs);
  results["exponent_checks"] = {{"Q0", q0},
                                {"max_q_on_full_bands", q_full},
                                {"max_q2_minus_2Q0", std::isfinite(q2_excess) ? Json(q2_excess) : Json(nullptr)}};
  for (const auto& f : rep.flags) flags.push_back("bands: " + f);
  if (!gs.pass) flags.push_back("bands: sum of squared gap lengths exceeds 4 ||V||^2 / N");
  summary << "bands: " << rep.bands.size() << ", gaps: " << rep.gaps.size() << "\n";
  for (const auto& b : rep.bands) summary << "  band [" << fmt(b.lo) << ", " << fmt(b.hi) << "]\n";
  for (const auto& g : rep.gaps) summary << "  gap  (" << fmt(g.lo) << ", " << fmt(g.hi) << ") " << g.type << "\n";
  summary << "sum |g|^2 = " << fmt(gs.lhs) << " <= " << fmt(gs.rhs) << (gs.pass ? "" : "  FAILED") << "\n";
  art.write("spectrum.csv", spectrum_csv(rep));
  art.write("samples.csv", samples_csv(rep));
}

void run_eigenvalues(const RunConfig& cfg, const PeriodicPotential& p, Json& results, std::ostringstream& summary,
                     std::vector<std::string>& flags, Artifacts& art) {
  const auto [lo, hi] = *cfg.n_range;
  const RootOptions opt = root_options(cfg);
  const RealAxisScan scan = scan_real_axis(p, Window{kPi * (lo - 0.5), kPi * (hi + 0.5)}, opt.grid_step, cfg.rtol, cfg.jobs);
  std::vector<EigenvalueList> lists;
  for (EigenKind k : {EigenKind::periodic, EigenKind::antiperiodic}) lists.push_back(eigenvalues_from_scan(p, scan, k, lo, hi, cfg.rtol, opt));
  Json arr = Json::array();
  for (const auto& l : lists) {
    arr.push_back(to_json(l));
    for (int c : l.flagged_cells) flags.push_back("eigenvalues: " + to_string(l.kind) + " cell " + std::to_string(c) + " holds more than 2N roots");
    if (!l.imag_consistent) flags.push_back("eigenvalues: " + to_string(l.kind) + " determinant has a large imaginary part on the real axis");
    int count = 0;
    for (const auto& r : l.roots) count += r.multiplicity;
    summary << to_string(l.kind) << " roots (with multiplicity): " << count << "\n";
    for (const auto& r : l.roots) summary << "  " << fmt(r.z) << "  x" << r.multiplicity << "\n";
  }
  results["eigenvalues"] = arr;
  art.write("eigenvalues.csv", eigenvalues_csv(lists));
}

void run_resonances(const RunConfig& cfg, const PeriodicPotential& p, Json& results, std::ostringstream& summary,
                    std::vector<std::string>& flags, Artifacts& art) {
  ResonanceList list;
  if (cfg.window) list = find_resonances(p, *cfg.window, cfg.rtol, root_options(cfg));
  if (cfg.disk) list.disks.push_back(find_resonances(p, *cfg.disk, cfg.rtol));
  for (const auto& f : list.flags) flags.push_back("resonances: " + f);
  for (const auto& d : list.disks)
    if (!d.ok) flags.push_back("resonances: disk solver failed: " + d.failure);
  results["resonances"] = to_json(list);
  summary << "real resonances: " << list.real_roots.size() << (list.identically_zero ? " (discriminant identically zero)" : "") << "\n";
  for (const auto& r : list.real_roots) summary << "  " << fmt(r.z) << "  x" << r.multiplicity << "\n";
  for (const auto& d : list.disks) {
    summary << "disk count: " << d.count << "\n";
    for (const auto& r : d.roots) summary << "  " << fmt(r.z.real()) << " " << fmt(r.z.imag()) << "i  x" << r.multiplicity << "\n";
  }
  art.write("resonances.csv", resonances_csv(list));
}

void run_asymptotics(const RunConfig& cfg, const PeriodicPotential& p, Json& results, std::ostringstream& summary,
                     std::vector<std::string>& flags, Artifacts& art) {
  const auto [lo, hi] = *cfg.n_range;
  const ValidationReport v = validate(p, lo, hi, cfg.rtol, root_options(cfg));
  Json preds = Json::array();
  for (int n = lo; n <= hi; ++n) preds.push_back(to_json(predict(p, n)));
  const GapVerdict g = gap_criterion(p);
  results["predictions"] = preds;
  results["validation"] = to_json(v);
  results["gap_criterion"] = to_json(g);
  for (const auto& note : v.notes)
    if (note.find("unmatched numeric root") != std::string::npos) flags.push_back("asymptotics: " + note);
  for (const auto& s : v.summary) {
    summary << s.family << ": max |residual| n^2 = " << fmt(s.max_scaled) << " (first third " << fmt(s.first_third_max)
            << ", last third " << fmt(s.last_third_max) << "), unmatched predictions " << s.unmatched << "\n";
  }
  summary << "gap criterion: " << (g.refused ? "refused: " + g.reason : g.verdict) << "\n";
  art.write("residuals.csv", residuals_csv(v));
}

void run_traces(const RunConfig& cfg, const PeriodicPotential& p, Json& results, std::ostringstream& summary,
                std::vector<std::string>& flags, std::vector<std::string>& notes, Artifacts& art) {
  const TraceReport t = trace_check(p, cfg.heights, cfg.rtol);
  results["traces"] = to_json(t);
  if (!t.fitted) flags.push_back("traces: fit condition number " + fmt(t.condition) + " too large; raw samples only");
  // det psi = 1 cannot be checked to 1e-9 e^{|Im z|} once roundoff on e^{|Im z|}
  // sized entries dominates; k and det L only use the dominant multipliers.
  if (t.invalid_monodromies > 0) {
    notes.push_back("traces: " + std::to_string(t.invalid_monodromies) +
                    " monodromy matrices exceed the determinant envelope (roundoff at large Im z)");
  }
  summary << "Q0 = " << fmt(t.q0) << ", Q1 = " << fmt(t.q1) << ", Q2 = " << fmt(t.q2) << "\n";
  if (t.fitted) summary << "fitted Q0 = " << fmt(t.fitted_q0) << ", Q1 = " << fmt(t.fitted_q1) << ", Q2 = " << fmt(t.fitted_q2) << "\n";
  summary << "det L defect = " << fmt(t.detl_defect) << "\n";
  art.write("traces.csv", traces_csv(t));
}

void run_casestudy(const RunConfig& cfg, Json& results, std::ostringstream& summary, std::vector<std::string>& flags,
                   Artifacts& art) {
  CaseStudyConfig cs = cfg.casestudy;
  cs.jobs = cfg.jobs;
  const auto records = bifurcation_sweep(cs, cfg.rtol);
  const StabilityReport st = eigenvalue_stability(cs, cfg.rtol);
  const UnperturbedReference ref(cs.a);
  const double radius = kPi * cs.n_max + 1.0;
  Json counts = Json::array();
  for (double tau : cs.tau_values) {
    if (tau == 0.0) continue;
    const DiskResult d = resonance_count(PeriodicPotential::example_4x4(cs.a, tau, cs.nu), radius, cfg.rtol);
    counts.push_back({{"tau", tau}, {"count", d.count}, {"ok", d.ok}});
    if (!d.ok) flags.push_back("casestudy: resonance count at tau = " + fmt(tau) + " failed: " + d.failure);
  }
  Json recs = Json::array();
  for (const auto& r : records) {
    recs.push_back(to_json(r));
    if (r.flagged) flags.push_back("casestudy: cell " + std::to_string(r.n) + " flagged");
    summary << "n = " << r.n << ": r0 = " << fmt(r.r0) << ", " << r.classification << ", slope " << fmt(r.slope_estimate) << "\n";
  }
  for (const auto& row : st.rows)
    for (const auto& u : row.unmatched) flags.push_back("casestudy: tau = " + fmt(row.tau) + ": " + u);
  for (std::size_t i = 0; i < st.counts.size(); ++i) {
    if (st.counts[i] != st.reference_count) {
      flags.push_back("casestudy: eigenvalue count " + std::to_string(st.counts[i]) + " differs from the unperturbed count " +
                      std::to_string(st.reference_count) + " at tau = " + fmt(st.rows[i].tau));
    }
  }
  results["records"] = recs;
  results["stability"] = to_json(st);
  results["resonance_counts"] = {{"radius", radius},
                                 {"unperturbed_count", ref.resonances_within(radius).size()},
                                 {"perturbed", counts}};
  summary << "eigenvalue count in |z| < " << fmt(st.count_radius) << ": reference " << st.reference_count << "\n";
  art.write("bifurcation.csv", bifurcation_csv(cs, records));
  art.write("trajectories.csv", trajectory_csv(records));
}

bool write_manifest(const fs::path& dir, const std::string& command, int exit_code, const std::vector<std::string>& flags,
                    const std::vector<std::string>& notes, const std::string& error, const std::vector<std::string>& files) {
  Json manifest;
  manifest["schema_version"] = kSchemaVersion;
  manifest["command"] = command;
  manifest["status"] = exit_code == 0 ? "ok" : (exit_code == 2 ? "invalid-config" : "failed");
  manifest["exit_code"] = exit_code;
  manifest["flags"] = flags;
  manifest["notes"] = notes;
  manifest["error"] = error;
  manifest["files"] = files;
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream m(dir / "manifest.json", std::ios::binary);
  if (!m) return false;
  m << manifest.dump(2) << "\n";
  return static_cast<bool>(m);
}

}  // namespace

void write_failure_manifest(const std::string& out_dir, const std::string& command, int exit_code, const std::string& error) {
  write_manifest(out_dir, command, exit_code, {}, {}, error, {});
}

RunOutcome run(const RunConfig& cfg) {
  RunOutcome out;
  Artifacts art;
  art.dir = cfg.out_dir;
  Json report;
  std::ostringstream summary;
  try {
    check_run_config(cfg);
    fs::create_directories(art.dir);
    report["schema_version"] = kSchemaVersion;
    report["config"] = config_json(cfg);
    Json results;
    summary << "command: " << cfg.command << "\n";
    if (cfg.command == "casestudy") {
      run_casestudy(cfg, results, summary, out.flags, art);
    } else {
      const PeriodicPotential p = parse_potential(cfg.potential_text, cfg.potential_source);
      report["potential"] = format_potential(p);
      if (cfg.command == "bands") run_bands(cfg, p, results, summary, out.flags, art);
      else if (cfg.command == "eigenvalues") run_eigenvalues(cfg, p, results, summary, out.flags, art);
      else if (cfg.command == "resonances") run_resonances(cfg, p, results, summary, out.flags, art);
      else if (cfg.command == "asymptotics") run_asymptotics(cfg, p, results, summary, out.flags, art);
      else run_traces(cfg, p, results, summary, out.flags, out.notes, art);
    }
    report["results"] = results;
    report["flags"] = out.flags;
    report["notes"] = out.notes;
    art.write("report.json", report.dump(2) + "\n");
    summary << "flags: " << out.flags.size() << "\n";
    for (const auto& f : out.flags) summary << "  " << f << "\n";
    art.write("summary.txt", summary.str());
    out.exit_code = out.flags.empty() ? 0 : 1;
  } catch (const InvalidInput& e) {
    out.exit_code = 2;
    out.error = e.what();
  } catch (const std::exception& e) {
    out.exit_code = 1;
    out.error = e.what();
  }

  if (write_manifest(art.dir, cfg.command, out.exit_code, out.flags, out.notes, out.error, art.files)) {
    out.files = art.files;
    out.files.push_back("manifest.json");
  }
  return out;
}

}  // namespace floquet
