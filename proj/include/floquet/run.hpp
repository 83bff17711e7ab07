#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "floquet/casestudy.hpp"

namespace floquet {

struct RunConfig {
  std::string command;
  std::string out_dir = "floquet_out";
  double rtol = kDefaultRtol;
  unsigned jobs = 0;   // 0 = all cores
  std::optional<Window> window;
  std::optional<std::pair<int, int>> n_range;
  std::optional<Disk> disk;
  double grid_step = kPi / 200.0;
  std::vector<double> heights{20.0, 25.0, 30.0, 35.0, 40.0};
  /// Potential description in the key = value grammar; empty for casestudy.
  std::string potential_text;
  std::string potential_source = "<config>";
  CaseStudyConfig casestudy;
};

inline const std::vector<std::string> kCommands{"bands", "eigenvalues", "resonances", "asymptotics", "traces", "casestudy"};

/// Reads run keys and potential keys from one config file. A non-empty
/// command overrides the file's command key.
RunConfig parse_run_config(const std::string& text, const std::string& source, const std::string& command = "");
RunConfig load_run_config(const std::string& path, const std::string& command = "");

/// Throws InvalidInput naming the offending field.
void check_run_config(const RunConfig& cfg);

struct RunOutcome {
  int exit_code = 0;   // 0 ok, 1 flagged failure, 2 invalid configuration
  std::vector<std::string> flags;
  std::vector<std::string> notes;   // diagnostics that do not fail the run
  std::vector<std::string> files;
  std::string error;
};

/// Runs one command and writes report.json, summary.txt, the CSV tables and
/// manifest.json into cfg.out_dir. The manifest is written even on failure.
RunOutcome run(const RunConfig& cfg);

/// Manifest for a run that never started (e.g. a config parse error).
void write_failure_manifest(const std::string& out_dir, const std::string& command, int exit_code, const std::string& error);

}  // namespace floquet
