#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "floquet/errors.hpp"
#include "floquet/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Floquet spectra of periodic 2N x 2N Dirac systems"};
  std::string config_path, command, out_dir;
  double rtol = 0.0;
  int jobs = -1;
  std::vector<double> window, n_range, disk;
  app.add_option("--config", config_path, "config file (key = value)")->required();
  app.add_option("--command", command, "bands | eigenvalues | resonances | asymptotics | traces | casestudy");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--rtol", rtol, "integrator relative tolerance, in [1e-13, 1e-6]");
  app.add_option("--jobs", jobs, "worker threads (0 = all cores)");
  app.add_option("--window", window, "real window A B")->expected(2);
  app.add_option("--n-range", n_range, "cell range A B")->expected(2);
  app.add_option("--disk", disk, "disk RE IM RAD")->expected(3);
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  floquet::RunConfig cfg;
  try {
    cfg = floquet::load_run_config(config_path, command);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (app.count("--rtol")) cfg.rtol = rtol;
    if (app.count("--jobs")) {
      if (jobs < 0) throw floquet::InvalidInput("jobs: must be non-negative");
      cfg.jobs = static_cast<unsigned>(jobs);
    }
    if (!window.empty()) cfg.window = floquet::Window{window[0], window[1]};
    if (!n_range.empty()) {
      for (double x : n_range)
        if (x != static_cast<int>(x)) throw floquet::InvalidInput("n-range: expected integers");
      cfg.n_range = std::make_pair(static_cast<int>(n_range[0]), static_cast<int>(n_range[1]));
    }
    if (!disk.empty()) cfg.disk = floquet::Disk{floquet::cplx(disk[0], disk[1]), disk[2]};
  } catch (const floquet::InvalidInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    // Still leave a manifest behind when the output directory is known.
    if (!out_dir.empty()) floquet::write_failure_manifest(out_dir, command, 2, e.what());
    return 2;
  }

  const floquet::RunOutcome r = floquet::run(cfg);
  if (!r.error.empty()) std::cerr << "error: " << r.error << "\n";
  for (const auto& f : r.flags) std::cerr << "flag: " << f << "\n";
  std::cout << "wrote " << r.files.size() << " files to " << cfg.out_dir << " (exit " << r.exit_code << ")\n";
  return r.exit_code;
}
