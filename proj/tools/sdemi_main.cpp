// Config-driven experiment runner: simulation, MMSE/MI estimation, identity
// verification, SNR classification, and plot-ready exports.

#include <chrono>
#include <cstdio>
#include <map>
#include <string>

#include <CLI11.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "sdemi/config.hpp"
#include "sdemi/errors.hpp"
#include "sdemi/report.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_override;
  std::uint64_t seed_override = 0;
  bool seed_set = false;
  int replicates_override = 0;
  int workers = 0;
  bool quiet = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "experiment config (JSON)")->required();
  cmd->add_option("--seed", args.seed_override, "override master_seed")
      ->each([&](const std::string&) { args.seed_set = true; });
  cmd->add_option("--out", args.out_override, "override output directory");
  cmd->add_option("--replicates", args.replicates_override, "override replicate count");
  cmd->add_option("--workers", args.workers, "worker threads (0 = runtime default)");
  cmd->add_flag("--quiet", args.quiet, "suppress progress output");
}

sdemi::ExperimentConfig load(const CommonArgs& args) {
  auto cfg = sdemi::load_config(args.config_path);
  if (args.seed_set) cfg.master_seed = args.seed_override;
  if (!args.out_override.empty()) cfg.out_dir = args.out_override;
  if (args.replicates_override > 0) cfg.replicates = args.replicates_override;
#ifdef _OPENMP
  if (args.workers > 0) omp_set_num_threads(args.workers);
#endif
  return cfg;
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const CommonArgs& args) {
  const auto cfg = load(args);
  const auto entry = cfg.resolve();
  std::map<std::string, double> timings;

  auto t0 = std::chrono::steady_clock::now();
  const auto verdict =
      sdemi::classify_system(entry.system, entry.input, cfg.grid, cfg.master_seed, cfg.probe_budget);
  timings["classify"] = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  auto result = sdemi::run_ensemble(entry, cfg.ensemble_spec());
  sdemi::attach_gsv(result, verdict);
  timings["ensemble"] = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::vector<sdemi::EmittedFile> files;
  files.push_back(
      sdemi::write_file(cfg.out_dir, "mmse_surface.csv", sdemi::render_mmse_surface_csv(result.surface)));
  files.push_back(
      sdemi::write_file(cfg.out_dir, "info_curve.csv", sdemi::render_info_curve_csv(result.info)));
  timings["write"] = ms_since(t0);

  const auto manifest = sdemi::manifest_json("run", cfg, result, timings, files);
  sdemi::write_file(cfg.out_dir, "manifest.json", manifest.dump(2) + "\n");

  if (!args.quiet) {
    std::printf("run: %s (verdict %s), %ld replicates (%ld aborted), outputs in %s\n",
                cfg.system_id.c_str(), sdemi::to_string(verdict.verdict),
                result.surface.n_effective, result.surface.n_aborted, cfg.out_dir.c_str());
  }
  return 0;
}

int cmd_verify(const CommonArgs& args) {
  const auto cfg = load(args);
  const auto entry = cfg.resolve();

  const auto verdict =
      sdemi::classify_system(entry.system, entry.input, cfg.grid, cfg.master_seed, cfg.probe_budget);
  auto result = sdemi::run_ensemble(entry, cfg.ensemble_spec());
  const auto report = sdemi::identity_residuals(result, verdict, cfg.tolerances);

  const auto j = sdemi::identity_report_json(cfg.system_id, verdict, result, report);
  sdemi::write_file(cfg.out_dir, "identity_report.json", j.dump(2) + "\n");

  if (!args.quiet) {
    for (const auto& fam : j.at("families"))
      std::printf("%-10s %s%s\n", fam.at("name").get<std::string>().c_str(),
                  fam.at("pass").get<bool>() ? "pass" : "FAIL",
                  fam.at("diagnostic").get<bool>() ? " (diagnostic)" : "");
    for (const auto& s : report.skipped) std::printf("skipped: %s\n", s.c_str());
  }
  if (!report.all_applicable_pass) {
    for (const auto& e : report.entries)
      if (!e.diagnostic && !e.pass) {
        std::fprintf(stderr, "verify: identity '%s' failed at r=%g (residual %.3g > tolerance %.3g)\n",
                     e.family.c_str(), e.r, e.residual, e.tolerance);
        break;
      }
    return 1;
  }
  return 0;
}

int cmd_classify(const CommonArgs& args) {
  const auto cfg = load(args);
  const auto entry = cfg.resolve();
  const auto report =
      sdemi::classify_system(entry.system, entry.input, cfg.grid, cfg.master_seed, cfg.probe_budget);
  const auto j = sdemi::class_report_json(cfg.system_id, entry.expected_class, report);
  sdemi::write_file(cfg.out_dir, "class_report.json", j.dump(2) + "\n");
  if (!args.quiet)
    std::printf("classify: %s -> %s\n", cfg.system_id.c_str(), sdemi::to_string(report.verdict));
  return 0;
}

int cmd_plotdata(const CommonArgs& args) {
  const auto cfg = load(args);
  try {
    const auto files = sdemi::emit_plotdata(cfg.out_dir);
    if (!args.quiet)
      for (const auto& f : files) std::printf("plotdata: wrote %s/%s\n", cfg.out_dir.c_str(), f.name.c_str());
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "plotdata: %s\n", e.what());
    return 5;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic input-output system laboratory: MMSE / mutual-information experiments"};
  app.require_subcommand(1);

  CommonArgs run_args, verify_args, classify_args, plot_args;
  auto* run = app.add_subcommand("run", "estimate MMSE surfaces and information curves");
  add_common(run, run_args);
  auto* verify = app.add_subcommand("verify", "check the information/MMSE identities");
  add_common(verify, verify_args);
  auto* classify = app.add_subcommand("classify", "decide the SNR class of a system");
  add_common(classify, classify_args);
  auto* plotdata = app.add_subcommand("plotdata", "emit plot-ready series from run outputs");
  add_common(plotdata, plot_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_args);
    if (verify->parsed()) return cmd_verify(verify_args);
    if (classify->parsed()) return cmd_classify(classify_args);
    if (plotdata->parsed()) return cmd_plotdata(plot_args);
  } catch (const sdemi::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const sdemi::UnsupportedInput& e) {
    std::fprintf(stderr, "unsupported input model: %s\n", e.what());
    return 3;
  } catch (const sdemi::TooFewReplicates& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
