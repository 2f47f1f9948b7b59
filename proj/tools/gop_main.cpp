#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gop/experiment.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRecoveryFailure = 3;

std::filesystem::path default_output(const std::filesystem::path& config,
                                     const char* suffix) {
  std::filesystem::path p = config.filename();
  p.replace_extension();
  p += suffix;
  return p;
}

void write_report(const std::filesystem::path& path,
                  const nlohmann::ordered_json& report) {
  std::ofstream out(path);
  if (!out) {
    std::cerr << "error: cannot write " << path << "\n";
    std::exit(kExitConfigError);
  }
  out << report.dump(2) << '\n';
}

int cmd_run(const std::string& config_path, const std::string& out_path,
            std::optional<std::uint64_t> seed) {
  gop::ExperimentConfig config;
  try {
    config = gop::load_config(config_path);
  } catch (const gop::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  const gop::RunOutcome outcome = gop::run(config, seed);
  const std::filesystem::path report_path =
      out_path.empty() ? default_output(config_path, ".report.json")
                       : std::filesystem::path(out_path);
  write_report(report_path, outcome.report);
  if (!outcome.ok) {
    std::cerr << "error: " << outcome.report["error"]["message"].get<std::string>()
              << "\n";
    std::cerr << "report: " << report_path.string() << "\n";
    return outcome.config_stage_failure ? kExitConfigError
                                        : kExitRecoveryFailure;
  }
  const auto& rec = outcome.report["recovery"];
  std::cout << config.name << ": recovered " << rec["params"].size()
            << " terms, residual " << rec["residual"].dump() << "\n";
  std::cout << "report: " << report_path.string() << "\n";
  return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::optional<std::uint64_t> seed) {
  try {
    const gop::ExperimentConfig config = gop::load_config(config_path);
    const std::filesystem::path csv =
        out_path.empty() ? default_output(config_path, ".measurements.csv")
                         : std::filesystem::path(out_path);
    const auto report = gop::simulate(config, csv, seed);
    std::cout << config.name << ": wrote "
              << report["measurement_count"].get<std::size_t>()
              << " measurements to " << csv.string() << "\n";
    if (report.contains("kernel_curves_csv"))
      std::cout << "kernel curves: "
                << report["kernel_curves_csv"].get<std::string>() << "\n";
    return kExitOk;
  } catch (const gop::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
}

int cmd_batch(const std::string& dir, const std::string& out_dir, int jobs) {
  std::vector<gop::BatchItem> items;
  try {
    items = gop::run_batch(dir, out_dir.empty() ? dir : out_dir, jobs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  if (items.empty()) {
    std::cerr << "error: no *.json configs in " << dir << "\n";
    return kExitConfigError;
  }
  bool any_config_failure = false, any_recovery_failure = false;
  for (const auto& item : items) {
    std::cout << (item.ok ? "ok   " : "FAIL ") << item.config.string() << " -> "
              << item.report.string() << "\n";
    if (!item.ok) {
      if (item.config_stage_failure)
        any_config_failure = true;
      else
        any_recovery_failure = true;
    }
  }
  if (any_config_failure) return kExitConfigError;
  if (any_recovery_failure) return kExitRecoveryFailure;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Recovery of sparse eigenfunction expansions from generalized samples"};
  app.require_subcommand(1);

  std::string run_config, run_out;
  std::uint64_t run_seed = 0;
  auto* run_cmd =
      app.add_subcommand("run", "recover an expansion and write a report");
  run_cmd->add_option("config", run_config, "config JSON file")->required();
  run_cmd->add_option("--out", run_out, "report path (default <stem>.report.json)");
  auto* run_seed_opt = run_cmd->add_option("--seed", run_seed, "noise seed override");

  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  auto* sim_cmd = app.add_subcommand(
      "simulate", "evaluate a config's measurements and write them as CSV");
  sim_cmd->add_option("config", sim_config, "config JSON file")->required();
  sim_cmd->add_option("--out", sim_out,
                      "CSV path (default <stem>.measurements.csv)");
  auto* sim_seed_opt = sim_cmd->add_option("--seed", sim_seed, "noise seed override");

  std::string batch_dir, batch_out;
  int batch_jobs = 0;
  auto* batch_cmd =
      app.add_subcommand("batch", "run every config JSON in a directory");
  batch_cmd->add_option("dir", batch_dir, "directory of config files")
      ->required();
  batch_cmd->add_option("--out", batch_out, "report directory (default: dir)");
  batch_cmd->add_option("--jobs", batch_jobs, "worker threads (default: auto)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfigError;
  }

  if (run_cmd->parsed())
    return cmd_run(run_config, run_out,
                   run_seed_opt->count() ? std::optional(run_seed)
                                         : std::nullopt);
  if (sim_cmd->parsed())
    return cmd_simulate(sim_config, sim_out,
                        sim_seed_opt->count() ? std::optional(sim_seed)
                                              : std::nullopt);
  return cmd_batch(batch_dir, batch_out, batch_jobs);
}
