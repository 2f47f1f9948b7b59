#pragma once

#include <filesystem>
#include <optional>

#include <json.hpp>

#include "gop/recovery.hpp"

namespace gop {

inline constexpr int kReportSchemaVersion = 1;

/// Additive complex Gaussian noise on every measurement; sigma is the
/// standard deviation per component.
struct NoiseSpec {
  Real sigma = 0;
  std::uint64_t seed = 1;
};

/// A fully parsed experiment description.
struct ExperimentConfig {
  std::string name;
  EigenFamily family = EigenFamily::exponential();
  IterationAction iteration = IterationAction::plain_power();
  SpectralMap map = SpectralMap::identity();
  std::vector<SamplingFunctional> functionals;
  int order = 1;
  bool check_admissibility = true;
  RecoveryOptions recovery;
  NoiseSpec noise;
  std::optional<SparseExpansion> truth;
  std::optional<std::string> measurements_csv;
  bool emit_kernel_curves = false;
  int kernel_curve_samples = 200;
};

/// Parses a config object; throws ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

SamplingScheme build_scheme(const ExperimentConfig& config);

/// CSV with header "measurement_id,real,imag".
MeasurementMap read_measurements_csv(const std::filesystem::path& path);
void write_measurements_csv(
    const std::filesystem::path& path,
    const std::vector<std::pair<std::string, Complex>>& rows);

/// Deterministic standard normal stream (64-bit Mersenne Twister plus
/// Box-Muller), identical across platforms for a fixed seed.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}
  Real next();

 private:
  std::mt19937_64 rng_;
  bool have_spare_ = false;
  Real spare_ = 0;
};

void add_noise(std::vector<std::pair<std::string, Complex>>& rows,
               const NoiseSpec& noise);

struct RunOutcome {
  nlohmann::ordered_json report;
  std::optional<RecoveryResult> result;
  bool ok = false;
  /// True when the failure happened before any recovery ran (bad config or
  /// scheme), false for a failure of the recovery itself.
  bool config_stage_failure = false;
};

/// Evaluates the scheme's measurements of the configured truth, adds noise,
/// and writes them as CSV; optionally emits kernel curve samples next to it.
nlohmann::ordered_json simulate(const ExperimentConfig& config,
                                const std::filesystem::path& out_csv,
                                std::optional<std::uint64_t> seed_override = {});

/// Full run: measurements from CSV or simulated truth, then recovery and a
/// versioned report.
RunOutcome run(const ExperimentConfig& config,
               std::optional<std::uint64_t> seed_override = {});

struct BatchItem {
  std::filesystem::path config;
  std::filesystem::path report;
  bool ok = false;
  bool config_stage_failure = false;
};

/// Runs every *.json config in dir concurrently; reports are written as
/// <stem>.report.json under out_dir.
std::vector<BatchItem> run_batch(const std::filesystem::path& dir,
                                 const std::filesystem::path& out_dir,
                                 int jobs = 0);

}  // namespace gop
