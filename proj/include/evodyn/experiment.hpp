#pragma once

#include "evodyn/approximation.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace evodyn {

inline constexpr const char* kArtifactVersion = "0.1.0";

struct GameSpec {
  KernelKind kind = KernelKind::cosine;
  double V = 1.0;
  std::optional<double> T;
  std::string theta_type = "logistic";
  double alpha = 100.0;
  double x0 = 0.1;
  std::filesystem::path table_file;
  std::optional<Matrix> table;
};

struct ProtocolSpec {
  std::string type = "bnn";  // bnn | smith | power
  double k = 1.0;
  bool per_strategy = false;
  double rate = 1.0;
};

struct GridSpec {
  Index n = 101;
  double lower = 0.0;
  double upper = 2.0;
};

struct ReferenceSpec {
  std::string type = "uniform";  // uniform | weights
  std::vector<double> weights;
};

struct InitialSpec {
  std::string type = "uniform";  // uniform | gaussian | dirac | file | random | war_nash
  double mean = 1.0;
  double variance = 0.1;
  double s = 0.0;
  std::filesystem::path path;
};

struct FeedbackSpec {
  std::string type = "static";     // static | smoothing
  double lambda_s = 1.0;
  std::string rho0 = "from_game";  // from_game | quadratic | file
  std::filesystem::path rho0_path;
};

struct VerifySpec {
  std::vector<std::string> properties{"monotonicity", "sign_preservation", "nash", "rest_point",
                                      "storage_trace"};
  Index trials = 1000;
  double nash_tol = 1e-9;
  double rest_tol = 1e-10;
  double storage_slack = 1e-6;
};

struct RefineSpec {
  std::vector<Index> ns;
};

struct ExperimentConfig {
  GameSpec game;
  ProtocolSpec protocol;
  GridSpec grid;
  ReferenceSpec reference;
  InitialSpec initial;
  FeedbackSpec feedback;
  SimulationOptions time;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";
  VerifySpec verify;
  RefineSpec refine;

  /// Fully resolved parameters, written to run metadata.
  nlohmann::json resolved() const;
};

/// Strict parse: unknown keys and invalid values throw ValidationError naming
/// the key path (e.g. "game.V"). Relative file paths resolve against base_dir.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

// Builders for a given grid.
StrategyGrid build_grid(const ExperimentConfig& config);
PayoffKernel build_kernel(const ExperimentConfig& config, const StrategyGrid& grid);
RevisionProtocol build_protocol(const ExperimentConfig& config, const StrategyGrid& grid);
ReferenceMeasure build_reference(const ExperimentConfig& config, const StrategyGrid& grid);
DiscreteMeasure build_initial(const ExperimentConfig& config, const StrategyGrid& grid);
PayoffVector build_rho0(const ExperimentConfig& config, const PayoffKernel& kernel,
                        const DiscreteMeasure& x0);

/// Runs the configured EDM or DPEDM.
Trajectory run_trajectory(const ExperimentConfig& config);

struct SimulateResult {
  Trajectory trajectory;
  nlohmann::json summary;
};

/// Writes trajectory_cdf.csv, diagnostics.csv, summary.json and metadata.json.
SimulateResult run_simulate(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct PropertyVerdict {
  std::string property;
  std::string verdict;  // PASS | FAIL | SKIP
  std::string detail;
  nlohmann::json data;
};

/// Evaluates the configured properties; prints one line per property and
/// writes verify.json.
std::vector<PropertyVerdict> run_verify(const ExperimentConfig& config,
                                        const std::filesystem::path& out_dir, std::ostream& log);

/// Writes refine.csv.
RefineReport run_refine(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                        unsigned jobs);

}  // namespace evodyn
