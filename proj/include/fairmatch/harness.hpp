#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fairmatch/generator.hpp"
#include "fairmatch/model.hpp"
#include "fairmatch/results.hpp"
#include "fairmatch/simulator.hpp"

namespace fairmatch {

enum class SweepAxis { none, kappa, daily_load, balance };

std::string to_string(SweepAxis axis);

/// JSON keys match the field names; "sweep" is {"axis": ..., "values": [...]}
/// where balance values are arrays of probabilities. Exactly one of
/// "instance" (path, relative to the config file) and "generator" is given.
struct ExperimentConfig {
  std::optional<std::filesystem::path> instance;
  std::optional<GeneratorSpec> generator;
  std::vector<std::string> policies;
  double horizon = 0.0;
  double warmup = 0.0;
  int replications = 10;
  std::uint64_t seed = 0;
  SweepAxis sweep_axis = SweepAxis::none;
  std::vector<double> sweep_values;               // kappa or daily_load axis
  std::vector<std::vector<double>> sweep_balances;  // balance axis
  std::string output;                             // empty: stdout
  int pt_starts = 17;
  ArrivalMode arrival_mode = ArrivalMode::per_type;
};

std::vector<std::string> validate_experiment_config(const ExperimentConfig& cfg);

/// Throws std::invalid_argument for malformed JSON or an invalid config.
ExperimentConfig parse_experiment_config(const std::string& text,
                                         const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct SweepPoint {
  std::string label;            // sweep_value column
  std::optional<Instance> instance;  // empty if the point could not be built
  std::string error;
};

/// Instances for every sweep point. A generator that finds no stable
/// assignment yields an empty point rather than an exception.
std::vector<SweepPoint> build_sweep_points(const ExperimentConfig& cfg);

struct MeanCi {
  double mean = 0.0;
  std::optional<double> half_width;  // empty for a single sample
};

/// Sample mean and Student-t 95% half-width with n - 1 degrees of freedom.
MeanCi mean_ci95(const std::vector<double>& samples);

/// Seed of one simulation run. Policies at the same sweep point and
/// replication share it, so they see identical arrivals.
std::uint64_t replication_seed(std::uint64_t root, std::size_t point, std::size_t replication);

/// Threads used for replications: FAIRMATCH_THREADS if set to a positive
/// integer, else the hardware concurrency (at least 1).
std::size_t worker_threads();

/// Rows grouped by sweep point, then by policy in config order: one row per
/// replication, then aggregate_mean and aggregate_ci95. A point whose
/// programs are infeasible gets one `infeasible` row per policy. The output
/// depends only on the config.
ResultTable run_experiment(const ExperimentConfig& cfg);

}  // namespace fairmatch
