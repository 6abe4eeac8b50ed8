#pragma once

#include <cstdint>
#include <vector>

#include "fairmatch/model.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

enum class EdgeRule {
  median_at_most,   // edge iff the worker's raw duration is <= the type's median
  median_at_least,  // edge iff the worker's raw duration is >= the type's median
  density,          // independent coin with probability `density`
};

struct GeneratorSpec {
  std::size_t n_workers = 9;
  std::size_t n_task_types = 4;
  double kappa = 1.0;
  /// Range of the raw per-(worker, type) mean durations, seconds.
  double mean_lo = 3.33;
  double mean_hi = 8.0;
  EdgeRule edge_rule = EdgeRule::median_at_most;
  double density = 0.5;
  double daily_arrivals = 80000.0;
  /// Arrival probabilities per type; empty means uniform.
  std::vector<double> balance;
};

inline constexpr double kSecondsPerDay = 86400.0;

/// Problems with the spec itself; empty when usable.
std::vector<std::string> validate_generator_spec(const GeneratorSpec& spec);

/// Mean durations of one worker's `count` tasks around average x: the first
/// is 2 kappa x / (1 + kappa), the last 2x minus the first, the rest uniform
/// in between. A single task gets x.
std::vector<double> worker_task_means(double kappa, double x, std::size_t count, Rng& rng);

/// Synthetic instance. Raw durations are drawn uniformly in [mean_lo,
/// mean_hi] per (worker, type); the edge rule selects the graph; a worker's
/// average x is the mean raw duration over its edges, and its edge means
/// follow worker_task_means in type order. Workers left without edges are
/// dropped; types left without workers get the worker with the smallest raw
/// duration. lambda_j = daily_arrivals * balance_j / 86400.
/// Throws std::invalid_argument for a bad spec and std::runtime_error when
/// no stable assignment exists.
Instance generate_instance(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace fairmatch
