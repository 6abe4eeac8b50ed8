#pragma once

#include <cstdint>
#include <vector>

#include "fairmatch/model.hpp"
#include "fairmatch/policies.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

struct Arrival {
  double time;
  TaskIndex type;
};

enum class ArrivalMode {
  per_type,  // one Poisson stream of rate lambda_j per type, merged by time
  merged,    // one stream of rate sum(lambda), type drawn with prob lambda_j / sum
};

/// Lazily merged Poisson arrivals. Per-type mode draws type j from stream
/// (seed, arrival, j); merged mode draws times and types from
/// (seed, merged_arrival). Equal timestamps resolve to the lower type index.
class ArrivalProcess {
 public:
  ArrivalProcess(const Instance& inst, std::uint64_t seed, ArrivalMode mode = ArrivalMode::per_type);

  /// Next arrival; times are nondecreasing.
  Arrival next();

 private:
  ArrivalMode mode_;
  std::vector<double> lambda_;
  std::vector<Rng> streams_;
  std::vector<double> next_time_;
  double total_rate_ = 0.0;
  double clock_ = 0.0;
};

/// Every arrival in [0, horizon], in time order.
std::vector<Arrival> generate_arrivals(const Instance& inst, double horizon, std::uint64_t seed,
                                       ArrivalMode mode = ArrivalMode::per_type);

struct TypeStats {
  std::size_t count = 0;  // tasks whose service started (post warmup)
  double mean_abs_wait = 0.0;
  double max_abs_wait = 0.0;
  double mean_rel_wait = 0.0;  // wait * mu of the serving edge

  bool operator==(const TypeStats&) const = default;
};

struct EdgeStats {
  std::size_t count = 0;
  double mean_duration = 0.0;

  bool operator==(const EdgeStats&) const = default;
};

struct SimMetrics {
  std::vector<TypeStats> per_type;
  std::vector<double> per_worker;  // busy fraction over (warmup, horizon]
  std::vector<EdgeStats> per_edge;
  double max_mean_abs_wait = 0.0;
  double max_mean_rel_wait = 0.0;
  double max_abs_wait = 0.0;  // largest single wait of any task
  double max_workload = 0.0;

  // arrivals == served + censored + warmup_excluded
  std::size_t arrivals = 0;
  std::size_t served = 0;           // arrived after warmup, service started by the horizon
  std::size_t censored = 0;         // arrived after warmup, still queued at the horizon
  std::size_t warmup_excluded = 0;  // arrived before warmup

  bool operator==(const SimMetrics&) const = default;
};

struct TaskRecord {
  std::size_t id;
  TaskIndex type;
  WorkerIndex worker;
  double arrival;
  double start;     // NaN if never started
  double duration;  // NaN if never started
};

struct SimConfig {
  double horizon = 0.0;
  double warmup = 0.0;
  std::uint64_t seed = 0;
  ArrivalMode arrival_mode = ArrivalMode::per_type;
  bool record_trace = false;
};

struct SimOutput {
  SimMetrics metrics;
  std::vector<TaskRecord> trace;  // filled when record_trace is set, in arrival order
};

/// Event-driven run of the FIFO worker queues under `policy`.
///
/// Events pop by time; at equal times arrivals precede completions, then
/// insertion order decides. Service durations are exponential with the
/// serving edge's rate and are drawn when service starts. Random streams:
/// arrivals per ArrivalProcess, service draws from (seed, service), policy
/// draws from (seed, policy). Tasks arriving before the warmup are served
/// but left out of every metric.
SimOutput run_simulation(const Instance& inst, const Dispatcher& policy, const SimConfig& cfg);

}  // namespace fairmatch
