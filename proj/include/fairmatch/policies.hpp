#pragma once

#include <deque>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairmatch/model.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

struct QueuedTask {
  std::size_t id;
  TaskIndex type;
  double arrival;
};

struct ServiceSlot {
  std::size_t id;
  TaskIndex type;
  double arrival;
  double start;
  double duration;       // realised; only the simulator and GWU's elapsed time use it
  double mean_duration;  // 1 / mu of the serving edge
};

/// Live queue state owned by the simulator and handed to policies read-only.
struct RuntimeState {
  double now = 0.0;
  std::vector<std::deque<QueuedTask>> queues;
  std::vector<std::optional<ServiceSlot>> in_service;
  /// Completed service time per worker, excluding the task in service.
  std::vector<double> busy_time;

  explicit RuntimeState(std::size_t workers = 0)
      : queues(workers), in_service(workers), busy_time(workers, 0.0) {}

  bool is_free(WorkerIndex i) const { return !in_service[i] && queues[i].empty(); }
};

/// Algorithm 1: draw a neighbour with probability x_ij, ignoring the state.
/// Consumes exactly one uniform draw. Throws std::invalid_argument if the
/// row of j carries no mass.
WorkerIndex assign_lp_random(const Instance& inst, const PolicyMatrix& x, TaskIndex j, Rng& rng);

/// Algorithm 2: prefer free neighbours, drawn with x renormalised over the
/// free set. A free set with zero mass falls back to a uniform draw over it;
/// an empty free set falls back to assign_lp_random.
WorkerIndex assign_free_first(const Instance& inst, const PolicyMatrix& x, TaskIndex j,
                              const RuntimeState& state, Rng& rng);

/// Greedy task waiting: neighbour with the smallest estimated wait, i.e. the
/// mean durations of its queued tasks plus the mean remaining time of the
/// task in service (never below zero). The arriving task's own duration is
/// not counted.
WorkerIndex assign_gtw(const Instance& inst, TaskIndex j, const RuntimeState& state);

/// Greedy worker utilisation: neighbour with the lowest busy fraction so far,
/// counting the elapsed part of its current service.
WorkerIndex assign_gwu(const Instance& inst, TaskIndex j, const RuntimeState& state);

enum class PolicyKind { lp_random, free_first, gtw, gwu };
enum class ProgramChoice { none, pt, ps };

struct PolicyName {
  PolicyKind kind;
  ProgramChoice program;
};

/// lp-random-pt, lp-random-ps, free-first-pt, free-first-ps, gtw, gwu.
PolicyName parse_policy_name(std::string_view name);
std::string policy_name(PolicyName p);
const std::vector<std::string>& all_policy_names();

/// A policy bound to an instance (and, for the LP-based kinds, to the
/// offline solution it randomises over).
class Dispatcher {
 public:
  Dispatcher(const Instance& inst, PolicyKind kind, PolicyMatrix x = {});

  WorkerIndex assign(TaskIndex j, const RuntimeState& state, Rng& rng) const;
  PolicyKind kind() const { return kind_; }

 private:
  const Instance* inst_;
  PolicyKind kind_;
  PolicyMatrix x_;
};

}  // namespace fairmatch
