#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace fairmatch {

using WorkerIndex = std::size_t;
using TaskIndex = std::size_t;
using EdgeIndex = std::size_t;

/// Tolerance on sum_i x_ij = 1 when a policy is accepted for evaluation.
inline constexpr double kSimplexTolerance = 1e-9;

/// Workloads at or above 1 - kStabilityEpsilon are treated as unstable.
inline constexpr double kStabilityEpsilon = 1e-12;

struct Edge {
  WorkerIndex worker;
  TaskIndex task;
  double mu;  // service rate, mean duration 1/mu
};

/// Bipartite worker/task-type network with Poisson arrival rates per task
/// type and an exponential service rate per edge.
///
/// Edges keep insertion order and every traversal (per worker, per task
/// type) follows that order, so all computations are reproducible. The
/// constructor only checks that edge endpoints are in range; semantic
/// problems are reported by validate_instance().
class Instance {
 public:
  Instance() = default;
  Instance(std::vector<std::string> workers, std::vector<std::string> task_types,
           std::vector<double> lambda, std::vector<Edge> edges);

  std::size_t num_workers() const { return workers_.size(); }
  std::size_t num_task_types() const { return task_types_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<std::string>& workers() const { return workers_; }
  const std::vector<std::string>& task_types() const { return task_types_; }
  const std::vector<double>& lambda() const { return lambda_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeIndex e) const { return edges_[e]; }

  /// Edge indices incident to worker i (N_i), in insertion order.
  const std::vector<EdgeIndex>& worker_edges(WorkerIndex i) const { return worker_edges_[i]; }
  /// Edge indices incident to task type j (N_j), in insertion order.
  const std::vector<EdgeIndex>& task_edges(TaskIndex j) const { return task_edges_[j]; }

  std::optional<EdgeIndex> find_edge(WorkerIndex i, TaskIndex j) const;
  std::optional<WorkerIndex> find_worker(const std::string& id) const;
  std::optional<TaskIndex> find_task_type(const std::string& id) const;

 private:
  std::vector<std::string> workers_;
  std::vector<std::string> task_types_;
  std::vector<double> lambda_;
  std::vector<Edge> edges_;
  std::vector<std::vector<EdgeIndex>> worker_edges_;
  std::vector<std::vector<EdgeIndex>> task_edges_;
};

/// Assignment fractions x_ij, one entry per edge of the owning instance.
struct PolicyMatrix {
  std::vector<double> x;

  double operator[](EdgeIndex e) const { return x[e]; }
  double& operator[](EdgeIndex e) { return x[e]; }
  std::size_t size() const { return x.size(); }
};

/// Closed-form queueing quantities of every worker queue (an M/G/1 queue
/// with hyperexponential service) and of every task type.
struct DerivedRates {
  std::vector<double> lambda_i;  // arrival rate on the worker's queue
  std::vector<double> s_i;       // mean service time of that queue
  std::vector<double> rho_i;     // workload
  std::vector<double> w_i;       // expected wait (Pollaczek-Khinchin), +inf if unstable
  std::vector<double> w_j;       // expected absolute wait of a type
  std::vector<double> wbar_j;    // expected relative wait of a type
};

std::vector<std::string> validate_instance(const Instance& inst);

/// Throws std::invalid_argument when x is outside the box or a per-type
/// sum deviates from 1 by more than kSimplexTolerance.
DerivedRates derived_rates(const Instance& inst, const PolicyMatrix& x);

/// Same formulas without precondition checks; used on hot paths that
/// guarantee feasibility by construction.
DerivedRates derived_rates_unchecked(const Instance& inst, const PolicyMatrix& x);

/// Throws std::invalid_argument naming the first violated precondition.
void check_policy_shape(const Instance& inst, const PolicyMatrix& x);

bool is_unstable(double rho);

/// max over workers of the largest pairwise ratio of its service rates.
double kappa(const Instance& inst);

/// Replaces task type j by k copies with rate lambda_j / k and identical
/// neighbourhoods. Copies take j's position and are named "<id>#1".."<id>#k".
Instance split_task_type(const Instance& inst, TaskIndex j, int k);

/// Copies x_ij onto every clone produced by split_task_type(inst, j, k).
PolicyMatrix lift_split_policy(const Instance& inst, const Instance& split, TaskIndex j,
                               int k, const PolicyMatrix& x);

/// Every edge rate of worker i becomes max_{j~i} mu_ij.
Instance uniform_mu_relaxation(const Instance& inst);

/// Uniform split of every type across its neighbours.
PolicyMatrix uniform_policy(const Instance& inst);

}  // namespace fairmatch
