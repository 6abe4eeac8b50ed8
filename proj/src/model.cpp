#include "fairmatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace fairmatch {

Instance::Instance(std::vector<std::string> workers, std::vector<std::string> task_types,
                   std::vector<double> lambda, std::vector<Edge> edges)
    : workers_(std::move(workers)),
      task_types_(std::move(task_types)),
      lambda_(std::move(lambda)),
      edges_(std::move(edges)),
      worker_edges_(workers_.size()),
      task_edges_(task_types_.size()) {
  if (lambda_.size() != task_types_.size()) {
    throw std::invalid_argument("one arrival rate per task type is required");
  }
  for (EdgeIndex e = 0; e < edges_.size(); ++e) {
    const Edge& edge = edges_[e];
    if (edge.worker >= workers_.size() || edge.task >= task_types_.size()) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    worker_edges_[edge.worker].push_back(e);
    task_edges_[edge.task].push_back(e);
  }
}

std::optional<EdgeIndex> Instance::find_edge(WorkerIndex i, TaskIndex j) const {
  if (i >= worker_edges_.size()) return std::nullopt;
  for (EdgeIndex e : worker_edges_[i]) {
    if (edges_[e].task == j) return e;
  }
  return std::nullopt;
}

std::optional<WorkerIndex> Instance::find_worker(const std::string& id) const {
  auto it = std::find(workers_.begin(), workers_.end(), id);
  if (it == workers_.end()) return std::nullopt;
  return static_cast<WorkerIndex>(it - workers_.begin());
}

std::optional<TaskIndex> Instance::find_task_type(const std::string& id) const {
  auto it = std::find(task_types_.begin(), task_types_.end(), id);
  if (it == task_types_.end()) return std::nullopt;
  return static_cast<TaskIndex>(it - task_types_.begin());
}

std::vector<std::string> validate_instance(const Instance& inst) {
  std::vector<std::string> problems;

  std::set<std::string> seen;
  for (const auto& w : inst.workers()) {
    if (!seen.insert(w).second) problems.push_back("duplicate worker id '" + w + "'");
  }
  seen.clear();
  for (const auto& t : inst.task_types()) {
    if (!seen.insert(t).second) problems.push_back("duplicate task type id '" + t + "'");
  }

  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    const std::string& id = inst.task_types()[j];
    const double lam = inst.lambda()[j];
    if (!(lam > 0.0) || !std::isfinite(lam)) {
      problems.push_back("task " + id + ": arrival rate must be positive");
    }
    if (inst.task_edges(j).empty()) {
      problems.push_back("task " + id + " has no feasible worker");
    }
  }

  std::set<std::pair<WorkerIndex, TaskIndex>> keys;
  for (const Edge& e : inst.edges()) {
    const std::string name = inst.workers()[e.worker] + "|" + inst.task_types()[e.task];
    if (!keys.insert({e.worker, e.task}).second) {
      problems.push_back("duplicate edge " + name);
    }
    if (!(e.mu > 0.0) || !std::isfinite(e.mu)) {
      problems.push_back("edge " + name + ": service rate must be positive");
    }
  }
  return problems;
}

bool is_unstable(double rho) { return rho >= 1.0 - kStabilityEpsilon; }

void check_policy_shape(const Instance& inst, const PolicyMatrix& x) {
  if (x.size() != inst.num_edges()) {
    throw std::invalid_argument("policy has " + std::to_string(x.size()) +
                                " entries, instance has " + std::to_string(inst.num_edges()) +
                                " edges");
  }
  for (EdgeIndex e = 0; e < x.size(); ++e) {
    if (!(x[e] >= 0.0 && x[e] <= 1.0)) {
      std::ostringstream msg;
      msg << "x on edge " << inst.workers()[inst.edge(e).worker] << "|"
          << inst.task_types()[inst.edge(e).task] << " = " << x[e] << " outside [0,1]";
      throw std::invalid_argument(msg.str());
    }
  }
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    double sum = 0.0;
    for (EdgeIndex e : inst.task_edges(j)) sum += x[e];
    if (std::abs(sum - 1.0) > kSimplexTolerance) {
      std::ostringstream msg;
      msg << "assignment fractions of task " << inst.task_types()[j] << " sum to " << sum;
      throw std::invalid_argument(msg.str());
    }
  }
}

DerivedRates derived_rates_unchecked(const Instance& inst, const PolicyMatrix& x) {
  const std::size_t m = inst.num_workers();
  const std::size_t n = inst.num_task_types();
  const auto& lam = inst.lambda();
  DerivedRates r;
  r.lambda_i.assign(m, 0.0);
  r.s_i.assign(m, 0.0);
  r.rho_i.assign(m, 0.0);
  r.w_i.assign(m, 0.0);
  r.w_j.assign(n, 0.0);
  r.wbar_j.assign(n, 0.0);

  for (WorkerIndex i = 0; i < m; ++i) {
    double lambda_i = 0.0;
    double rho = 0.0;
    double second = 0.0;  // lambda_i * E[S_i^2] / 2
    for (EdgeIndex e : inst.worker_edges(i)) {
      const Edge& edge = inst.edge(e);
      const double flow = x[e] * lam[edge.task];
      lambda_i += flow;
      rho += flow / edge.mu;
      second += flow / (edge.mu * edge.mu);
    }
    double s = 0.0;
    if (lambda_i > 0.0) {
      for (EdgeIndex e : inst.worker_edges(i)) {
        const Edge& edge = inst.edge(e);
        s += (x[e] * lam[edge.task]) / (lambda_i * edge.mu);
      }
    }
    r.lambda_i[i] = lambda_i;
    r.s_i[i] = s;
    r.rho_i[i] = rho;
    if (lambda_i == 0.0) {
      r.w_i[i] = 0.0;
    } else if (is_unstable(rho)) {
      r.w_i[i] = std::numeric_limits<double>::infinity();
    } else {
      r.w_i[i] = second / (1.0 - rho);
    }
  }

  for (TaskIndex j = 0; j < n; ++j) {
    double wj = 0.0;
    double wbar = 0.0;
    for (EdgeIndex e : inst.task_edges(j)) {
      if (x[e] == 0.0) continue;  // 0 * inf must not poison the sum
      const Edge& edge = inst.edge(e);
      wj += x[e] * r.w_i[edge.worker];
      wbar += x[e] * edge.mu * r.w_i[edge.worker];
    }
    r.w_j[j] = wj;
    r.wbar_j[j] = wbar;
  }
  return r;
}

DerivedRates derived_rates(const Instance& inst, const PolicyMatrix& x) {
  check_policy_shape(inst, x);
  return derived_rates_unchecked(inst, x);
}

double kappa(const Instance& inst) {
  double result = 1.0;
  for (WorkerIndex i = 0; i < inst.num_workers(); ++i) {
    const auto& es = inst.worker_edges(i);
    if (es.size() < 2) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (EdgeIndex e : es) {
      lo = std::min(lo, inst.edge(e).mu);
      hi = std::max(hi, inst.edge(e).mu);
    }
    result = std::max(result, hi / lo);
  }
  return result;
}

Instance split_task_type(const Instance& inst, TaskIndex j, int k) {
  if (j >= inst.num_task_types()) throw std::out_of_range("unknown task type");
  if (k < 2) throw std::invalid_argument("split factor must be at least 2");

  // Old type index -> first new index; copies of j occupy [base, base + k).
  std::vector<TaskIndex> base(inst.num_task_types());
  std::vector<std::string> types;
  std::vector<double> lambda;
  for (TaskIndex t = 0; t < inst.num_task_types(); ++t) {
    base[t] = types.size();
    if (t == j) {
      for (int c = 1; c <= k; ++c) {
        types.push_back(inst.task_types()[t] + "#" + std::to_string(c));
        lambda.push_back(inst.lambda()[t] / k);
      }
    } else {
      types.push_back(inst.task_types()[t]);
      lambda.push_back(inst.lambda()[t]);
    }
  }

  std::vector<Edge> edges;
  for (const Edge& e : inst.edges()) {
    if (e.task == j) {
      for (int c = 0; c < k; ++c) edges.push_back({e.worker, base[j] + c, e.mu});
    } else {
      edges.push_back({e.worker, base[e.task], e.mu});
    }
  }
  return Instance(inst.workers(), std::move(types), std::move(lambda), std::move(edges));
}

PolicyMatrix lift_split_policy(const Instance& inst, const Instance& split, TaskIndex j,
                               int k, const PolicyMatrix& x) {
  if (x.size() != inst.num_edges()) throw std::invalid_argument("policy size mismatch");
  PolicyMatrix y{std::vector<double>(split.num_edges(), 0.0)};
  // split_task_type emits edges in the same order, expanding edges of j k-fold.
  EdgeIndex out = 0;
  for (EdgeIndex e = 0; e < inst.num_edges(); ++e) {
    const int copies = inst.edge(e).task == j ? k : 1;
    for (int c = 0; c < copies; ++c) y[out++] = x[e];
  }
  if (out != split.num_edges()) throw std::invalid_argument("instance is not a split of the original");
  return y;
}

Instance uniform_mu_relaxation(const Instance& inst) {
  std::vector<double> row_max(inst.num_workers(), 0.0);
  for (const Edge& e : inst.edges()) row_max[e.worker] = std::max(row_max[e.worker], e.mu);
  std::vector<Edge> edges = inst.edges();
  for (Edge& e : edges) e.mu = row_max[e.worker];
  return Instance(inst.workers(), inst.task_types(), inst.lambda(), std::move(edges));
}

PolicyMatrix uniform_policy(const Instance& inst) {
  PolicyMatrix x{std::vector<double>(inst.num_edges(), 0.0)};
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    const auto& es = inst.task_edges(j);
    for (EdgeIndex e : es) x[e] = 1.0 / static_cast<double>(es.size());
  }
  return x;
}

}  // namespace fairmatch
