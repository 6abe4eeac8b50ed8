#include "fairmatch/generator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "fairmatch/solvers.hpp"

namespace fairmatch {

std::vector<std::string> validate_generator_spec(const GeneratorSpec& spec) {
  std::vector<std::string> problems;
  if (spec.n_workers == 0) problems.emplace_back("n_workers must be positive");
  if (spec.n_task_types == 0) problems.emplace_back("n_task_types must be positive");
  if (!(spec.kappa >= 1.0) || !std::isfinite(spec.kappa)) problems.emplace_back("kappa must be >= 1");
  if (!(spec.mean_lo > 0.0) || !(spec.mean_hi >= spec.mean_lo) || !std::isfinite(spec.mean_hi)) {
    problems.emplace_back("need 0 < mean_lo <= mean_hi");
  }
  if (spec.edge_rule == EdgeRule::density && !(spec.density > 0.0 && spec.density <= 1.0)) {
    problems.emplace_back("density must lie in (0, 1]");
  }
  if (!(spec.daily_arrivals > 0.0) || !std::isfinite(spec.daily_arrivals)) {
    problems.emplace_back("daily_arrivals must be positive");
  }
  if (!spec.balance.empty()) {
    if (spec.balance.size() != spec.n_task_types) {
      problems.emplace_back("balance needs one probability per task type");
    } else {
      double sum = 0.0;
      bool positive = true;
      for (double b : spec.balance) {
        sum += b;
        positive = positive && b > 0.0;
      }
      if (!positive) problems.emplace_back("balance probabilities must be positive");
      if (std::abs(sum - 1.0) > 1e-9) problems.emplace_back("balance must sum to 1");
    }
  }
  return problems;
}

std::vector<double> worker_task_means(double kappa, double x, std::size_t count, Rng& rng) {
  if (count == 0) return {};
  if (count == 1) return {x};
  const double first = 2.0 * kappa * x / (1.0 + kappa);
  const double last = 2.0 * x - first;
  std::vector<double> means(count);
  means.front() = first;
  means.back() = last;
  for (std::size_t k = 1; k + 1 < count; ++k) means[k] = rng.uniform(last, first);
  return means;
}

Instance generate_instance(const GeneratorSpec& spec, std::uint64_t seed) {
  if (auto problems = validate_generator_spec(spec); !problems.empty()) {
    throw std::invalid_argument("generator: " + problems.front());
  }
  const std::size_t m = spec.n_workers;
  const std::size_t n = spec.n_task_types;
  Rng rng(derive_seed(seed, StreamKind::generator));

  std::vector<std::vector<double>> raw(m, std::vector<double>(n));
  for (auto& row : raw) {
    for (double& d : row) d = rng.uniform(spec.mean_lo, spec.mean_hi);
  }

  std::vector<std::vector<bool>> adj(m, std::vector<bool>(n, false));
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col(m);
    for (std::size_t i = 0; i < m; ++i) col[i] = raw[i][j];
    std::sort(col.begin(), col.end());
    const double median = m % 2 ? col[m / 2] : 0.5 * (col[m / 2 - 1] + col[m / 2]);
    for (std::size_t i = 0; i < m; ++i) {
      switch (spec.edge_rule) {
        case EdgeRule::median_at_most: adj[i][j] = raw[i][j] <= median; break;
        case EdgeRule::median_at_least: adj[i][j] = raw[i][j] >= median; break;
        case EdgeRule::density: adj[i][j] = rng.uniform() < spec.density; break;
      }
    }
    if (std::none_of(adj.begin(), adj.end(), [j](const auto& row) { return row[j]; })) {
      std::size_t fastest = 0;
      for (std::size_t i = 1; i < m; ++i) {
        if (raw[i][j] < raw[fastest][j]) fastest = i;
      }
      adj[fastest][j] = true;
    }
  }

  std::vector<std::string> workers;
  std::vector<std::string> types;
  for (std::size_t j = 0; j < n; ++j) types.push_back("t" + std::to_string(j + 1));
  std::vector<double> lambda(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double share = spec.balance.empty() ? 1.0 / static_cast<double>(n) : spec.balance[j];
    lambda[j] = spec.daily_arrivals * share / kSecondsPerDay;
  }

  std::vector<Edge> edges;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<TaskIndex> served;
    double x = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!adj[i][j]) continue;
      served.push_back(j);
      x += raw[i][j];
    }
    if (served.empty()) continue;
    x /= static_cast<double>(served.size());
    const WorkerIndex w = workers.size();
    workers.push_back("w" + std::to_string(i + 1));
    const auto means = worker_task_means(spec.kappa, x, served.size(), rng);
    for (std::size_t k = 0; k < served.size(); ++k) edges.push_back({w, served[k], 1.0 / means[k]});
  }

  Instance inst(std::move(workers), std::move(types), std::move(lambda), std::move(edges));
  if (auto problems = validate_instance(inst); !problems.empty()) {
    throw std::logic_error("generated instance is invalid: " + problems.front());
  }
  if (solve_ps(inst).status == SolveStatus::infeasible) {
    throw std::runtime_error("generated instance has no stable assignment; lower daily_arrivals");
  }
  return inst;
}

}  // namespace fairmatch
