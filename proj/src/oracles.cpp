#include "fairmatch/oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>

#include "fairmatch/programs.hpp"

namespace fairmatch {

namespace {

bool nearly_equal(double a, double b) { return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b)); }

}  // namespace

SubsetOracleResult oracle_eta_s_subsets(const Instance& inst) {
  const std::size_t n = inst.num_task_types();
  const std::size_t m = inst.num_workers();
  if (n == 0) throw std::invalid_argument("instance has no task types");
  if (n > kMaxSubsetTaskTypes) throw std::length_error("subset oracle is limited to 22 task types");
  if (m > 64) throw std::length_error("subset oracle is limited to 64 workers");

  for (TaskIndex j = 1; j < n; ++j) {
    if (!nearly_equal(inst.lambda()[j], inst.lambda()[0])) {
      throw std::invalid_argument("subset oracle needs a uniform arrival rate; split task types first");
    }
  }
  std::vector<double> worker_mu(m, 0.0);
  for (WorkerIndex i = 0; i < m; ++i) {
    const auto& es = inst.worker_edges(i);
    if (es.empty()) continue;
    worker_mu[i] = inst.edge(es.front()).mu;
    for (EdgeIndex e : es) {
      if (!nearly_equal(inst.edge(e).mu, worker_mu[i])) {
        throw std::invalid_argument("subset oracle needs one service rate per worker (kappa = 1)");
      }
    }
  }

  std::vector<std::uint64_t> neighbours(n, 0);
  for (const Edge& e : inst.edges()) neighbours[e.task] |= std::uint64_t{1} << e.worker;

  SubsetOracleResult best;
  std::uint32_t best_mask = 0;
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    std::uint64_t nbr = 0;
    double lam = 0.0;
    for (std::uint32_t rest = mask; rest; rest &= rest - 1) {
      const int j = std::countr_zero(rest);
      nbr |= neighbours[j];
      lam += inst.lambda()[j];
    }
    double mu = 0.0;
    for (std::uint64_t rest = nbr; rest; rest &= rest - 1) mu += worker_mu[std::countr_zero(rest)];
    const double ratio = mu > 0.0 ? lam / mu : std::numeric_limits<double>::infinity();
    if (best_mask == 0 || ratio > best.objective) {
      best.objective = ratio;
      best_mask = mask;
    }
  }
  for (TaskIndex j = 0; j < n; ++j) {
    if (best_mask & (std::uint32_t{1} << j)) best.witness.push_back(j);
  }
  return best;
}

int free_dimensions(const Instance& inst) {
  int dims = 0;
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    if (!inst.task_edges(j).empty()) dims += static_cast<int>(inst.task_edges(j).size()) - 1;
  }
  return dims;
}

namespace {

// All ways to write `total` as an ordered sum of `parts` nonnegative integers.
void compositions(int total, int parts, std::vector<int>& cur, std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    cur.push_back(total);
    out.push_back(cur);
    cur.pop_back();
    return;
  }
  for (int k = total; k >= 0; --k) {
    cur.push_back(k);
    compositions(total - k, parts - 1, cur, out);
    cur.pop_back();
  }
}

double max_gradient_norm(const Instance& inst, const PolicyMatrix& x) {
  double best = 0.0;
  for (const auto& row : relative_wait_jacobian(inst, x)) {
    double norm = 0.0;
    for (double v : row) norm += std::abs(v);
    best = std::max(best, norm);
  }
  return best;
}

}  // namespace

GridOracleResult oracle_eta_t_grid(const Instance& inst, int resolution) {
  if (auto problems = validate_instance(inst); !problems.empty()) {
    throw std::invalid_argument("invalid instance: " + problems.front());
  }
  if (resolution < 2 || resolution > kMaxGridResolution) {
    throw std::invalid_argument("grid resolution must lie in [2, 101]");
  }
  if (free_dimensions(inst) > kMaxGridDimensions) {
    throw std::length_error("grid oracle is limited to 4 free dimensions");
  }
  const int steps = resolution - 1;
  const double h = 1.0 / steps;

  // Lattice rows of every task type that has a choice to make.
  std::vector<TaskIndex> free_types;
  std::vector<std::vector<std::vector<int>>> rows;
  PolicyMatrix x{std::vector<double>(inst.num_edges(), 0.0)};
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    const auto& es = inst.task_edges(j);
    if (es.size() == 1) {
      x[es.front()] = 1.0;
      continue;
    }
    free_types.push_back(j);
    std::vector<int> cur;
    rows.emplace_back();
    compositions(steps, static_cast<int>(es.size()), cur, rows.back());
  }

  auto apply = [&](PolicyMatrix& target, std::size_t slot, const std::vector<int>& row) {
    const auto& es = inst.task_edges(free_types[slot]);
    for (std::size_t k = 0; k < es.size(); ++k) target[es[k]] = row[k] * h;
  };

  GridOracleResult res;
  res.cell = h;
  res.objective = std::numeric_limits<double>::infinity();
  std::vector<std::size_t> odometer(free_types.size(), 0);
  std::vector<std::size_t> best_odometer = odometer;
  for (std::size_t s = 0; s < free_types.size(); ++s) apply(x, s, rows[s][0]);
  res.x = x;
  while (true) {
    const double f = eta_t_unchecked(inst, x);
    ++res.points;
    if (f < res.objective) {
      res.objective = f;
      res.x = x;
      best_odometer = odometer;
    }
    std::size_t s = 0;
    for (; s < odometer.size(); ++s) {
      if (++odometer[s] < rows[s].size()) {
        apply(x, s, rows[s][odometer[s]]);
        break;
      }
      odometer[s] = 0;
      apply(x, s, rows[s][0]);
    }
    if (s == odometer.size()) break;
  }

  if (!std::isfinite(res.objective)) {
    res.lipschitz = res.allowance = std::numeric_limits<double>::infinity();
    return res;
  }
  if (free_types.empty()) return res;

  // Lipschitz estimate over the minimiser and its lattice neighbours.
  res.lipschitz = max_gradient_norm(inst, res.x);
  for (std::size_t s = 0; s < free_types.size(); ++s) {
    const std::vector<int>& base = rows[s][best_odometer[s]];
    for (std::size_t a = 0; a < base.size(); ++a) {
      if (base[a] == 0) continue;
      for (std::size_t b = 0; b < base.size(); ++b) {
        if (a == b) continue;
        std::vector<int> moved = base;
        --moved[a];
        ++moved[b];
        PolicyMatrix nb = res.x;
        apply(nb, s, moved);
        if (std::isfinite(eta_t_unchecked(inst, nb))) {
          res.lipschitz = std::max(res.lipschitz, max_gradient_norm(inst, nb));
        }
      }
    }
  }
  res.allowance = res.lipschitz * h;
  return res;
}

double two_type_toy_objective(double p, double q, double x, double y) {
  const double shared = 1.0 - q * (2.0 - x - y);
  const double g = x / (1.0 - p * x) + (1.0 - x) / shared - 1.0;
  const double h = y / (1.0 - p * y) + (1.0 - y) / shared - 1.0;
  return std::max(g, h);
}

NonconvexityResult nonconvexity_witness(double p, double q, int samples_per_axis, double min_gap) {
  if (!(p >= 0.0 && p <= 1.0) || !(q >= 0.0 && q <= 0.5)) {
    throw std::invalid_argument("need p in [0,1] and q in [0,1/2]");
  }
  if (samples_per_axis < 2) throw std::invalid_argument("need at least two samples per axis");

  auto inside = [p, q](double x, double y) {
    return y >= 0.0 && y <= x && x <= 1.0 && 2.0 * q + p * p * x * y >= (p + q) * (x + y);
  };
  struct Sample {
    double x, y, f;
  };
  std::vector<Sample> pts;
  const double step = 1.0 / (samples_per_axis - 1);
  for (int a = 0; a < samples_per_axis; ++a) {
    for (int b = 0; b <= a; ++b) {
      const double x = a * step;
      const double y = b * step;
      if (!inside(x, y)) continue;
      const double f = two_type_toy_objective(p, q, x, y);
      if (std::isfinite(f)) pts.push_back({x, y, f});
    }
  }

  NonconvexityResult res;
  for (std::size_t u = 0; u < pts.size(); ++u) {
    for (std::size_t v = u + 1; v < pts.size(); ++v) {
      const double mx = 0.5 * (pts[u].x + pts[v].x);
      const double my = 0.5 * (pts[u].y + pts[v].y);
      if (!inside(mx, my)) continue;
      const double fm = two_type_toy_objective(p, q, mx, my);
      if (!std::isfinite(fm)) continue;
      const double gap = fm - 0.5 * (pts[u].f + pts[v].f);
      const MidpointWitness w{pts[u].x, pts[u].y, pts[v].x, pts[v].y, pts[u].f, pts[v].f, fm, gap};
      if (gap > min_gap && (!res.convexity_violation || gap > res.convexity_violation->gap)) {
        res.convexity_violation = w;
      }
      if (gap < -min_gap && (!res.concavity_violation || gap < res.concavity_violation->gap)) {
        res.concavity_violation = w;
      }
    }
  }
  return res;
}

}  // namespace fairmatch
