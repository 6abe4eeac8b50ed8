#include "fairmatch/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "fairmatch/lp.hpp"
#include "fairmatch/programs.hpp"
#include "fairmatch/rng.hpp"

namespace fairmatch {

std::string_view to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return "optimal";
    case SolveStatus::local: return "local";
    case SolveStatus::infeasible: return "infeasible";
  }
  return "unknown";
}

SolveResult solve_ps(const Instance& inst) {
  if (auto problems = validate_instance(inst); !problems.empty()) {
    throw std::invalid_argument("invalid instance: " + problems.front());
  }
  lp::Problem prob;
  for (EdgeIndex e = 0; e < inst.num_edges(); ++e) prob.add_variable(0.0, 0.0, 1.0);
  // rho <= 1 carries every workload constraint rho_i <= 1 through rho_i <= rho.
  const std::size_t rho = prob.add_variable(1.0, 0.0, 1.0);

  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    std::vector<lp::Term> terms;
    for (EdgeIndex e : inst.task_edges(j)) terms.push_back({e, 1.0});
    prob.add_constraint(std::move(terms), lp::Sense::equal, 1.0);
  }
  for (WorkerIndex i = 0; i < inst.num_workers(); ++i) {
    std::vector<lp::Term> terms;
    for (EdgeIndex e : inst.worker_edges(i)) {
      terms.push_back({e, inst.lambda()[inst.edge(e).task] / inst.edge(e).mu});
    }
    terms.push_back({rho, -1.0});
    prob.add_constraint(std::move(terms), lp::Sense::less_equal, 0.0);
  }

  const lp::Result lp_res = lp::solve(prob);
  SolveResult res;
  res.iterations = lp_res.iterations;
  if (lp_res.status != lp::Status::optimal) {
    res.status = SolveStatus::infeasible;
    res.message = std::string("linear program ") + std::string(lp::to_string(lp_res.status));
    return res;
  }
  res.x.x.assign(lp_res.x.begin(), lp_res.x.begin() + static_cast<std::ptrdiff_t>(inst.num_edges()));
  // Snap per-type sums back onto the simplex; the LP leaves ~1e-15 residue.
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    double sum = 0.0;
    for (EdgeIndex e : inst.task_edges(j)) sum += res.x[e];
    for (EdgeIndex e : inst.task_edges(j)) res.x[e] /= sum;
  }
  res.objective = eta_s_unchecked(inst, res.x);
  res.status = SolveStatus::optimal;
  return res;
}

void project_onto_simplex(std::span<double> v) {
  if (v.empty()) return;
  std::vector<double> u(v.begin(), v.end());
  std::sort(u.begin(), u.end(), std::greater<>());
  double cumulative = 0.0;
  double theta = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    cumulative += u[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (u[k] - t > 0.0) theta = t;
  }
  for (double& x : v) x = std::max(x - theta, 0.0);
}

namespace {

// Smoothed max of the relative waits, +inf outside the stability margin.
class SmoothedObjective {
 public:
  SmoothedObjective(const Instance& inst, double cap)
      : inst_(inst),
        cap_(cap),
        rho_(inst.num_workers()),
        second_(inst.num_workers()),
        w_(inst.num_workers()),
        wbar_(inst.num_task_types()),
        weight_(inst.num_task_types()) {}

  // Returns false when some worker exceeds the cap.
  bool evaluate(const std::vector<double>& x) {
    const auto& lam = inst_.lambda();
    for (WorkerIndex i = 0; i < inst_.num_workers(); ++i) {
      double rho = 0.0;
      double second = 0.0;
      for (EdgeIndex e : inst_.worker_edges(i)) {
        const Edge& edge = inst_.edge(e);
        const double flow = x[e] * lam[edge.task];
        rho += flow / edge.mu;
        second += flow / (edge.mu * edge.mu);
      }
      if (rho > cap_) return false;
      rho_[i] = rho;
      second_[i] = second;
      w_[i] = second / (1.0 - rho);
    }
    for (TaskIndex j = 0; j < inst_.num_task_types(); ++j) {
      double wbar = 0.0;
      for (EdgeIndex e : inst_.task_edges(j)) wbar += x[e] * inst_.edge(e).mu * w_[inst_.edge(e).worker];
      wbar_[j] = wbar;
    }
    return true;
  }

  double true_max() const { return *std::max_element(wbar_.begin(), wbar_.end()); }

  // Log-sum-exp at temperature tau of the last evaluated point.
  double smoothed(double tau) {
    const double top = true_max();
    double z = 0.0;
    for (TaskIndex j = 0; j < wbar_.size(); ++j) {
      weight_[j] = std::exp((wbar_[j] - top) / tau);
      z += weight_[j];
    }
    for (double& p : weight_) p /= z;
    return top + tau * std::log(z);
  }

  // Gradient of the smoothed objective; requires a preceding smoothed() call.
  void gradient(const std::vector<double>& x, std::vector<double>& g) const {
    const auto& lam = inst_.lambda();
    std::fill(g.begin(), g.end(), 0.0);
    for (WorkerIndex i = 0; i < inst_.num_workers(); ++i) {
      double coupling = 0.0;  // sum_j pi_j x_ij mu_ij
      for (EdgeIndex f : inst_.worker_edges(i)) coupling += weight_[inst_.edge(f).task] * x[f] * inst_.edge(f).mu;
      const double slack = 1.0 - rho_[i];
      for (EdgeIndex e : inst_.worker_edges(i)) {
        const Edge& edge = inst_.edge(e);
        const double dw = (lam[edge.task] / (edge.mu * edge.mu)) / slack +
                          second_[i] * (lam[edge.task] / edge.mu) / (slack * slack);
        g[e] = weight_[edge.task] * edge.mu * w_[i] + coupling * dw;
      }
    }
  }

 private:
  const Instance& inst_;
  double cap_;
  std::vector<double> rho_, second_, w_, wbar_, weight_;
};

void project_all(const Instance& inst, std::vector<double>& x, std::vector<double>& buf) {
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    const auto& es = inst.task_edges(j);
    buf.resize(es.size());
    for (std::size_t k = 0; k < es.size(); ++k) buf[k] = x[es[k]];
    project_onto_simplex(buf);
    for (std::size_t k = 0; k < es.size(); ++k) x[es[k]] = buf[k];
  }
}

struct LocalResult {
  std::vector<double> x;
  double objective;
  std::size_t iterations;
};

LocalResult descend(const Instance& inst, std::vector<double> x, const PtOptions& opt) {
  SmoothedObjective obj(inst, 1.0 - opt.stability_margin);
  if (!obj.evaluate(x)) throw std::logic_error("local search started outside the stable region");

  LocalResult best{x, obj.true_max(), 0};
  const double scale = std::max(best.objective, 1e-8);
  std::vector<double> g(x.size()), y(x.size()), buf;
  double alpha = 0.0;
  constexpr double kArmijo = 1e-4;

  for (int level = 1; level <= 8 && best.iterations < opt.max_iterations; ++level) {
    const double tau = scale * std::pow(10.0, -level);
    obj.evaluate(x);
    double f = obj.smoothed(tau);

    while (best.iterations < opt.max_iterations) {
      obj.gradient(x, g);
      const double gmax = std::accumulate(g.begin(), g.end(), 0.0,
                                          [](double a, double b) { return std::max(a, std::abs(b)); });
      if (gmax == 0.0) break;
      if (alpha == 0.0) alpha = 0.1 / gmax;

      bool accepted = false;
      double fy = 0.0;
      while (alpha * gmax > 1e-16) {
        for (std::size_t e = 0; e < x.size(); ++e) y[e] = x[e] - alpha * g[e];
        project_all(inst, y, buf);
        double decrease = 0.0;
        for (std::size_t e = 0; e < x.size(); ++e) decrease += g[e] * (y[e] - x[e]);
        if (decrease > -1e-300) break;  // projected step vanished: stationary
        if (obj.evaluate(y)) {
          fy = obj.smoothed(tau);
          if (fy <= f + kArmijo * decrease) {
            accepted = true;
            break;
          }
        }
        alpha *= 0.5;
      }
      if (!accepted) {
        obj.evaluate(x);
        obj.smoothed(tau);
        break;
      }

      ++best.iterations;
      x.swap(y);
      const double improvement = (f - fy) / std::max(std::abs(f), 1e-300);
      f = fy;
      if (obj.true_max() < best.objective) {
        best.objective = obj.true_max();
        best.x = x;
      }
      alpha *= 2.0;
      if (improvement < opt.tol) break;
    }
  }
  return best;
}

}  // namespace

SolveResult solve_pt(const Instance& inst, const PtOptions& opt) {
  if (opt.n_starts < 1) throw std::invalid_argument("n_starts must be at least 1");
  SolveResult res;
  const SolveResult warm = solve_ps(inst);
  res.iterations = warm.iterations;
  const double cap = 1.0 - opt.stability_margin;
  if (warm.status != SolveStatus::optimal || warm.objective > cap) {
    res.status = SolveStatus::infeasible;
    res.message = "no assignment keeps every workload within the stability margin";
    return res;
  }

  const auto& lam = inst.lambda();
  auto workloads = [&](const std::vector<double>& x) {
    std::vector<double> rho(inst.num_workers(), 0.0);
    for (EdgeIndex e = 0; e < inst.num_edges(); ++e) {
      rho[inst.edge(e).worker] += x[e] * lam[inst.edge(e).task] / inst.edge(e).mu;
    }
    return rho;
  };
  const std::vector<double> warm_rho = workloads(warm.x.x);

  bool have_best = false;
  for (int s = 0; s < opt.n_starts; ++s) {
    std::vector<double> start = warm.x.x;
    if (s > 0) {
      Rng rng(derive_seed(opt.seed, StreamKind::solver_start, static_cast<std::uint64_t>(s)));
      std::vector<double> random(inst.num_edges(), 0.0);
      for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
        double total = 0.0;
        for (EdgeIndex e : inst.task_edges(j)) total += random[e] = rng.exponential(1.0);
        for (EdgeIndex e : inst.task_edges(j)) random[e] /= total;
      }
      // Move along the segment toward the warm start until every workload fits.
      const std::vector<double> rho = workloads(random);
      double t = 0.0;
      for (WorkerIndex i = 0; i < inst.num_workers(); ++i) {
        if (rho[i] > cap) t = std::max(t, (rho[i] - cap) / (rho[i] - warm_rho[i]));
      }
      t = std::min(1.0, t == 0.0 ? 0.0 : t + 1e-9);
      for (EdgeIndex e = 0; e < inst.num_edges(); ++e) start[e] = (1.0 - t) * random[e] + t * warm.x[e];
      const std::vector<double> fixed = workloads(start);
      if (*std::max_element(fixed.begin(), fixed.end()) > cap) start = warm.x.x;
    }

    LocalResult local = descend(inst, std::move(start), opt);
    res.iterations += local.iterations;
    if (!have_best || local.objective < res.objective) {
      res.objective = local.objective;
      res.x.x = std::move(local.x);
      have_best = true;
    }
  }
  res.starts_used = static_cast<std::size_t>(opt.n_starts);
  res.status = SolveStatus::local;
  return res;
}

}  // namespace fairmatch
