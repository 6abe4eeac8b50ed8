#include "fairmatch/programs.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairmatch {

namespace {

ObjectiveReport summarize(const DerivedRates& r) {
  ObjectiveReport rep;
  for (TaskIndex j = 0; j < r.wbar_j.size(); ++j) {
    if (j == 0 || r.wbar_j[j] > rep.eta_t) {
      rep.eta_t = r.wbar_j[j];
      rep.argmax_task = j;
    }
  }
  for (WorkerIndex i = 0; i < r.rho_i.size(); ++i) {
    if (i == 0 || r.rho_i[i] > rep.eta_s) {
      rep.eta_s = r.rho_i[i];
      rep.argmax_worker = i;
    }
  }
  return rep;
}

}  // namespace

ObjectiveReport eval_objectives(const Instance& inst, const PolicyMatrix& x) {
  return summarize(derived_rates(inst, x));
}

double eta_t_unchecked(const Instance& inst, const PolicyMatrix& x) {
  return summarize(derived_rates_unchecked(inst, x)).eta_t;
}

double eta_s_unchecked(const Instance& inst, const PolicyMatrix& x) {
  double best = 0.0;
  const auto& lam = inst.lambda();
  for (WorkerIndex i = 0; i < inst.num_workers(); ++i) {
    double rho = 0.0;
    for (EdgeIndex e : inst.worker_edges(i)) rho += x[e] * lam[inst.edge(e).task] / inst.edge(e).mu;
    best = std::max(best, rho);
  }
  return best;
}

std::vector<std::vector<double>> relative_wait_jacobian(const Instance& inst,
                                                       const PolicyMatrix& x) {
  const DerivedRates r = derived_rates_unchecked(inst, x);
  const auto& lam = inst.lambda();
  std::vector<std::vector<double>> jac(inst.num_task_types(),
                                       std::vector<double>(inst.num_edges(), 0.0));
  for (WorkerIndex i = 0; i < inst.num_workers(); ++i) {
    double second = 0.0;
    for (EdgeIndex e : inst.worker_edges(i)) {
      const Edge& edge = inst.edge(e);
      second += x[e] * lam[edge.task] / (edge.mu * edge.mu);
    }
    const double slack = 1.0 - r.rho_i[i];
    for (EdgeIndex e : inst.worker_edges(i)) {
      const Edge& edge = inst.edge(e);
      // d w_i / d x_e for e = (i, l)
      const double dw = (lam[edge.task] / (edge.mu * edge.mu)) / slack +
                        second * (lam[edge.task] / edge.mu) / (slack * slack);
      jac[edge.task][e] += edge.mu * r.w_i[i];
      for (EdgeIndex f : inst.worker_edges(i)) {
        const Edge& other = inst.edge(f);
        jac[other.task][e] += x[f] * other.mu * dw;
      }
    }
  }
  return jac;
}

double approx_bound(double kappa, double eta_s_star) {
  if (!(kappa >= 1.0)) throw std::domain_error("kappa must be >= 1");
  if (!(eta_s_star >= 0.0 && eta_s_star < 1.0)) {
    throw std::domain_error("bound is undefined unless 0 <= eta_s* < 1");
  }
  const double k3 = kappa * kappa * kappa;
  return k3 * (1.0 + (1.0 - 1.0 / kappa) * eta_s_star / (1.0 - eta_s_star));
}

FeasibilityReport is_feasible(const Instance& inst, const PolicyMatrix& x, double eps) {
  FeasibilityReport rep;
  auto fail = [&rep](std::string msg) {
    rep.feasible = false;
    rep.violations.push_back(std::move(msg));
  };
  if (x.size() != inst.num_edges()) {
    fail("policy has " + std::to_string(x.size()) + " entries for " +
         std::to_string(inst.num_edges()) + " edges");
    return rep;
  }
  for (EdgeIndex e = 0; e < x.size(); ++e) {
    if (!(x[e] >= -eps && x[e] <= 1.0 + eps)) {
      std::ostringstream msg;
      msg << "edge " << inst.workers()[inst.edge(e).worker] << "|"
          << inst.task_types()[inst.edge(e).task] << ": x = " << x[e] << " outside [0,1]";
      fail(msg.str());
    }
  }
  for (TaskIndex j = 0; j < inst.num_task_types(); ++j) {
    double sum = 0.0;
    for (EdgeIndex e : inst.task_edges(j)) sum += x[e];
    if (std::abs(sum - 1.0) > eps) {
      std::ostringstream msg;
      msg << "task " << inst.task_types()[j] << ": assignment fractions sum to " << sum;
      fail(msg.str());
    }
  }
  const auto& lam = inst.lambda();
  for (WorkerIndex i = 0; i < inst.num_workers(); ++i) {
    double rho = 0.0;
    for (EdgeIndex e : inst.worker_edges(i)) rho += x[e] * lam[inst.edge(e).task] / inst.edge(e).mu;
    if (rho > 1.0 + eps) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "worker " << inst.workers()[i] << ": workload " << rho << " exceeds 1";
      fail(msg.str());
    }
  }
  return rep;
}

}  // namespace fairmatch
