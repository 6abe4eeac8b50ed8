#pragma once

#include <string>
#include <vector>

#include "fairmatch/model.hpp"

namespace fairmatch {

/// Objective values of both minimax programs at one policy.
///   eta_t: max over task types of the expected relative wait (may be +inf)
///   eta_s: max over workers of the workload
/// Ties in the argmax go to the lowest index.
struct ObjectiveReport {
  double eta_t = 0.0;
  double eta_s = 0.0;
  TaskIndex argmax_task = 0;
  WorkerIndex argmax_worker = 0;
};

ObjectiveReport eval_objectives(const Instance& inst, const PolicyMatrix& x);

/// Max relative wait only, without validating x.
double eta_t_unchecked(const Instance& inst, const PolicyMatrix& x);
double eta_s_unchecked(const Instance& inst, const PolicyMatrix& x);

/// Partial derivatives d wbar_j / d x_e: one row per task type, one column
/// per edge. Only meaningful where every loaded worker is stable.
std::vector<std::vector<double>> relative_wait_jacobian(const Instance& inst, const PolicyMatrix& x);

/// kappa^3 * (1 + (1 - 1/kappa) * eta_s / (1 - eta_s)): the factor by which
/// the workload-optimal policy can exceed the optimal max relative wait.
/// Throws std::domain_error outside kappa >= 1, 0 <= eta_s_star < 1.
double approx_bound(double kappa, double eta_s_star);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
};

/// Box, per-type simplex and workload <= 1 constraints, each within eps.
FeasibilityReport is_feasible(const Instance& inst, const PolicyMatrix& x, double eps);

}  // namespace fairmatch
