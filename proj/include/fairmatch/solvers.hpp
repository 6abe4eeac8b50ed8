#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include "fairmatch/model.hpp"

namespace fairmatch {

enum class SolveStatus {
  optimal,     // certified global optimum
  local,       // best point found by local search
  infeasible,  // no stable assignment exists
};

std::string_view to_string(SolveStatus s);

struct SolveResult {
  PolicyMatrix x;  // empty when infeasible
  double objective = 0.0;
  SolveStatus status = SolveStatus::infeasible;
  std::size_t iterations = 0;
  std::size_t starts_used = 0;  // multistart only
  std::string message;
};

/// Minimises the maximum worker workload as a linear program in
/// (x, rho):  min rho  s.t.  rho_i <= rho,  sum_i x_ij = 1,  0 <= x <= 1,
/// rho <= 1. The reported objective is max_i rho_i recomputed from x.
SolveResult solve_ps(const Instance& inst);

struct PtOptions {
  /// Total starts including the warm start from solve_ps.
  int n_starts = 17;
  /// Stop when the relative decrease of the smoothed objective falls below tol.
  double tol = 1e-9;
  std::uint64_t seed = 0;
  /// Workloads are kept at or below 1 - stability_margin.
  double stability_margin = 1e-6;
  /// Iteration cap per start.
  std::size_t max_iterations = 10000;
};

/// Multistart local search for the min-max relative waiting time program.
///
/// Each start runs projected gradient descent on a log-sum-exp smoothing of
/// max_j wbar_j with a decreasing temperature; iterates are projected onto
/// the product of per-type simplices (sort-based projection) and step sizes
/// come from Armijo backtracking. Points that push a worker past the
/// stability margin evaluate to +inf and are rejected by the line search.
/// Start 0 is the solve_ps optimum; the others are uniform points of the
/// simplex product, pulled toward the warm start just far enough to be
/// stable. The true (unsmoothed) objective of every accepted iterate is
/// tracked, so the result is never worse than the warm start. Status is
/// always `local` unless the region is empty.
SolveResult solve_pt(const Instance& inst, const PtOptions& options = {});

/// Euclidean projection of v onto {x >= 0, sum x = 1}; sort-based.
void project_onto_simplex(std::span<double> v);

}  // namespace fairmatch
