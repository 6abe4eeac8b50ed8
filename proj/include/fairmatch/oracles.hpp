#pragma once

#include <optional>
#include <vector>

#include "fairmatch/model.hpp"

namespace fairmatch {

/// Brute-force reference values used to check the solvers.

struct SubsetOracleResult {
  double objective = 0.0;
  std::vector<TaskIndex> witness;  // maximising subset S, ascending
};

inline constexpr std::size_t kMaxSubsetTaskTypes = 22;

/// max over nonempty S of lambda(S) / mu(N(S)), where mu(N(S)) sums the
/// per-worker rate over every worker adjacent to S. Equals the optimal max
/// workload when each worker has one rate and arrival rates are uniform.
/// Throws std::invalid_argument if those preconditions fail and
/// std::length_error beyond kMaxSubsetTaskTypes types or 64 workers.
SubsetOracleResult oracle_eta_s_subsets(const Instance& inst);

/// sum_j (deg(j) - 1): dimension of the product of per-type simplices.
int free_dimensions(const Instance& inst);

inline constexpr int kMaxGridDimensions = 4;
inline constexpr int kMaxGridResolution = 101;

struct GridOracleResult {
  double objective = 0.0;  // min of max_j wbar_j over the grid (+inf if no stable point)
  PolicyMatrix x;          // minimising grid point
  double cell = 0.0;       // lattice spacing 1 / (resolution - 1)
  double lipschitz = 0.0;  // max_j |grad wbar_j|_1 around the minimiser
  double allowance = 0.0;  // cell * lipschitz
  std::size_t points = 0;  // grid points evaluated
};

/// Exhaustive search over the lattice {k / (resolution - 1)} restricted to
/// each type's simplex. Every lattice rounding moves each coordinate by less
/// than one cell, so the true optimum lies within `allowance` below
/// `objective` whenever the Lipschitz estimate (taken at the best point and
/// its lattice neighbours) holds between the optimum and its rounding.
/// Throws std::length_error beyond kMaxGridDimensions free dimensions and
/// std::invalid_argument for a resolution outside [2, kMaxGridResolution].
GridOracleResult oracle_eta_t_grid(const Instance& inst, int resolution);

struct MidpointWitness {
  double ax, ay;
  double bx, by;
  double fa, fb, fmid;
  /// fmid - (fa + fb) / 2; positive breaks convexity, negative breaks concavity.
  double gap;
};

struct NonconvexityResult {
  std::optional<MidpointWitness> convexity_violation;
  std::optional<MidpointWitness> concavity_violation;
};

/// Max relative wait of the three-worker, two-type network where worker 2
/// serves both types: f = max(g, h) with
///   g = x/(1-p x) + (1-x)/(1-q(2-x-y)) - 1,
///   h = y/(1-p y) + (1-y)/(1-q(2-x-y)) - 1.
double two_type_toy_objective(double p, double q, double x, double y);

/// Searches the convex region {2q + p^2 xy >= (p+q)(x+y), 0 <= y <= x <= 1},
/// where f coincides with h, for midpoint pairs that break convexity and
/// concavity. Returns the pair with the largest violation of each kind whose
/// gap exceeds min_gap in magnitude. Requires p in [0,1], q in [0,1/2].
NonconvexityResult nonconvexity_witness(double p, double q, int samples_per_axis = 41,
                                        double min_gap = 1e-12);

}  // namespace fairmatch
