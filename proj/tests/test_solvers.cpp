#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fairmatch/oracles.hpp"
#include "fairmatch/programs.hpp"
#include "fairmatch/solvers.hpp"
#include "support/random_instances.hpp"

using namespace fairmatch;
using fairmatch::testing::example1;

TEST_CASE("solve_ps on Example 1") {
  const SolveResult res = solve_ps(example1());
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(std::abs(res.objective - 0.4) < 1e-12);
  const std::vector<double> expected{1.0, 0.0, 1.0, 1.0, 1.0, 1.0};
  for (std::size_t e = 0; e < expected.size(); ++e) CHECK(std::abs(res.x[e] - expected[e]) < 1e-12);
}

TEST_CASE("solve_ps splits evenly between identical workers") {
  const Instance inst({"a", "b"}, {"t"}, {0.5}, {{0, 0, 1.0}, {1, 0, 1.0}});
  const SolveResult res = solve_ps(inst);
  REQUIRE(res.status == SolveStatus::optimal);
  CHECK(res.objective == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(res.x[0] == doctest::Approx(0.5));
}

TEST_CASE("solve_ps reports overload as infeasible") {
  const SolveResult res = solve_ps(fairmatch::testing::single_queue(2.0, 1.0));
  CHECK(res.status == SolveStatus::infeasible);
  CHECK(res.x.size() == 0);
}

TEST_CASE("solve_ps rejects an invalid instance") {
  const Instance inst({"a"}, {"t", "u"}, {0.1, 0.1}, {{0, 0, 1.0}});
  CHECK_THROWS_AS(solve_ps(inst), std::invalid_argument);
}

TEST_CASE("solve_ps returns a feasible policy on random instances") {
  Rng rng(5);
  fairmatch::testing::Shape shape;
  shape.max_kappa = 4.0;
  for (int trial = 0; trial < 40; ++trial) {
    const Instance g = fairmatch::testing::random_graph(rng, shape);
    const Instance inst = fairmatch::testing::scale_lambda(g, 0.1);
    const SolveResult res = solve_ps(inst);
    if (res.status == SolveStatus::infeasible) continue;
    CHECK(is_feasible(inst, res.x, 1e-9).feasible);
    CHECK(res.objective == doctest::Approx(eval_objectives(inst, res.x).eta_s));
    // No uniform split beats the optimum.
    const double uniform = eval_objectives(inst, uniform_policy(inst)).eta_s;
    CHECK(res.objective <= uniform + 1e-9);
  }
}

namespace {

// Projection oracle: the KKT conditions of min |x - v|^2 on the simplex say
// x_k = max(v_k - tau, 0) for the unique tau making the sum 1.
std::vector<double> bisect_projection(const std::vector<double>& v) {
  double lo = *std::min_element(v.begin(), v.end()) - 1.0;
  double hi = *std::max_element(v.begin(), v.end());
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    double s = 0.0;
    for (double a : v) s += std::max(a - mid, 0.0);
    (s > 1.0 ? lo : hi) = mid;
  }
  std::vector<double> x;
  for (double a : v) x.push_back(std::max(a - 0.5 * (lo + hi), 0.0));
  return x;
}

}  // namespace

TEST_CASE("project_onto_simplex agrees with the bisection oracle") {
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> v(1 + trial % 7);
    for (double& a : v) a = rng.uniform(-2.0, 2.0);
    const auto expected = bisect_projection(v);
    project_onto_simplex(v);
    CHECK(std::accumulate(v.begin(), v.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 0; k < v.size(); ++k) {
      CHECK(v[k] >= 0.0);
      CHECK(v[k] == doctest::Approx(expected[k]).epsilon(1e-9).scale(1.0));
    }
  }
}

TEST_CASE("solve_pt on Example 1 keeps the workload optimum") {
  const SolveResult res = solve_pt(example1());
  REQUIRE(res.status == SolveStatus::local);
  CHECK(std::abs(res.objective - (1.0 / 0.6 - 1.0)) < 1e-9);
  CHECK(std::abs(res.x[0] - 1.0) < 1e-6);
}

TEST_CASE("solve_pt reaches 1/(1 - eta_s) - 1 on kappa = 1 instances") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Instance inst = fairmatch::testing::random_kappa1_instance(seed);
    const SolveResult ps = solve_ps(inst);
    PtOptions opt;
    opt.n_starts = 4;
    const SolveResult pt = solve_pt(inst, opt);
    CHECK(pt.objective == doctest::Approx(1.0 / (1.0 - ps.objective) - 1.0).epsilon(1e-6));
  }
}

TEST_CASE("solve_pt on a tiny kappa = 2 instance matches the grid oracle") {
  // Two workers, two types, three edges; worker b serves both at rates 2 and 1.
  const Instance inst({"a", "b"}, {"s", "t"}, {0.3, 0.2}, {{0, 0, 1.0}, {1, 0, 2.0}, {1, 1, 1.0}});
  const SolveResult pt = solve_pt(inst);
  const GridOracleResult grid = oracle_eta_t_grid(inst, 101);
  CHECK(pt.objective <= grid.objective + 1e-9);
  CHECK(pt.objective >= grid.objective - grid.allowance);
}

TEST_CASE("solve_pt is reproducible and never worse than its warm start") {
  Rng rng(9);
  fairmatch::testing::Shape shape;
  shape.max_workers = 4;
  shape.max_types = 4;
  shape.max_kappa = 3.0;
  for (int trial = 0; trial < 10; ++trial) {
    const Instance g = fairmatch::testing::random_graph(rng, shape);
    const SolveResult unit = solve_ps(g);
    if (unit.status == SolveStatus::infeasible) continue;
    const Instance inst = fairmatch::testing::scale_lambda(g, 0.7 / unit.objective);
    const SolveResult ps = solve_ps(inst);
    PtOptions opt;
    opt.n_starts = 5;
    opt.seed = 42;
    const SolveResult a = solve_pt(inst, opt);
    const SolveResult b = solve_pt(inst, opt);
    CHECK(a.objective == b.objective);
    CHECK(a.x.x == b.x.x);
    CHECK(a.objective <= eval_objectives(inst, ps.x).eta_t + 1e-12);
    CHECK(is_feasible(inst, a.x, 1e-9).feasible);
    CHECK(a.starts_used == 5);
  }
}

TEST_CASE("solve_pt reports infeasibility") {
  CHECK(solve_pt(fairmatch::testing::single_queue(2.0, 1.0)).status == SolveStatus::infeasible);
}

TEST_CASE("solve_pt is split invariant on kappa = 1 instances") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const Instance inst = fairmatch::testing::random_kappa1_instance(seed);
    PtOptions opt;
    opt.n_starts = 3;
    const double base = solve_pt(inst, opt).objective;
    for (int k : {2, 3}) {
      const Instance split = split_task_type(inst, 0, k);
      CHECK(solve_pt(split, opt).objective == doctest::Approx(base).epsilon(1e-6));
    }
  }
}
