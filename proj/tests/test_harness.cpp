#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "fairmatch/generator.hpp"
#include "fairmatch/harness.hpp"
#include "fairmatch/instance_io.hpp"
#include "fairmatch/results.hpp"
#include "fairmatch/solvers.hpp"
#include "support/random_instances.hpp"

using namespace fairmatch;

TEST_CASE("worker_task_means follows the kappa formula") {
  Rng rng(1);
  const auto two = worker_task_means(2.0, 6.0, 2, rng);
  CHECK(two[0] == doctest::Approx(8.0));
  CHECK(two[1] == doctest::Approx(4.0));
  const auto four = worker_task_means(3.0, 5.0, 4, rng);
  for (double m : four) {
    CHECK(m >= four.back());
    CHECK(m <= four.front());
  }
  CHECK(worker_task_means(4.0, 5.0, 1, rng) == std::vector<double>{5.0});
  const auto flat = worker_task_means(1.0, 5.0, 3, rng);
  for (double m : flat) CHECK(m == doctest::Approx(5.0));
}

TEST_CASE("generated instances") {
  GeneratorSpec spec;
  spec.kappa = 1.0;
  const Instance flat = generate_instance(spec, 3);
  CHECK(validate_instance(flat).empty());
  CHECK(kappa(flat) == doctest::Approx(1.0));

  spec.kappa = 2.0;
  const Instance skew = generate_instance(spec, 3);
  CHECK(kappa(skew) == doctest::Approx(2.0));
  CHECK(skew.num_edges() == flat.num_edges());

  spec.daily_arrivals = 120000;
  const Instance loaded = generate_instance(spec, 3);
  for (double l : loaded.lambda()) CHECK(l == doctest::Approx(30000.0 / 86400.0));

  spec.daily_arrivals = 80000;
  spec.balance = {0.7, 0.1, 0.1, 0.1};
  const Instance skewed_load = generate_instance(spec, 3);
  CHECK(skewed_load.lambda()[0] == doctest::Approx(0.7 * 80000 / 86400.0));
}

TEST_CASE("median rules admit the expected side of each type") {
  GeneratorSpec spec;
  spec.n_workers = 8;
  spec.edge_rule = EdgeRule::median_at_most;
  const Instance fast = generate_instance(spec, 4);
  for (TaskIndex j = 0; j < fast.num_task_types(); ++j) CHECK(fast.task_edges(j).size() >= 4);
  spec.edge_rule = EdgeRule::density;
  spec.density = 1.0;
  const Instance full = generate_instance(spec, 4);
  CHECK(full.num_edges() == 8 * 4);
}

TEST_CASE("generator errors") {
  GeneratorSpec spec;
  spec.kappa = 0.5;
  CHECK_THROWS_AS(generate_instance(spec, 1), std::invalid_argument);
  spec.kappa = 1.0;
  spec.balance = {0.5, 0.5};
  CHECK_THROWS_AS(generate_instance(spec, 1), std::invalid_argument);
  spec.balance.clear();
  spec.daily_arrivals = 1e7;
  CHECK_THROWS_AS(generate_instance(spec, 1), std::runtime_error);
}

TEST_CASE("Student-t confidence interval") {
  // t_{0.975, 9} = 2.262157...
  std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  const MeanCi ci = mean_ci95(s);
  CHECK(ci.mean == 5.5);
  REQUIRE(ci.half_width);
  CHECK(*ci.half_width == doctest::Approx(2.2621571627 * std::sqrt(55.0 / 6.0) / std::sqrt(10.0)).epsilon(1e-9));
  const MeanCi one = mean_ci95({4.0});
  CHECK(one.mean == 4.0);
  CHECK_FALSE(one.half_width);
}

TEST_CASE("results CSV round trip") {
  ResultTable t;
  t.rows.push_back({"kappa", "2", "gtw", "1", 0.1, 1.0 / 3.0, 0.7, 4.0, 0.45, std::nullopt});
  t.rows.push_back({"balance", "0.7;0.1;0.1;0.1", "gwu", kAggregateCi95, std::nullopt, 1e-300, 12345.678,
                    0.0, 0.1 + 0.2, 1.0 / 7.0});
  t.rows.push_back({"none", "", "a,b \"q\"", kInfeasible, {}, {}, {}, {}, {}, {}});
  const std::string csv = results_to_csv(t);
  CHECK(csv.rfind(kResultsHeader, 0) == 0);
  CHECK(parse_results_csv(csv) == t);
  CHECK_THROWS_AS(parse_results_csv("bad header\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_results_csv(std::string(kResultsHeader) + "\na,b\n"), std::invalid_argument);
}

namespace {

ExperimentConfig small_config() {
  ExperimentConfig cfg;
  GeneratorSpec g;
  g.n_workers = 5;
  g.n_task_types = 3;
  g.daily_arrivals = 40000;
  cfg.generator = g;
  cfg.policies = all_policy_names();
  cfg.horizon = 2000;
  cfg.replications = 3;
  cfg.seed = 11;
  cfg.pt_starts = 3;
  return cfg;
}

}  // namespace

TEST_CASE("kappa sweep layout") {
  ExperimentConfig cfg = small_config();
  cfg.sweep_axis = SweepAxis::kappa;
  cfg.sweep_values = {1, 2, 3, 4, 5};
  const ResultTable t = run_experiment(cfg);
  CHECK(t.rows.size() == 5 * 6 * (3 + 2));
  std::size_t aggregates = 0;
  std::set<std::string> values;
  for (const ResultRow& r : t.rows) {
    CHECK(r.sweep_axis == "kappa");
    values.insert(r.sweep_value);
    CHECK(r.opt_ps);
    CHECK(r.opt_pt_local);
    if (r.replication == kAggregateMean) ++aggregates;
  }
  CHECK(aggregates == 30);
  CHECK(values == std::set<std::string>{"1", "2", "3", "4", "5"});
}

TEST_CASE("OPT(PS) column equals the solver objective") {
  ExperimentConfig cfg = small_config();
  cfg.policies = {"lp-random-ps"};
  const ResultTable t = run_experiment(cfg);
  const Instance inst = generate_instance(*cfg.generator, cfg.seed);
  CHECK(t.rows.front().opt_ps == solve_ps(inst).objective);
}

TEST_CASE("experiments are deterministic and thread-count independent") {
  ExperimentConfig cfg = small_config();
  cfg.sweep_axis = SweepAxis::balance;
  cfg.sweep_balances = {{1.0 / 3, 1.0 / 3, 1.0 / 3}, {0.8, 0.1, 0.1}};
  setenv("FAIRMATCH_THREADS", "1", 1);
  const std::string a = results_to_csv(run_experiment(cfg));
  setenv("FAIRMATCH_THREADS", "3", 1);
  const std::string b = results_to_csv(run_experiment(cfg));
  unsetenv("FAIRMATCH_THREADS");
  CHECK(a == b);
}

TEST_CASE("a single replication leaves the half-width empty") {
  ExperimentConfig cfg = small_config();
  cfg.replications = 1;
  cfg.policies = {"gtw"};
  const ResultTable t = run_experiment(cfg);
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[1].max_workload == t.rows[0].max_workload);
  CHECK(t.rows[2].replication == kAggregateCi95);
  CHECK_FALSE(t.rows[2].max_workload);
}

TEST_CASE("infeasible sweep points are marked and the run continues") {
  ExperimentConfig cfg = small_config();
  cfg.policies = {"gtw", "lp-random-ps"};
  cfg.replications = 2;
  cfg.sweep_axis = SweepAxis::daily_load;
  cfg.sweep_values = {20000, 1e7};
  const ResultTable t = run_experiment(cfg);
  std::size_t infeasible = 0;
  for (const ResultRow& r : t.rows) {
    if (r.replication == kInfeasible) {
      ++infeasible;
      CHECK(r.sweep_value == "1e+07");
      CHECK_FALSE(r.opt_ps);
    }
  }
  CHECK(infeasible == 2);
  CHECK(t.rows.size() == 2 * 4 + 2);
}

TEST_CASE("instance-file sweeps rescale arrival rates") {
  const auto dir = std::filesystem::temp_directory_path() / "fairmatch_harness_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream(dir / "ex1.json") << instance_to_json(fairmatch::testing::example1());
    std::ofstream(dir / "cfg.json") << R"({"instance": "ex1.json", "policies": ["lp-random-ps"],
      "horizon": 1000, "replications": 2, "seed": 3,
      "sweep": {"axis": "daily_load", "values": [8640, 43200]}})";
  }
  const ExperimentConfig cfg = load_experiment_config(dir / "cfg.json");
  const auto points = build_sweep_points(cfg);
  REQUIRE(points.size() == 2);
  for (double l : points[0].instance->lambda()) CHECK(l == doctest::Approx(0.02));
  const ResultTable t = run_experiment(cfg);
  CHECK(*t.rows.front().opt_ps == doctest::Approx(0.08));
  std::filesystem::remove_all(dir);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS(parse_experiment_config("{"), std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"generator": {}, "policies": ["gtw"], "horizon": 10,
                                              "replications": 0})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"generator": {}, "policies": ["gtw"], "horizon": 10,
                                              "sweep": {"axis": "balance", "values": [[0.5, 0.6]]}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"generator": {}, "policies": ["gtw"], "horizon": 10,
                                              "sweep": {"axis": "kappa", "values": []}})"),
                  std::invalid_argument);
  CHECK_THROWS_AS(parse_experiment_config(R"({"instance": "x.json", "policies": ["gtw"], "horizon": 10,
                                              "sweep": {"axis": "kappa", "values": [2]}})"),
                  std::invalid_argument);
  const ExperimentConfig ok = parse_experiment_config(
      R"({"generator": {"kappa": 2, "edge_rule": "density", "density": 0.7}, "policies": ["gtw", "gwu"],
          "horizon": 100, "warmup": 10, "replications": 4, "seed": 5, "output": "o.csv",
          "sweep": {"axis": "balance", "values": [[0.25, 0.25, 0.25, 0.25]]}})");
  CHECK(ok.generator->kappa == 2.0);
  CHECK(ok.generator->edge_rule == EdgeRule::density);
  CHECK(ok.replications == 4);
  CHECK(ok.sweep_axis == SweepAxis::balance);
  CHECK(ok.sweep_balances.size() == 1);
}

TEST_CASE("worker_threads honours the environment") {
  setenv("FAIRMATCH_THREADS", "2", 1);
  CHECK(worker_threads() == 2);
  setenv("FAIRMATCH_THREADS", "zero", 1);
  CHECK(worker_threads() >= 1);
  unsetenv("FAIRMATCH_THREADS");
}
