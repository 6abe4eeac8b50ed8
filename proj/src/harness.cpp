#include "fairmatch/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "fairmatch/instance_io.hpp"
#include "fairmatch/policies.hpp"
#include "fairmatch/programs.hpp"
#include "fairmatch/rng.hpp"
#include "fairmatch/solvers.hpp"
#include "json.hpp"

namespace fairmatch {

using json = nlohmann::json;

std::string to_string(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::none: return "none";
    case SweepAxis::kappa: return "kappa";
    case SweepAxis::daily_load: return "daily_load";
    case SweepAxis::balance: return "balance";
  }
  return "none";
}

namespace {

SweepAxis parse_axis(const std::string& s) {
  if (s == "none") return SweepAxis::none;
  if (s == "kappa") return SweepAxis::kappa;
  if (s == "daily_load") return SweepAxis::daily_load;
  if (s == "balance") return SweepAxis::balance;
  throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

EdgeRule parse_edge_rule(const std::string& s) {
  if (s == "median_at_most") return EdgeRule::median_at_most;
  if (s == "median_at_least") return EdgeRule::median_at_least;
  if (s == "density") return EdgeRule::density;
  throw std::invalid_argument("unknown edge rule '" + s + "'");
}

bool is_probability_vector(const std::vector<double>& v) {
  double sum = 0.0;
  for (double p : v) {
    if (!(p >= 0.0)) return false;
    sum += p;
  }
  return !v.empty() && std::abs(sum - 1.0) <= 1e-9;
}

GeneratorSpec parse_generator(const json& j) {
  GeneratorSpec g;
  g.n_workers = j.value("n_workers", g.n_workers);
  g.n_task_types = j.value("n_task_types", g.n_task_types);
  g.kappa = j.value("kappa", g.kappa);
  g.mean_lo = j.value("mean_lo", g.mean_lo);
  g.mean_hi = j.value("mean_hi", g.mean_hi);
  if (j.contains("edge_rule")) g.edge_rule = parse_edge_rule(j.at("edge_rule").get<std::string>());
  g.density = j.value("density", g.density);
  g.daily_arrivals = j.value("daily_arrivals", g.daily_arrivals);
  if (j.contains("balance")) g.balance = j.at("balance").get<std::vector<double>>();
  return g;
}

std::string join_balance(const std::vector<double>& b) {
  std::string s;
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (k) s += ';';
    s += format_number(b[k]);
  }
  return s;
}

Instance with_lambda(const Instance& inst, std::vector<double> lambda) {
  return Instance(inst.workers(), inst.task_types(), std::move(lambda), inst.edges());
}

}  // namespace

std::vector<std::string> validate_experiment_config(const ExperimentConfig& cfg) {
  std::vector<std::string> problems;
  if (cfg.instance.has_value() == cfg.generator.has_value()) {
    problems.emplace_back("give exactly one of 'instance' and 'generator'");
  }
  if (cfg.generator) {
    for (auto& p : validate_generator_spec(*cfg.generator)) problems.push_back("generator: " + p);
  }
  if (cfg.policies.empty()) problems.emplace_back("policies must be nonempty");
  for (const auto& p : cfg.policies) {
    try {
      parse_policy_name(p);
    } catch (const std::invalid_argument& e) {
      problems.emplace_back(e.what());
    }
  }
  if (!(cfg.horizon > 0.0)) problems.emplace_back("horizon must be positive");
  if (!(cfg.warmup >= 0.0) || !(cfg.warmup < cfg.horizon)) problems.emplace_back("need 0 <= warmup < horizon");
  if (cfg.replications < 1) problems.emplace_back("replications must be at least 1");
  if (cfg.pt_starts < 1) problems.emplace_back("pt_starts must be at least 1");
  switch (cfg.sweep_axis) {
    case SweepAxis::none: break;
    case SweepAxis::kappa:
      if (!cfg.generator) problems.emplace_back("a kappa sweep needs a generator");
      [[fallthrough]];
    case SweepAxis::daily_load:
      if (cfg.sweep_values.empty()) problems.emplace_back("sweep values must be nonempty");
      for (double v : cfg.sweep_values) {
        if (!(v > 0.0) || !std::isfinite(v)) problems.emplace_back("sweep values must be positive");
      }
      break;
    case SweepAxis::balance:
      if (cfg.sweep_balances.empty()) problems.emplace_back("sweep values must be nonempty");
      for (const auto& b : cfg.sweep_balances) {
        if (!is_probability_vector(b)) problems.emplace_back("balance vectors must sum to 1");
      }
      break;
  }
  return problems;
}

ExperimentConfig parse_experiment_config(const std::string& text, const std::filesystem::path& base_dir) {
  ExperimentConfig cfg;
  try {
    const json j = json::parse(text);
    if (j.contains("instance")) {
      std::filesystem::path p = j.at("instance").get<std::string>();
      cfg.instance = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    }
    if (j.contains("generator")) cfg.generator = parse_generator(j.at("generator"));
    cfg.policies = j.at("policies").get<std::vector<std::string>>();
    cfg.horizon = j.at("horizon").get<double>();
    cfg.warmup = j.value("warmup", 0.0);
    cfg.replications = j.value("replications", cfg.replications);
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.output = j.value("output", std::string());
    cfg.pt_starts = j.value("pt_starts", cfg.pt_starts);
    if (j.contains("arrival_mode")) {
      const auto mode = j.at("arrival_mode").get<std::string>();
      if (mode == "per_type") {
        cfg.arrival_mode = ArrivalMode::per_type;
      } else if (mode == "merged") {
        cfg.arrival_mode = ArrivalMode::merged;
      } else {
        throw std::invalid_argument("unknown arrival mode '" + mode + "'");
      }
    }
    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      cfg.sweep_axis = parse_axis(s.at("axis").get<std::string>());
      if (cfg.sweep_axis == SweepAxis::balance) {
        cfg.sweep_balances = s.at("values").get<std::vector<std::vector<double>>>();
      } else if (cfg.sweep_axis != SweepAxis::none) {
        cfg.sweep_values = s.at("values").get<std::vector<double>>();
      }
    }
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config: ") + e.what());
  }
  if (auto problems = validate_experiment_config(cfg); !problems.empty()) {
    throw std::invalid_argument("config: " + problems.front());
  }
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str(), path.parent_path());
}

std::vector<SweepPoint> build_sweep_points(const ExperimentConfig& cfg) {
  std::optional<Instance> base;
  if (cfg.instance) base = load_instance(*cfg.instance);

  auto make = [&](std::string label, auto&& adjust_spec, auto&& adjust_instance) {
    SweepPoint pt{std::move(label), std::nullopt, {}};
    try {
      if (cfg.generator) {
        GeneratorSpec spec = *cfg.generator;
        adjust_spec(spec);
        pt.instance = generate_instance(spec, cfg.seed);
      } else {
        pt.instance = adjust_instance(*base);
      }
    } catch (const std::runtime_error& e) {
      pt.error = e.what();
    }
    return pt;
  };

  std::vector<SweepPoint> points;
  switch (cfg.sweep_axis) {
    case SweepAxis::none:
      points.push_back(make("", [](GeneratorSpec&) {}, [](const Instance& i) { return i; }));
      break;
    case SweepAxis::kappa:
      for (double v : cfg.sweep_values) {
        points.push_back(make(format_number(v), [v](GeneratorSpec& s) { s.kappa = v; },
                              [](const Instance& i) { return i; }));
      }
      break;
    case SweepAxis::daily_load:
      for (double v : cfg.sweep_values) {
        points.push_back(make(
            format_number(v), [v](GeneratorSpec& s) { s.daily_arrivals = v; },
            [v](const Instance& i) {
              double total = 0.0;
              for (double l : i.lambda()) total += l;
              std::vector<double> lambda(i.lambda());
              for (double& l : lambda) l = v * (l / total) / kSecondsPerDay;
              return with_lambda(i, std::move(lambda));
            }));
      }
      break;
    case SweepAxis::balance:
      for (const auto& b : cfg.sweep_balances) {
        points.push_back(make(
            join_balance(b), [&b](GeneratorSpec& s) { s.balance = b; },
            [&b](const Instance& i) {
              if (b.size() != i.num_task_types()) {
                throw std::invalid_argument("balance vector length differs from the task type count");
              }
              double total = 0.0;
              for (double l : i.lambda()) total += l;
              std::vector<double> lambda(b.size());
              for (std::size_t k = 0; k < b.size(); ++k) lambda[k] = total * b[k];
              return with_lambda(i, std::move(lambda));
            }));
      }
      break;
  }
  return points;
}

MeanCi mean_ci95(const std::vector<double>& samples) {
  if (samples.empty()) throw std::invalid_argument("mean of no samples");
  const auto n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v;
  MeanCi res{sum / n, std::nullopt};
  if (samples.size() < 2) return res;
  double ss = 0.0;
  for (double v : samples) ss += (v - res.mean) * (v - res.mean);
  const double sd = std::sqrt(ss / (n - 1.0));
  const boost::math::students_t dist(n - 1.0);
  const double t = boost::math::quantile(boost::math::complement(dist, 0.025));
  res.half_width = t * sd / std::sqrt(n);
  return res;
}

std::uint64_t replication_seed(std::uint64_t root, std::size_t point, std::size_t replication) {
  return hash_seeds({root, static_cast<std::uint64_t>(point), static_cast<std::uint64_t>(replication)});
}

std::size_t worker_threads() {
  if (const char* env = std::getenv("FAIRMATCH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

namespace {

struct PointPrograms {
  bool feasible = false;
  SolveResult ps;
  SolveResult pt;
};

struct Job {
  std::size_t point;
  std::size_t policy;
  std::size_t replication;
};

// Runs fn(k) for k in [0, count) on up to `threads` threads; rethrows the
// first failure by index.
template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < count; k = next++) {
      try {
        fn(k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  threads = std::max<std::size_t>(1, std::min(threads, count));
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

ResultTable run_experiment(const ExperimentConfig& cfg) {
  if (auto problems = validate_experiment_config(cfg); !problems.empty()) {
    throw std::invalid_argument("config: " + problems.front());
  }
  const auto points = build_sweep_points(cfg);
  std::vector<PolicyName> policies;
  for (const auto& p : cfg.policies) policies.push_back(parse_policy_name(p));

  std::vector<PointPrograms> programs(points.size());
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (!points[p].instance) continue;
    const Instance& inst = *points[p].instance;
    programs[p].ps = solve_ps(inst);
    if (programs[p].ps.status == SolveStatus::infeasible) continue;
    PtOptions opt;
    opt.n_starts = cfg.pt_starts;
    opt.seed = hash_seeds({cfg.seed, static_cast<std::uint64_t>(p)});
    programs[p].pt = solve_pt(inst, opt);
    programs[p].feasible = programs[p].pt.status != SolveStatus::infeasible;
  }

  std::vector<Job> jobs;
  for (std::size_t p = 0; p < points.size(); ++p) {
    if (!programs[p].feasible) continue;
    for (std::size_t k = 0; k < policies.size(); ++k) {
      for (std::size_t r = 0; r < static_cast<std::size_t>(cfg.replications); ++r) jobs.push_back({p, k, r});
    }
  }
  std::vector<SimMetrics> metrics(jobs.size());
  parallel_for(jobs.size(), worker_threads(), [&](std::size_t idx) {
    const Job& job = jobs[idx];
    const Instance& inst = *points[job.point].instance;
    const PolicyName pol = policies[job.policy];
    PolicyMatrix x;
    if (pol.program == ProgramChoice::ps) x = programs[job.point].ps.x;
    if (pol.program == ProgramChoice::pt) x = programs[job.point].pt.x;
    const Dispatcher dispatcher(inst, pol.kind, std::move(x));
    SimConfig sc;
    sc.horizon = cfg.horizon;
    sc.warmup = cfg.warmup;
    sc.seed = replication_seed(cfg.seed, job.point, job.replication);
    sc.arrival_mode = cfg.arrival_mode;
    metrics[idx] = run_simulation(inst, dispatcher, sc).metrics;
  });

  ResultTable table;
  const std::string axis = to_string(cfg.sweep_axis);
  std::size_t idx = 0;
  for (std::size_t p = 0; p < points.size(); ++p) {
    const PointPrograms& prog = programs[p];
    for (std::size_t k = 0; k < policies.size(); ++k) {
      ResultRow base{axis, points[p].label, cfg.policies[k], {}, {}, {}, {}, {}, {}, {}};
      if (!prog.feasible) {
        base.replication = kInfeasible;
        table.rows.push_back(base);
        continue;
      }
      base.opt_ps = prog.ps.objective;
      base.opt_pt_local = prog.pt.objective;
      std::vector<double> abs_w, rel_w, load, cens;
      for (int r = 0; r < cfg.replications; ++r, ++idx) {
        const SimMetrics& m = metrics[idx];
        ResultRow row = base;
        row.replication = std::to_string(r + 1);
        row.max_mean_abs_wait = m.max_mean_abs_wait;
        row.max_mean_rel_wait = m.max_mean_rel_wait;
        row.max_workload = m.max_workload;
        row.censored = static_cast<double>(m.censored);
        table.rows.push_back(row);
        abs_w.push_back(m.max_mean_abs_wait);
        rel_w.push_back(m.max_mean_rel_wait);
        load.push_back(m.max_workload);
        cens.push_back(static_cast<double>(m.censored));
      }
      const MeanCi a = mean_ci95(abs_w), b = mean_ci95(rel_w), c = mean_ci95(load), d = mean_ci95(cens);
      ResultRow mean_row = base;
      mean_row.replication = kAggregateMean;
      mean_row.max_mean_abs_wait = a.mean;
      mean_row.max_mean_rel_wait = b.mean;
      mean_row.max_workload = c.mean;
      mean_row.censored = d.mean;
      table.rows.push_back(mean_row);
      ResultRow ci_row = base;
      ci_row.replication = kAggregateCi95;
      ci_row.max_mean_abs_wait = a.half_width;
      ci_row.max_mean_rel_wait = b.half_width;
      ci_row.max_workload = c.half_width;
      ci_row.censored = d.half_width;
      table.rows.push_back(ci_row);
    }
  }
  return table;
}

}  // namespace fairmatch
