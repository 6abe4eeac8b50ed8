#include "fairmatch/cli.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <fstream>
#include <ostream>
#include <stdexcept>

#include "CLI11.hpp"
#include "fairmatch/harness.hpp"
#include "fairmatch/instance_io.hpp"
#include "fairmatch/oracles.hpp"
#include "fairmatch/policies.hpp"
#include "fairmatch/programs.hpp"
#include "fairmatch/results.hpp"
#include "fairmatch/simulator.hpp"
#include "fairmatch/solvers.hpp"
#include "json.hpp"

namespace fairmatch {

namespace {

using ojson = nlohmann::ordered_json;

struct Infeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Instance load_valid(const std::string& path) {
  Instance inst = load_instance(path);
  if (auto problems = validate_instance(inst); !problems.empty()) {
    throw std::invalid_argument(path + ": " + problems.front());
  }
  return inst;
}

ojson policy_json(const Instance& inst, const PolicyMatrix& x) {
  ojson j = ojson::object();
  for (EdgeIndex e = 0; e < inst.num_edges(); ++e) {
    const Edge& ed = inst.edge(e);
    j[inst.workers()[ed.worker] + "|" + inst.task_types()[ed.task]] = x[e];
  }
  return j;
}

ojson solution_json(const Instance& inst, const SolveResult& res) {
  ojson j;
  j["status"] = to_string(res.status);
  j["objective"] = res.objective;
  j["x"] = policy_json(inst, res.x);
  const DerivedRates d = derived_rates(inst, res.x);
  ojson rho = ojson::object(), wbar = ojson::object();
  for (WorkerIndex i = 0; i < inst.num_workers(); ++i) rho[inst.workers()[i]] = d.rho_i[i];
  for (TaskIndex t = 0; t < inst.num_task_types(); ++t) wbar[inst.task_types()[t]] = d.wbar_j[t];
  const ObjectiveReport rep = eval_objectives(inst, res.x);
  j["eta_s"] = rep.eta_s;
  j["eta_t"] = rep.eta_t;
  j["rho"] = rho;
  j["wbar"] = wbar;
  return j;
}

SolveResult require_feasible(SolveResult res) {
  if (res.status == SolveStatus::infeasible) throw Infeasible(res.message.empty() ? "infeasible" : res.message);
  return res;
}

void write_table(const ResultTable& table, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    write_results_csv(out, table);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::invalid_argument("cannot write " + path);
  write_results_csv(f, table);
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fair task assignment toolkit", "fairmatch"};
  app.require_subcommand(1);

  std::string instance_path, config_path, out_path, policy;
  int starts = 17, resolution = 41;
  std::uint64_t seed = 0;
  double kappa_v = 1.0, eta_s = 0.0, p = 0.0, q = 0.0, horizon = 0.0, warmup = 0.0;
  std::string arrival_mode = "per-type";

  auto* validate = app.add_subcommand("validate", "Check an instance file");
  validate->add_option("instance", instance_path)->required();
  auto* solve_ps_cmd = app.add_subcommand("solve-ps", "Minimise the maximum workload (LP)");
  solve_ps_cmd->add_option("instance", instance_path)->required();
  auto* solve_pt_cmd = app.add_subcommand("solve-pt", "Minimise the maximum relative wait (local search)");
  solve_pt_cmd->add_option("instance", instance_path)->required();
  solve_pt_cmd->add_option("--starts", starts, "Starts including the warm start")->check(CLI::PositiveNumber);
  solve_pt_cmd->add_option("--seed", seed);
  auto* subsets = app.add_subcommand("oracle-subsets", "Optimal max workload by subset enumeration");
  subsets->add_option("instance", instance_path)->required();
  auto* grid = app.add_subcommand("oracle-grid", "Grid search for the max relative wait");
  grid->add_option("instance", instance_path)->required();
  grid->add_option("--resolution", resolution)->required();
  auto* bound = app.add_subcommand("bound", "Approximation factor of the workload-optimal policy");
  bound->add_option("--kappa", kappa_v)->required();
  bound->add_option("--eta-s", eta_s)->required();
  auto* noncvx = app.add_subcommand("nonconvexity", "Midpoint witnesses on the two-type network");
  noncvx->add_option("--p", p)->required();
  noncvx->add_option("--q", q)->required();
  auto* simulate = app.add_subcommand("simulate", "Simulate one policy");
  simulate->add_option("instance", instance_path)->required();
  simulate->add_option("--policy", policy)->required()->check(CLI::IsMember(all_policy_names()));
  simulate->add_option("--horizon", horizon)->required();
  simulate->add_option("--seed", seed)->required();
  simulate->add_option("--warmup", warmup);
  simulate->add_option("--starts", starts, "Starts for PT-based policies")->check(CLI::PositiveNumber);
  simulate->add_option("--arrival-mode", arrival_mode)->check(CLI::IsMember({"per-type", "merged"}));
  simulate->add_option("--out", out_path, "Write a CSV row instead of JSON");
  auto* sweep = app.add_subcommand("sweep", "Run an experiment config");
  sweep->add_option("config", config_path)->required();
  sweep->add_option("--out", out_path, "CSV path (default: config output, else stdout)");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (validate->parsed()) {
      const Instance inst = load_instance(instance_path);
      const auto problems = validate_instance(inst);
      ojson j;
      j["valid"] = problems.empty();
      j["problems"] = problems;
      j["workers"] = inst.num_workers();
      j["task_types"] = inst.num_task_types();
      j["edges"] = inst.num_edges();
      if (problems.empty()) j["kappa"] = kappa(inst);
      out << j.dump(2) << '\n';
      return problems.empty() ? kExitOk : kExitUsage;
    }
    if (solve_ps_cmd->parsed()) {
      const Instance inst = load_valid(instance_path);
      out << solution_json(inst, require_feasible(solve_ps(inst))).dump(2) << '\n';
      return kExitOk;
    }
    if (solve_pt_cmd->parsed()) {
      const Instance inst = load_valid(instance_path);
      PtOptions opt;
      opt.n_starts = starts;
      opt.seed = seed;
      const SolveResult res = require_feasible(solve_pt(inst, opt));
      ojson j = solution_json(inst, res);
      j["starts"] = res.starts_used;
      j["seed"] = seed;
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    if (subsets->parsed()) {
      const Instance inst = load_valid(instance_path);
      const SubsetOracleResult res = oracle_eta_s_subsets(inst);
      ojson j;
      j["objective"] = res.objective;
      std::vector<std::string> witness;
      for (TaskIndex t : res.witness) witness.push_back(inst.task_types()[t]);
      j["witness"] = witness;
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    if (grid->parsed()) {
      const Instance inst = load_valid(instance_path);
      const GridOracleResult res = oracle_eta_t_grid(inst, resolution);
      if (!std::isfinite(res.objective)) throw Infeasible("no stable grid point");
      ojson j;
      j["objective"] = res.objective;
      j["allowance"] = res.allowance;
      j["lipschitz"] = res.lipschitz;
      j["cell"] = res.cell;
      j["points"] = res.points;
      j["x"] = policy_json(inst, res.x);
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    if (bound->parsed()) {
      out << ojson(approx_bound(kappa_v, eta_s)).dump() << '\n';
      return kExitOk;
    }
    if (noncvx->parsed()) {
      const NonconvexityResult res = nonconvexity_witness(p, q);
      auto witness = [](const std::optional<MidpointWitness>& w) {
        if (!w) return ojson(nullptr);
        return ojson{{"a", {w->ax, w->ay}}, {"b", {w->bx, w->by}}, {"f_a", w->fa},
                     {"f_b", w->fb},        {"f_mid", w->fmid},    {"gap", w->gap}};
      };
      ojson j;
      j["convexity_violation"] = witness(res.convexity_violation);
      j["concavity_violation"] = witness(res.concavity_violation);
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    if (simulate->parsed()) {
      const Instance inst = load_valid(instance_path);
      const PolicyName pol = parse_policy_name(policy);
      PolicyMatrix x;
      std::optional<double> opt_ps, opt_pt;
      if (pol.program != ProgramChoice::none) {
        const SolveResult ps = require_feasible(solve_ps(inst));
        opt_ps = ps.objective;
        x = ps.x;
        if (pol.program == ProgramChoice::pt) {
          PtOptions opt;
          opt.n_starts = starts;
          opt.seed = seed;
          const SolveResult pt = require_feasible(solve_pt(inst, opt));
          opt_pt = pt.objective;
          x = pt.x;
        }
      }
      SimConfig sc;
      sc.horizon = horizon;
      sc.warmup = warmup;
      sc.seed = seed;
      sc.arrival_mode = arrival_mode == "merged" ? ArrivalMode::merged : ArrivalMode::per_type;
      if (!(horizon > 0.0) || !(warmup >= 0.0) || !(warmup < horizon)) {
        throw std::invalid_argument("need horizon > 0 and 0 <= warmup < horizon");
      }
      const SimMetrics m = run_simulation(inst, Dispatcher(inst, pol.kind, x), sc).metrics;
      if (!out_path.empty()) {
        ResultTable t;
        t.rows.push_back({"none", "", policy, "1", m.max_mean_abs_wait, m.max_mean_rel_wait, m.max_workload,
                          static_cast<double>(m.censored), opt_ps, opt_pt});
        write_table(t, out_path, out);
        return kExitOk;
      }
      ojson j;
      j["policy"] = policy;
      j["arrivals"] = m.arrivals;
      j["served"] = m.served;
      j["censored"] = m.censored;
      j["warmup_excluded"] = m.warmup_excluded;
      j["max_mean_abs_wait"] = m.max_mean_abs_wait;
      j["max_mean_rel_wait"] = m.max_mean_rel_wait;
      j["max_abs_wait"] = m.max_abs_wait;
      j["max_workload"] = m.max_workload;
      ojson types = ojson::object(), workers = ojson::object();
      for (TaskIndex t = 0; t < inst.num_task_types(); ++t) {
        const TypeStats& s = m.per_type[t];
        types[inst.task_types()[t]] = {{"count", s.count},
                                       {"mean_abs_wait", s.mean_abs_wait},
                                       {"max_abs_wait", s.max_abs_wait},
                                       {"mean_rel_wait", s.mean_rel_wait}};
      }
      for (WorkerIndex i = 0; i < inst.num_workers(); ++i) workers[inst.workers()[i]] = m.per_worker[i];
      j["per_type"] = types;
      j["per_worker"] = workers;
      if (opt_ps) j["opt_ps"] = *opt_ps;
      if (opt_pt) j["opt_pt_local"] = *opt_pt;
      out << j.dump(2) << '\n';
      return kExitOk;
    }
    if (sweep->parsed()) {
      const ExperimentConfig cfg = load_experiment_config(config_path);
      const ResultTable table = run_experiment(cfg);
      write_table(table, out_path.empty() ? cfg.output : out_path, out);
      const bool any_feasible = std::any_of(table.rows.begin(), table.rows.end(),
                                            [](const ResultRow& r) { return r.replication != kInfeasible; });
      return any_feasible ? kExitOk : kExitInfeasible;
    }
  } catch (const Infeasible& e) {
    err << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

}  // namespace fairmatch
