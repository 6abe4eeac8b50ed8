#include "fairmatch/policies.hpp"

#include <stdexcept>

namespace fairmatch {

WorkerIndex assign_lp_random(const Instance& inst, const PolicyMatrix& x, TaskIndex j, Rng& rng) {
  const auto& es = inst.task_edges(j);
  double mass = 0.0;
  for (EdgeIndex e : es) mass += x[e];
  if (!(mass > 0.0)) throw std::invalid_argument("task type " + inst.task_types()[j] + " has no assignment mass");

  const double u = rng.uniform() * mass;
  double cumulative = 0.0;
  std::optional<EdgeIndex> last_positive;
  for (EdgeIndex e : es) {
    if (x[e] <= 0.0) continue;
    last_positive = e;
    cumulative += x[e];
    if (u < cumulative) return inst.edge(e).worker;
  }
  return inst.edge(*last_positive).worker;  // u landed on rounding residue
}

WorkerIndex assign_free_first(const Instance& inst, const PolicyMatrix& x, TaskIndex j,
                              const RuntimeState& state, Rng& rng) {
  const auto& es = inst.task_edges(j);
  std::size_t free_count = 0;
  double free_mass = 0.0;
  for (EdgeIndex e : es) {
    if (state.is_free(inst.edge(e).worker)) {
      ++free_count;
      free_mass += x[e];
    }
  }
  if (free_count == 0) return assign_lp_random(inst, x, j, rng);

  const double u = rng.uniform();
  if (free_mass > 0.0) {
    const double target = u * free_mass;
    double cumulative = 0.0;
    std::optional<WorkerIndex> last_positive;
    for (EdgeIndex e : es) {
      const WorkerIndex i = inst.edge(e).worker;
      if (!state.is_free(i) || x[e] <= 0.0) continue;
      last_positive = i;
      cumulative += x[e];
      if (target < cumulative) return i;
    }
    return *last_positive;
  }
  // No mass on any free neighbour: uniform over the free set.
  auto pick = static_cast<std::size_t>(u * static_cast<double>(free_count));
  for (EdgeIndex e : es) {
    const WorkerIndex i = inst.edge(e).worker;
    if (!state.is_free(i)) continue;
    if (pick-- == 0) return i;
  }
  throw std::logic_error("free worker selection fell through");
}

WorkerIndex assign_gtw(const Instance& inst, TaskIndex j, const RuntimeState& state) {
  const auto& es = inst.task_edges(j);
  if (es.empty()) throw std::invalid_argument("task type has no neighbour");
  std::optional<WorkerIndex> best;
  double best_estimate = 0.0;
  for (EdgeIndex e : es) {
    const WorkerIndex i = inst.edge(e).worker;
    double estimate = 0.0;
    for (const QueuedTask& q : state.queues[i]) {
      const auto qe = inst.find_edge(i, q.type);
      estimate += 1.0 / inst.edge(*qe).mu;
    }
    if (const auto& slot = state.in_service[i]) {
      estimate += std::max(0.0, slot->mean_duration - (state.now - slot->start));
    }
    if (!best || estimate < best_estimate || (estimate == best_estimate && i < *best)) {
      best = i;
      best_estimate = estimate;
    }
  }
  return *best;
}

WorkerIndex assign_gwu(const Instance& inst, TaskIndex j, const RuntimeState& state) {
  const auto& es = inst.task_edges(j);
  if (es.empty()) throw std::invalid_argument("task type has no neighbour");
  std::optional<WorkerIndex> best;
  double best_util = 0.0;
  for (EdgeIndex e : es) {
    const WorkerIndex i = inst.edge(e).worker;
    double util = 0.0;
    if (state.now > 0.0) {
      double busy = state.busy_time[i];
      if (const auto& slot = state.in_service[i]) busy += state.now - slot->start;
      util = busy / state.now;
    }
    if (!best || util < best_util || (util == best_util && i < *best)) {
      best = i;
      best_util = util;
    }
  }
  return *best;
}

PolicyName parse_policy_name(std::string_view name) {
  if (name == "lp-random-pt") return {PolicyKind::lp_random, ProgramChoice::pt};
  if (name == "lp-random-ps") return {PolicyKind::lp_random, ProgramChoice::ps};
  if (name == "free-first-pt") return {PolicyKind::free_first, ProgramChoice::pt};
  if (name == "free-first-ps") return {PolicyKind::free_first, ProgramChoice::ps};
  if (name == "gtw") return {PolicyKind::gtw, ProgramChoice::none};
  if (name == "gwu") return {PolicyKind::gwu, ProgramChoice::none};
  throw std::invalid_argument("unknown policy '" + std::string(name) + "'");
}

std::string policy_name(PolicyName p) {
  const char* suffix = p.program == ProgramChoice::pt ? "-pt" : "-ps";
  switch (p.kind) {
    case PolicyKind::lp_random: return std::string("lp-random") + suffix;
    case PolicyKind::free_first: return std::string("free-first") + suffix;
    case PolicyKind::gtw: return "gtw";
    case PolicyKind::gwu: return "gwu";
  }
  return "unknown";
}

const std::vector<std::string>& all_policy_names() {
  static const std::vector<std::string> names{"lp-random-pt", "lp-random-ps", "free-first-pt",
                                              "free-first-ps", "gtw", "gwu"};
  return names;
}

Dispatcher::Dispatcher(const Instance& inst, PolicyKind kind, PolicyMatrix x)
    : inst_(&inst), kind_(kind), x_(std::move(x)) {
  if ((kind == PolicyKind::lp_random || kind == PolicyKind::free_first) && x_.size() != inst.num_edges()) {
    throw std::invalid_argument("LP-based policy needs one assignment fraction per edge");
  }
}

WorkerIndex Dispatcher::assign(TaskIndex j, const RuntimeState& state, Rng& rng) const {
  switch (kind_) {
    case PolicyKind::lp_random: return assign_lp_random(*inst_, x_, j, rng);
    case PolicyKind::free_first: return assign_free_first(*inst_, x_, j, state, rng);
    case PolicyKind::gtw: return assign_gtw(*inst_, j, state);
    case PolicyKind::gwu: return assign_gwu(*inst_, j, state);
  }
  throw std::logic_error("unhandled policy kind");
}

}  // namespace fairmatch
