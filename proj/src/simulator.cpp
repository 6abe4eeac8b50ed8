#include "fairmatch/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <stdexcept>

namespace fairmatch {

ArrivalProcess::ArrivalProcess(const Instance& inst, std::uint64_t seed, ArrivalMode mode)
    : mode_(mode), lambda_(inst.lambda()) {
  for (double l : lambda_) total_rate_ += l;
  if (mode_ == ArrivalMode::per_type) {
    for (TaskIndex j = 0; j < lambda_.size(); ++j) {
      streams_.emplace_back(derive_seed(seed, StreamKind::arrival, j));
      next_time_.push_back(streams_.back().exponential(lambda_[j]));
    }
  } else {
    streams_.emplace_back(derive_seed(seed, StreamKind::merged_arrival));
  }
}

Arrival ArrivalProcess::next() {
  if (lambda_.empty()) return {std::numeric_limits<double>::infinity(), 0};
  if (mode_ == ArrivalMode::per_type) {
    TaskIndex j = 0;
    for (TaskIndex k = 1; k < next_time_.size(); ++k) {
      if (next_time_[k] < next_time_[j]) j = k;
    }
    const Arrival a{next_time_[j], j};
    next_time_[j] += streams_[j].exponential(lambda_[j]);
    return a;
  }
  Rng& rng = streams_.front();
  clock_ += rng.exponential(total_rate_);
  const double u = rng.uniform() * total_rate_;
  double cumulative = 0.0;
  TaskIndex type = lambda_.size() - 1;
  for (TaskIndex j = 0; j < lambda_.size(); ++j) {
    cumulative += lambda_[j];
    if (u < cumulative) {
      type = j;
      break;
    }
  }
  return {clock_, type};
}

std::vector<Arrival> generate_arrivals(const Instance& inst, double horizon, std::uint64_t seed,
                                       ArrivalMode mode) {
  std::vector<Arrival> out;
  if (!(horizon > 0.0)) return out;
  ArrivalProcess proc(inst, seed, mode);
  for (Arrival a = proc.next(); a.time <= horizon; a = proc.next()) out.push_back(a);
  return out;
}

namespace {

enum class EventKind : int { arrival = 0, completion = 1 };

struct Event {
  double time;
  EventKind kind;
  std::uint64_t seq;
  std::size_t payload;  // task type for arrivals, worker for completions
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

}  // namespace

SimOutput run_simulation(const Instance& inst, const Dispatcher& policy, const SimConfig& cfg) {
  if (!(cfg.warmup < cfg.horizon) && cfg.horizon > 0.0) {
    throw std::invalid_argument("warmup must end before the horizon");
  }
  const std::size_t m = inst.num_workers();
  const std::size_t n = inst.num_task_types();
  constexpr auto npos = static_cast<EdgeIndex>(-1);

  std::vector<EdgeIndex> edge_of(m * n, npos);
  for (EdgeIndex e = 0; e < inst.num_edges(); ++e) edge_of[inst.edge(e).worker * n + inst.edge(e).task] = e;

  SimOutput out;
  SimMetrics& met = out.metrics;
  met.per_type.assign(n, {});
  met.per_worker.assign(m, 0.0);
  met.per_edge.assign(inst.num_edges(), {});
  std::vector<double> wait_sum(n, 0.0), rel_sum(n, 0.0), dur_sum(inst.num_edges(), 0.0);
  std::vector<double> busy_window(m, 0.0);

  RuntimeState state(m);
  Rng service_rng(derive_seed(cfg.seed, StreamKind::service));
  Rng policy_rng(derive_seed(cfg.seed, StreamKind::policy));
  ArrivalProcess arrivals(inst, cfg.seed, cfg.arrival_mode);

  std::priority_queue<Event, std::vector<Event>, Later> events;
  std::uint64_t seq = 0;
  std::size_t next_id = 0;

  auto schedule_arrival = [&] {
    const Arrival a = arrivals.next();
    if (a.time <= cfg.horizon) events.push({a.time, EventKind::arrival, seq++, a.type});
  };

  auto start_service = [&](WorkerIndex i, const QueuedTask& task) {
    const EdgeIndex e = edge_of[i * n + task.type];
    const double mu = inst.edge(e).mu;
    const double duration = service_rng.exponential(mu);
    const double now = state.now;
    state.in_service[i] = ServiceSlot{task.id, task.type, task.arrival, now, duration, 1.0 / mu};
    events.push({now + duration, EventKind::completion, seq++, i});

    const double lo = std::max(now, cfg.warmup);
    const double hi = std::min(now + duration, cfg.horizon);
    if (hi > lo) busy_window[i] += hi - lo;

    if (cfg.record_trace) {
      out.trace[task.id].start = now;
      out.trace[task.id].duration = duration;
    }
    if (task.arrival < cfg.warmup) return;
    ++met.served;
    const double wait = now - task.arrival;
    TypeStats& ts = met.per_type[task.type];
    ++ts.count;
    wait_sum[task.type] += wait;
    rel_sum[task.type] += wait * mu;
    ts.max_abs_wait = std::max(ts.max_abs_wait, wait);
    ++met.per_edge[e].count;
    dur_sum[e] += duration;
  };

  if (cfg.horizon > 0.0) schedule_arrival();
  while (!events.empty()) {
    const Event ev = events.top();
    if (ev.time > cfg.horizon) break;
    events.pop();
    state.now = ev.time;

    if (ev.kind == EventKind::arrival) {
      const QueuedTask task{next_id++, ev.payload, ev.time};
      ++met.arrivals;
      if (task.arrival < cfg.warmup) ++met.warmup_excluded;
      const WorkerIndex i = policy.assign(task.type, state, policy_rng);
      if (i >= m || edge_of[i * n + task.type] == npos) {
        throw std::logic_error("policy assigned a task to a worker that cannot serve it");
      }
      if (cfg.record_trace) {
        const double nan = std::numeric_limits<double>::quiet_NaN();
        out.trace.push_back({task.id, task.type, i, task.arrival, nan, nan});
      }
      if (state.in_service[i]) {
        state.queues[i].push_back(task);
      } else {
        start_service(i, task);
      }
      schedule_arrival();
    } else {
      const WorkerIndex i = ev.payload;
      state.busy_time[i] += state.in_service[i]->duration;
      state.in_service[i].reset();
      if (!state.queues[i].empty()) {
        const QueuedTask task = state.queues[i].front();
        state.queues[i].pop_front();
        start_service(i, task);
      }
    }
  }

  for (const auto& q : state.queues) {
    for (const QueuedTask& t : q) {
      if (t.arrival >= cfg.warmup) ++met.censored;
    }
  }

  const double window = cfg.horizon - cfg.warmup;
  for (TaskIndex j = 0; j < n; ++j) {
    TypeStats& ts = met.per_type[j];
    if (ts.count > 0) {
      ts.mean_abs_wait = wait_sum[j] / static_cast<double>(ts.count);
      ts.mean_rel_wait = rel_sum[j] / static_cast<double>(ts.count);
    }
    met.max_mean_abs_wait = std::max(met.max_mean_abs_wait, ts.mean_abs_wait);
    met.max_mean_rel_wait = std::max(met.max_mean_rel_wait, ts.mean_rel_wait);
    met.max_abs_wait = std::max(met.max_abs_wait, ts.max_abs_wait);
  }
  for (WorkerIndex i = 0; i < m; ++i) {
    met.per_worker[i] = window > 0.0 ? busy_window[i] / window : 0.0;
    met.max_workload = std::max(met.max_workload, met.per_worker[i]);
  }
  for (EdgeIndex e = 0; e < inst.num_edges(); ++e) {
    if (met.per_edge[e].count > 0) met.per_edge[e].mean_duration = dur_sum[e] / static_cast<double>(met.per_edge[e].count);
  }
  return out;
}

}  // namespace fairmatch
