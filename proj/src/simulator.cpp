#include "spotindex/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <map>
#include <set>

#include <fmt/format.h>

#include "spotindex/errors.hpp"
#include "spotindex/index.hpp"

namespace spotindex {

std::string_view to_string(JobKind kind) { return kind == JobKind::bsp ? "bsp" : "long_running"; }

JobKind job_kind_from_string(std::string_view name) {
  if (name == "long_running" || name == "long-running") return JobKind::long_running;
  if (name == "bsp") return JobKind::bsp;
  throw Error(fmt::format("unknown job kind '{}' (expected long_running or bsp)", name));
}

std::string_view to_string(TaskState state) {
  switch (state) {
    case TaskState::running: return "running";
    case TaskState::paused: return "paused";
    case TaskState::migrating: return "migrating";
    case TaskState::restarting: return "restarting";
    case TaskState::waiting: return "waiting";
    case TaskState::done: return "done";
  }
  return "running";
}

const std::vector<Phase>& JobSpec::phases_for(int task) const {
  if (!task_phases.empty()) return task_phases.at(static_cast<std::size_t>(task));
  return phases;
}

Seconds JobSpec::work_for(int task) const {
  Seconds total = 0;
  for (const auto& p : phases_for(task)) total += p.duration;
  return total;
}

Seconds JobSpec::total_work() const {
  Seconds total = 0;
  for (int i = 0; i < tasks; ++i) total += work_for(i);
  return total;
}

void validate(const JobSpec& job) {
  if (job.tasks < 1) throw InvariantError(fmt::format("job '{}': tasks must be >= 1", job.name));
  if (!job.task_phases.empty() && job.task_phases.size() != static_cast<std::size_t>(job.tasks))
    throw InvariantError(fmt::format("job '{}': task_phases has {} entries for {} tasks", job.name,
                                     job.task_phases.size(), job.tasks));
  for (int i = 0; i < job.tasks; ++i) {
    const auto& phases = job.phases_for(i);
    if (phases.empty()) throw InvariantError(fmt::format("job '{}': task {} has no phases", job.name, i));
    for (const auto& p : phases) {
      if (p.duration <= 0) throw InvariantError(fmt::format("job '{}': phase durations must be > 0", job.name));
      if (!(p.cpu_used >= 0.0) || !(p.mem_used >= 0.0) || !std::isfinite(p.cpu_used) || !std::isfinite(p.mem_used))
        throw InvariantError(fmt::format("job '{}': phase usage must be finite and >= 0", job.name));
    }
  }
  validate(job.requirement);
  if (!(job.mem_footprint > 0.0)) throw InvariantError(fmt::format("job '{}': mem_footprint must be > 0", job.name));
  if (job.superstep <= 0) throw InvariantError(fmt::format("job '{}': superstep must be > 0", job.name));
  if (job.max_price && !(*job.max_price > 0.0))
    throw InvariantError(fmt::format("job '{}': max_price must be > 0", job.name));
}

Seconds MigrationModel::duration(double mem_footprint) const {
  if (pinned) return *pinned;
  return static_cast<Seconds>(std::ceil(std::max(rate * mem_footprint, static_cast<double>(fixed_floor))));
}

void validate(const MigrationModel& model) {
  if (!(model.rate >= 0.0) || model.fixed_floor < 0 || model.revocation_restart < 0 || (model.pinned && *model.pinned < 0))
    throw InvariantError("migration model parameters must be >= 0");
}

namespace {

struct TaskSim {
  int id = 0;
  const std::vector<Phase>* phases = nullptr;
  std::vector<Seconds> ends;
  Seconds total = 0;
  TaskState state = TaskState::waiting;
  std::string vm;
  std::string dst;
  Timestamp until = 0;
  Seconds progress = 0;
  TrackingLedger ledger;
  TaskReport report;

  std::size_t phase_index() const {
    const auto it = std::upper_bound(ends.begin(), ends.end(), progress);
    return std::min(static_cast<std::size_t>(it - ends.begin()), ends.size() - 1);
  }
  const Phase& phase() const { return (*phases)[phase_index()]; }
  Seconds phase_start() const {
    const auto i = phase_index();
    return i == 0 ? 0 : ends[i - 1];
  }
  std::optional<Seconds> next_boundary() const {
    const auto it = std::upper_bound(ends.begin(), ends.end(), progress);
    if (it == ends.end()) return std::nullopt;
    return *it;
  }
  bool busy() const {
    return state == TaskState::migrating || state == TaskState::restarting || state == TaskState::waiting;
  }
  bool active() const { return state == TaskState::running || state == TaskState::paused; }
};

class Simulation {
 public:
  Simulation(const JobSpec& job, const SimConfig& config, const TraceSet& traces, const Catalog& catalog)
      : job_(job), config_(config), traces_(traces), catalog_(catalog) {
    validate(job_);
    validate(config_.migration);
    if (config_.epoch <= 0) throw InvariantError(fmt::format("epoch must be > 0 (got {})", config_.epoch));
    candidates_ = filter_candidates(catalog_, job_.requirement, config_.composition);
    if (candidates_.empty())
      throw SimulationError(fmt::format("job '{}': no candidate VM meets the requirement (cpu {}, mem {}) in scope {}",
                                        job_.name, job_.requirement.min_cpu, job_.requirement.min_mem,
                                        config_.composition.to_string()));
    for (const auto* spec : candidates_) {
      auto it = traces_.find(spec->id);
      if (it == traces_.end() || !it->second.covers(job_.start))
        throw SimulationError(fmt::format("trace coverage gap: '{}' has no price at job start t={}", spec->id,
                                          job_.start));
      composition_.push_back(spec->id);
      trace_of_.emplace(spec->id, &it->second);
      for (const auto& p : it->second.points())
        if (p.timestamp > job_.start) changes_.insert(p.timestamp);
    }
    double cheapest = std::numeric_limits<double>::infinity();
    for (const auto* spec : candidates_) cheapest = std::min(cheapest, spec->on_demand_price);
    cheapest_on_demand_ = cheapest;
    max_price_ = job_.max_price.value_or(cheapest);
    migration_seconds_ = config_.migration.duration(job_.mem_footprint);
    if (job_.reference_vm) reference_scale_ = catalog_.at(*job_.reference_vm).capacity_scale();
    for (const auto& f : config_.forced) {
      if (f.task < 0 || f.task >= job_.tasks)
        throw InvariantError(fmt::format("forced migration names task {} of {}", f.task, job_.tasks));
      forced_at_.insert(f.at);
    }
  }

  SimReport run();

 private:
  double price(const std::string& vm, Timestamp t) const { return trace_of_.at(vm)->price_at(t); }
  const VmSpec& spec(const std::string& vm) const { return catalog_.at(vm); }
  bool revoked(const std::string& vm, Timestamp t) const {
    const double p = price(vm, t);
    return p > max_price_ || (config_.cap_as_revocation && is_capped(p, spec(vm)));
  }
  Phase peak(const TaskSim& task) const {
    Phase out;
    for (const auto& p : *task.phases) {
      out.cpu_used = std::max(out.cpu_used, p.cpu_used);
      out.mem_used = std::max(out.mem_used, p.mem_used);
    }
    return out;
  }
  UtilizationSample mean_usage(const TaskSim& task) const {
    double cpu = 0.0, mem = 0.0;
    for (const auto& p : *task.phases) {
      cpu += p.cpu_used * static_cast<double>(p.duration);
      mem += p.mem_used * static_cast<double>(p.duration);
    }
    const auto total = static_cast<double>(task.total);
    return {0, cpu / total, mem / total};
  }
  static bool fits(const VmSpec& s, const Phase& usage) {
    return s.cpu_capacity >= usage.cpu_used && s.mem_capacity >= usage.mem_used;
  }
  bool fits_task(const VmSpec& s, const TaskSim& task) const {
    return fits(s, config_.policy == PolicyKind::static_placement ? peak(task) : task.phase());
  }

  std::vector<CandidateQuote> quotes(const TaskSim& task, Timestamp t) const;
  double index_now(Timestamp t) const { return index_at(traces_, catalog_, composition_, t); }

  void emit(SimEvent e) { report_.events.push_back(std::move(e)); }
  void acquire(TaskSim& task, const std::string& vm, Timestamp t) {
    emit({t, "acquire", task.id, vm, {}, {}, 0, 0, price(vm, t)});
  }
  void release(TaskSim& task, const std::string& vm, Timestamp t) {
    emit({t, "release", task.id, vm, {}, {}, 0, 0, price(vm, t)});
  }

  bool place(TaskSim& task, Timestamp t, Seconds delay, const std::string& reason);
  void begin_migration(TaskSim& task, const std::string& target, Timestamp t, const std::string& reason, bool forced);
  void revoke(TaskSim& task, const std::string& vm, Timestamp t);
  void process_instant(Timestamp t);
  void record_span(TaskSim& task, Timestamp t0, Timestamp t1, TaskState state);

  const JobSpec& job_;
  const SimConfig& config_;
  const TraceSet& traces_;
  const Catalog& catalog_;
  std::vector<const VmSpec*> candidates_;
  std::vector<std::string> composition_;
  std::map<std::string, const PriceTrace*, std::less<>> trace_of_;
  std::set<Timestamp> changes_;
  std::set<Timestamp> forced_at_;
  double cheapest_on_demand_ = 0.0;
  double max_price_ = 0.0;
  Seconds migration_seconds_ = 0;
  std::optional<double> reference_scale_;
  std::vector<TaskSim> tasks_;
  SimReport report_;
};

std::vector<CandidateQuote> Simulation::quotes(const TaskSim& task, Timestamp t) const {
  const bool is_static = config_.policy == PolicyKind::static_placement;
  const Phase usage = task.phase();
  const UtilizationSample util =
      is_static ? mean_usage(task) : UtilizationSample{t, usage.cpu_used, usage.mem_used};
  std::vector<CandidateQuote> out;
  for (const auto* s : candidates_) {
    if (!fits_task(*s, task) || revoked(s->id, t)) continue;
    out.push_back(make_quote(*s, *trace_of_.at(s->id), util, t, config_.params));
  }
  return out;
}

bool Simulation::place(TaskSim& task, Timestamp t, Seconds delay, const std::string& reason) {
  const auto qs = quotes(task, t);
  if (qs.empty()) {
    if (task.state != TaskState::waiting)
      emit({t, "wait", task.id, {}, {}, "no affordable candidate", 0, 0, 0.0});
    task.state = TaskState::waiting;
    task.vm.clear();
    return false;
  }
  const auto vm = select_vm(config_.policy, qs, index_now(t), config_.params);
  task.vm = vm;
  acquire(task, vm, t);
  if (delay > 0) {
    task.state = TaskState::restarting;
    task.until = t + delay;
  } else {
    task.state = TaskState::running;
  }
  emit({t, reason, task.id, vm, {}, {}, delay, 0, price(vm, t)});
  return true;
}

void Simulation::begin_migration(TaskSim& task, const std::string& target, Timestamp t, const std::string& reason,
                                 bool forced) {
  ++report_.migrations;
  if (forced) ++report_.forced_migrations;
  const double loss = migration_loss(price(task.vm, t), price(target, t), static_cast<double>(migration_seconds_));
  acquire(task, target, t);
  emit({t, "migrate_begin", task.id, task.vm, target, reason, migration_seconds_, 0, loss});
  if (migration_seconds_ == 0) {
    release(task, task.vm, t);
    emit({t, "migrate_end", task.id, task.vm, target, reason, 0, 0, 0.0});
    task.vm = target;
    task.state = TaskState::running;
    return;
  }
  task.dst = target;
  task.state = TaskState::migrating;
  task.until = t + migration_seconds_;
}

void Simulation::revoke(TaskSim& task, const std::string& vm, Timestamp t) {
  ++report_.revocations;
  const double p = price(vm, t);
  const std::string why = p > max_price_ ? fmt::format("price {} above max {}", p, max_price_) : "price at cap";
  if (task.state == TaskState::migrating) {
    emit({t, "migrate_abort", task.id, task.vm, task.dst, why, 0, 0, 0.0});
    release(task, task.dst, t);
    task.dst.clear();
  }
  release(task, task.vm, t);
  const Seconds checkpoint =
      job_.kind == JobKind::bsp ? (task.progress / job_.superstep) * job_.superstep : task.phase_start();
  const Seconds lost = task.progress - checkpoint;
  task.progress = checkpoint;
  emit({t, "revoke", task.id, vm, {}, why, config_.migration.revocation_restart, lost, p});
  task.vm.clear();
  task.state = TaskState::waiting;
  place(task, t, config_.migration.revocation_restart, "restart_begin");
}

void Simulation::process_instant(Timestamp t) {
  for (auto& task : tasks_) {
    if (task.state == TaskState::migrating && task.until == t) {
      release(task, task.vm, t);
      emit({t, "migrate_end", task.id, task.vm, task.dst, {}, 0, 0, 0.0});
      task.vm = task.dst;
      task.dst.clear();
      task.state = TaskState::running;
    } else if (task.state == TaskState::restarting && task.until == t) {
      emit({t, "restart_end", task.id, task.vm, {}, {}, 0, 0, 0.0});
      task.state = TaskState::running;
    }
  }

  for (auto& task : tasks_) {
    if (task.active() && task.progress >= task.total) {
      release(task, task.vm, t);
      emit({t, "task_finish", task.id, task.vm, {}, {}, 0, 0, 0.0});
      task.vm.clear();
      task.state = TaskState::done;
    }
  }

  for (auto& task : tasks_) {
    if (task.state == TaskState::done || task.state == TaskState::waiting) continue;
    if (revoked(task.vm, t))
      revoke(task, task.vm, t);
    else if (task.state == TaskState::migrating && revoked(task.dst, t))
      revoke(task, task.dst, t);
  }

  for (auto& task : tasks_)
    if (task.state == TaskState::waiting) place(task, t, config_.migration.revocation_restart, "restart_begin");

  if (forced_at_.contains(t)) {
    for (const auto& f : config_.forced) {
      if (f.at != t) continue;
      auto& task = tasks_[static_cast<std::size_t>(f.task)];
      if (!task.active()) {
        emit({t, "decision", task.id, task.vm, f.target, "forced migration skipped: task not running", 0, 0, 0.0});
        continue;
      }
      const std::string target = f.target.empty() ? task.vm : f.target;
      if (!trace_of_.contains(target))
        throw SimulationError(fmt::format("forced migration target '{}' is not a candidate", target));
      begin_migration(task, target, t, "forced", true);
    }
  }

  for (auto& task : tasks_) {
    if (!task.active() || fits(spec(task.vm), task.phase())) continue;
    const auto qs = quotes(task, t);
    if (qs.empty()) {
      release(task, task.vm, t);
      task.vm.clear();
      task.state = TaskState::waiting;
      emit({t, "wait", task.id, {}, {}, "no candidate fits the current phase", 0, 0, 0.0});
      continue;
    }
    begin_migration(task, select_vm(config_.policy, qs, index_now(t), config_.params), t, "capacity", true);
  }

  const bool tick = t > job_.start && (t - job_.start) % config_.epoch == 0;
  if (!tick || config_.policy == PolicyKind::static_placement) return;
  const double index_value = index_now(t);
  for (auto& task : tasks_) {
    if (!task.active()) continue;
    const auto qs = quotes(task, t);
    const auto d = decide(config_.policy, task.vm, qs, index_value, migration_seconds_, config_.params);
    emit({t, "decision", task.id, task.vm, d.target, d.reason, 0, 0, index_value});
    if (!d.migrates()) continue;
    const auto& src = *std::find_if(qs.begin(), qs.end(), [&](const CandidateQuote& q) { return q.vm_id == task.vm; });
    const auto& dst = *std::find_if(qs.begin(), qs.end(), [&](const CandidateQuote& q) { return q.vm_id == d.target; });
    if (!should_migrate(index_value, src.p_hat, dst.p_hat)) report_.sufficiency_violated = true;
    begin_migration(task, d.target, t, "policy", false);
  }
}

void Simulation::record_span(TaskSim& task, Timestamp t0, Timestamp t1, TaskState state) {
  auto& tl = task.report.timeline;
  const std::string& vm = state == TaskState::migrating ? task.dst : task.vm;
  if (!tl.empty() && tl.back().t1 == t0 && tl.back().state == state && tl.back().vm_id == vm) {
    tl.back().t1 = t1;
    return;
  }
  tl.push_back({t0, t1, state, vm});
}

SimReport Simulation::run() {
  report_.job_name = job_.name;
  report_.policy = std::string(to_string(config_.policy));
  report_.seed = config_.seed;
  report_.start = job_.start;
  report_.max_price = max_price_;
  report_.migration_seconds = migration_seconds_;
  report_.candidates = composition_;

  const Timestamp t0 = job_.start;
  tasks_.resize(static_cast<std::size_t>(job_.tasks));
  for (int i = 0; i < job_.tasks; ++i) {
    auto& task = tasks_[static_cast<std::size_t>(i)];
    task.id = i;
    task.report.task = i;
    task.phases = &job_.phases_for(i);
    for (const auto& p : *task.phases) task.ends.push_back((task.ends.empty() ? 0 : task.ends.back()) + p.duration);
    task.total = task.ends.back();
    place(task, t0, 0, "start");
  }

  Timestamp t = t0;
  while (true) {
    process_instant(t);

    const bool all_done =
        std::all_of(tasks_.begin(), tasks_.end(), [](const TaskSim& s) { return s.state == TaskState::done; });
    if (all_done) break;

    const bool stalled = std::any_of(tasks_.begin(), tasks_.end(), [](const TaskSim& s) { return s.busy(); });
    const bool bsp = job_.kind == JobKind::bsp;
    Seconds min_progress = std::numeric_limits<Seconds>::max();
    for (const auto& s : tasks_)
      if (s.state != TaskState::done) min_progress = std::min(min_progress, s.progress);

    std::vector<bool> advancing(tasks_.size(), false);
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      auto& s = tasks_[i];
      if (!s.active()) continue;
      advancing[i] = bsp ? (!stalled && s.progress == min_progress) : true;
      s.state = advancing[i] ? TaskState::running : TaskState::paused;
    }

    Timestamp next = std::numeric_limits<Timestamp>::max();
    auto consider = [&next, t](Timestamp c) {
      if (c > t) next = std::min(next, c);
    };
    if (auto it = changes_.upper_bound(t); it != changes_.end()) consider(*it);
    if (auto it = forced_at_.upper_bound(t); it != forced_at_.end()) consider(*it);
    consider(t0 + ((t - t0) / config_.epoch + 1) * config_.epoch);
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto& s = tasks_[i];
      if (s.state == TaskState::migrating || s.state == TaskState::restarting) consider(s.until);
      if (!advancing[i]) continue;
      if (auto b = s.next_boundary()) consider(t + (*b - s.progress));
      if (bsp) {
        Seconds ahead = std::numeric_limits<Seconds>::max();
        for (const auto& o : tasks_)
          if (o.state != TaskState::done && o.progress > s.progress) ahead = std::min(ahead, o.progress);
        if (ahead != std::numeric_limits<Seconds>::max()) consider(t + (ahead - s.progress));
      }
    }
    const bool idle_forever = std::none_of(advancing.begin(), advancing.end(), [](bool a) { return a; }) &&
                              std::none_of(tasks_.begin(), tasks_.end(), [](const TaskSim& s) {
                                return s.state == TaskState::migrating || s.state == TaskState::restarting;
                              }) &&
                              changes_.upper_bound(t) == changes_.end() && forced_at_.upper_bound(t) == forced_at_.end();
    if (idle_forever)
      throw SimulationError(fmt::format("job '{}' cannot make progress after t={}: no affordable VM will appear",
                                        job_.name, t));
    const Timestamp t1 = next;
    const Seconds dt = t1 - t;

    const bool need_index = std::any_of(advancing.begin(), advancing.end(), [](bool a) { return a; });
    const double index_value = need_index ? index_now(t) : 0.0;

    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      auto& s = tasks_[i];
      if (s.state == TaskState::done) continue;
      record_span(s, t, t1, s.state);
      if (s.state == TaskState::waiting) continue;
      const double p = price(s.vm, t);
      report_.billing.push_back({s.id, s.vm, t, t1, p});
      switch (s.state) {
        case TaskState::running: {
          const double scale = spec(s.vm).capacity_scale();
          s.ledger.hold(t, t1, s.vm, p, index_value, scale);
          report_.index_cost += index_value * scale * static_cast<double>(dt) / 3600.0;
          report_.reference_index_cost +=
              index_value * reference_scale_.value_or(scale) * static_cast<double>(dt) / 3600.0;
          s.progress += dt;
          break;
        }
        case TaskState::paused:
          s.ledger.idle(t, t1, s.vm, p);
          break;
        case TaskState::migrating: {
          const double pd = price(s.dst, t);
          report_.billing.push_back({s.id, s.dst, t, t1, pd});
          s.ledger.migrating(t, t1, s.vm, p, s.dst, pd);
          break;
        }
        case TaskState::restarting:
          s.ledger.restarting(t, t1, s.vm, p);
          break;
        default:
          break;
      }
    }
    if (stalled) report_.downtime += dt;
    t = t1;
  }

  report_.end = t;
  report_.wallclock = t - t0;
  emit({t, "finish", -1, {}, {}, {}, report_.wallclock, 0, 0.0});
  report_.availability = report_.wallclock > 0
                             ? 1.0 - static_cast<double>(report_.downtime) / static_cast<double>(report_.wallclock)
                             : 1.0;
  for (const auto& b : report_.billing) {
    report_.total_cost += b.amount();
    tasks_[static_cast<std::size_t>(b.task)].report.cost += b.amount();
  }
  for (auto& s : tasks_) {
    s.report.gain = s.ledger.accrued_gain();
    s.report.loss = s.ledger.accrued_loss();
    s.report.ledger.assign(s.ledger.events().begin(), s.ledger.events().end());
    report_.ledger_gain += s.report.gain;
    report_.ledger_loss += s.report.loss;
    report_.tasks.push_back(std::move(s.report));
  }
  report_.ledger_net = report_.ledger_gain - report_.ledger_loss;
  const double baseline = cheapest_on_demand_ * static_cast<double>(job_.total_work()) / 3600.0;
  const double reference = report_.reference_index_cost;
  return normalize_report(std::move(report_), baseline, reference);
}

Range range_of(std::span<const SimReport> trials, auto field) {
  Range r;
  r.min = std::numeric_limits<double>::infinity();
  r.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& t : trials) {
    const double v = field(t);
    r.min = std::min(r.min, v);
    r.max = std::max(r.max, v);
    sum += v;
  }
  r.mean = sum / static_cast<double>(trials.size());
  return r;
}

}  // namespace

SimReport run_simulation(const JobSpec& job, const SimConfig& config, const TraceSet& traces, const Catalog& catalog) {
  return Simulation(job, config, traces, catalog).run();
}

SimReport normalize_report(SimReport report, double baseline_on_demand_cost, double index_cost) {
  if (!(baseline_on_demand_cost > 0.0))
    throw InvariantError(fmt::format("on-demand baseline cost must be > 0 (got {})", baseline_on_demand_cost));
  report.baseline_on_demand_cost = baseline_on_demand_cost;
  report.cost_vs_on_demand = report.total_cost / baseline_on_demand_cost;
  report.cost_vs_index = index_cost > 0.0 ? report.total_cost / index_cost : 0.0;
  return report;
}

AggregateReport run_trials(const JobSpec& job, const SimConfig& config, std::span<const TraceSet> trace_sets,
                           const Catalog& catalog, bool parallel) {
  if (trace_sets.empty()) throw Error("run_trials needs at least one trace set");
  AggregateReport agg;
  auto one = [&](std::size_t i) {
    try {
      return run_simulation(job, config, trace_sets[i], catalog);
    } catch (const std::exception& e) {
      throw SimulationError(fmt::format("trial {}: {}", i, e.what()));
    }
  };
  if (parallel) {
    std::vector<std::future<SimReport>> futures;
    for (std::size_t i = 0; i < trace_sets.size(); ++i) futures.push_back(std::async(std::launch::async, one, i));
    for (auto& f : futures) agg.trials.push_back(f.get());
  } else {
    for (std::size_t i = 0; i < trace_sets.size(); ++i) agg.trials.push_back(one(i));
  }
  agg.cost = range_of(agg.trials, [](const SimReport& r) { return r.total_cost; });
  agg.availability = range_of(agg.trials, [](const SimReport& r) { return r.availability; });
  agg.cost_vs_on_demand = range_of(agg.trials, [](const SimReport& r) { return r.cost_vs_on_demand; });
  agg.cost_vs_index = range_of(agg.trials, [](const SimReport& r) { return r.cost_vs_index; });
  agg.migrations = range_of(agg.trials, [](const SimReport& r) { return static_cast<double>(r.migrations); });
  return agg;
}

double replay_total_cost(const SimReport& report, const TraceSet& traces) {
  struct Holding {
    int task;
    std::string vm;
    Timestamp from;
  };
  std::vector<Holding> open;
  double total = 0.0;
  auto bill = [&](const std::string& vm, Timestamp from, Timestamp to) {
    const auto it = traces.find(vm);
    if (it == traces.end()) throw SimulationError(fmt::format("replay: no trace for '{}'", vm));
    for (Timestamp s = from; s < to; ++s) total += it->second.price_at(s) / 3600.0;
  };
  for (const auto& e : report.events) {
    if (e.kind == "acquire") {
      open.push_back({e.task, e.vm_id, e.t});
    } else if (e.kind == "release") {
      auto it = std::find_if(open.begin(), open.end(),
                             [&](const Holding& h) { return h.task == e.task && h.vm == e.vm_id; });
      if (it == open.end())
        throw SimulationError(fmt::format("replay: release of '{}' by task {} at t={} without acquire", e.vm_id,
                                          e.task, e.t));
      bill(it->vm, it->from, e.t);
      open.erase(it);
    }
  }
  for (const auto& h : open) bill(h.vm, h.from, report.end);
  return total;
}

}  // namespace spotindex
