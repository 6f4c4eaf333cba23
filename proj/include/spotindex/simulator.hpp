#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotindex/catalog.hpp"
#include "spotindex/policies.hpp"
#include "spotindex/prices.hpp"
#include "spotindex/tracking.hpp"

namespace spotindex {

enum class JobKind { long_running, bsp };

std::string_view to_string(JobKind kind);
JobKind job_kind_from_string(std::string_view name);

struct Phase {
  Seconds duration = 0;
  double cpu_used = 0.0;
  double mem_used = 0.0;

  friend bool operator==(const Phase&, const Phase&) = default;
};

struct JobSpec {
  std::string name = "job";
  JobKind kind = JobKind::long_running;
  int tasks = 1;
  /// Usage profile shared by every task.
  std::vector<Phase> phases;
  /// Optional per-task profiles; when non-empty it has one entry per task.
  std::vector<std::vector<Phase>> task_phases;
  ResourceRequirement requirement;
  /// GB moved by a stop-and-copy migration.
  double mem_footprint = 1.0;
  /// Revocation threshold; defaults to the cheapest qualifying on-demand price.
  std::optional<double> max_price;
  /// VM whose capacity prices the reference index cost.
  std::optional<std::string> reference_vm;
  Seconds superstep = 300;
  Timestamp start = 0;

  const std::vector<Phase>& phases_for(int task) const;
  Seconds work_for(int task) const;
  Seconds total_work() const;
};

void validate(const JobSpec& job);

struct MigrationModel {
  /// Seconds per GB of footprint.
  double rate = 1.0;
  Seconds fixed_floor = 0;
  Seconds revocation_restart = 90;
  /// Overrides the footprint-based duration when set.
  std::optional<Seconds> pinned;

  /// ceil(max(rate * footprint, floor)), or the pinned value.
  Seconds duration(double mem_footprint) const;
};

void validate(const MigrationModel& model);

/// Externally imposed migration, e.g. host maintenance. Without a target the
/// task moves to a fresh VM of the type it already holds.
struct ForcedMigration {
  Timestamp at = 0;
  int task = 0;
  std::string target;
};

struct SimConfig {
  PolicyKind policy = PolicyKind::balanced;
  PolicyParams params;
  Seconds epoch = 300;
  MigrationModel migration;
  CompositionScope composition;
  /// A held VM priced at its 10x cap is revoked even when below max_price.
  bool cap_as_revocation = false;
  std::vector<ForcedMigration> forced;
  std::uint64_t seed = 0;
};

enum class TaskState { running, paused, migrating, restarting, waiting, done };

std::string_view to_string(TaskState state);

struct SimEvent {
  Timestamp t = 0;
  /// start, acquire, release, migrate_begin, migrate_end, migrate_abort,
  /// revoke, restart_end, wait, decision, task_finish, finish.
  std::string kind;
  int task = 0;
  std::string vm_id;
  std::string target;
  std::string reason;
  Seconds duration = 0;
  Seconds lost_work = 0;
  double value = 0.0;
};

struct BillingRecord {
  int task = 0;
  std::string vm_id;
  Timestamp t0 = 0;
  Timestamp t1 = 0;
  double price = 0.0;

  double amount() const { return price * static_cast<double>(t1 - t0) / 3600.0; }
};

struct TimelineSpan {
  Timestamp t0 = 0;
  Timestamp t1 = 0;
  TaskState state = TaskState::running;
  std::string vm_id;
};

struct TaskReport {
  int task = 0;
  std::vector<TimelineSpan> timeline;
  std::vector<LedgerEvent> ledger;
  double gain = 0.0;
  double loss = 0.0;
  double cost = 0.0;
};

struct SimReport {
  std::string job_name;
  std::string policy;
  std::uint64_t seed = 0;
  Timestamp start = 0;
  Timestamp end = 0;
  Seconds wallclock = 0;
  Seconds downtime = 0;
  double availability = 1.0;
  double total_cost = 0.0;
  /// Index price at the held VM's capacity over productive task-seconds.
  double index_cost = 0.0;
  /// Index price at the reference VM's capacity over productive task-seconds.
  double reference_index_cost = 0.0;
  /// Cheapest qualifying on-demand VM for the job's total work.
  double baseline_on_demand_cost = 0.0;
  double cost_vs_on_demand = 0.0;
  double cost_vs_index = 0.0;
  int migrations = 0;
  int forced_migrations = 0;
  int revocations = 0;
  /// Some policy-initiated migration happened while the sufficiency condition was false.
  bool sufficiency_violated = false;
  double max_price = 0.0;
  Seconds migration_seconds = 0;
  double ledger_gain = 0.0;
  double ledger_loss = 0.0;
  double ledger_net = 0.0;
  std::vector<std::string> candidates;
  std::vector<SimEvent> events;
  std::vector<BillingRecord> billing;
  std::vector<TaskReport> tasks;
};

/// Deterministic event-driven run of `job` under the configured policy. The
/// candidate set and the index composition are the catalog entries meeting
/// the job requirement within the configured scope.
SimReport run_simulation(const JobSpec& job, const SimConfig& config, const TraceSet& traces, const Catalog& catalog);

/// Fills the two cost ratios. Throws InvariantError unless baseline > 0.
SimReport normalize_report(SimReport report, double baseline_on_demand_cost, double index_cost);

struct Range {
  double min = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

struct AggregateReport {
  std::vector<SimReport> trials;
  Range cost;
  Range availability;
  Range cost_vs_on_demand;
  Range cost_vs_index;
  Range migrations;
};

/// One run per trace set. Errors are rethrown as SimulationError naming the trial.
AggregateReport run_trials(const JobSpec& job, const SimConfig& config, std::span<const TraceSet> trace_sets,
                           const Catalog& catalog, bool parallel = false);

/// Total cost recomputed second by second from the acquire/release events.
double replay_total_cost(const SimReport& report, const TraceSet& traces);

}  // namespace spotindex
