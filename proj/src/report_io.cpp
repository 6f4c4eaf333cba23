#include "spotindex/report_io.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "json.hpp"
#include "spotindex/errors.hpp"

namespace spotindex {

using nlohmann::json;

std::string tool_version() { return SPOTINDEX_VERSION; }

namespace {

json parse_document(std::istream& in, const std::string& source) {
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(source, 0, "*", e.what());
  }
}

template <typename T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

json phases_json(const std::vector<Phase>& phases) {
  json arr = json::array();
  for (const auto& p : phases) arr.push_back({{"duration", p.duration}, {"cpu_used", p.cpu_used}, {"mem_used", p.mem_used}});
  return arr;
}

std::vector<Phase> phases_from(const json& arr) {
  std::vector<Phase> out;
  for (const auto& p : arr) {
    Phase ph;
    ph.duration = p.at("duration").get<Seconds>();
    ph.cpu_used = p.at("cpu_used").get<double>();
    ph.mem_used = p.at("mem_used").get<double>();
    out.push_back(ph);
  }
  return out;
}

json job_json(const JobSpec& job) {
  json j;
  j["name"] = job.name;
  j["kind"] = to_string(job.kind);
  j["tasks"] = job.tasks;
  j["phases"] = phases_json(job.phases);
  if (!job.task_phases.empty()) {
    json tp = json::array();
    for (const auto& p : job.task_phases) tp.push_back(phases_json(p));
    j["task_phases"] = tp;
  }
  j["requirement"] = {{"min_cpu", job.requirement.min_cpu}, {"min_mem", job.requirement.min_mem}};
  j["mem_footprint"] = job.mem_footprint;
  j["max_price"] = job.max_price ? json(*job.max_price) : json(nullptr);
  j["reference_vm"] = job.reference_vm ? json(*job.reference_vm) : json(nullptr);
  j["superstep"] = job.superstep;
  j["start"] = job.start;
  return j;
}

JobSpec job_from(const json& j) {
  JobSpec job;
  read_opt(j, "name", job.name);
  if (j.contains("kind")) job.kind = job_kind_from_string(j.at("kind").get<std::string>());
  read_opt(j, "tasks", job.tasks);
  if (j.contains("phases")) job.phases = phases_from(j.at("phases"));
  if (j.contains("task_phases"))
    for (const auto& tp : j.at("task_phases")) job.task_phases.push_back(phases_from(tp));
  if (j.contains("requirement")) {
    read_opt(j.at("requirement"), "min_cpu", job.requirement.min_cpu);
    read_opt(j.at("requirement"), "min_mem", job.requirement.min_mem);
  }
  read_opt(j, "mem_footprint", job.mem_footprint);
  if (j.contains("max_price") && !j.at("max_price").is_null()) job.max_price = j.at("max_price").get<double>();
  if (j.contains("reference_vm") && !j.at("reference_vm").is_null())
    job.reference_vm = j.at("reference_vm").get<std::string>();
  read_opt(j, "superstep", job.superstep);
  read_opt(j, "start", job.start);
  validate(job);
  return job;
}

json config_json(const SimConfig& c) {
  json j;
  j["policy"] = to_string(c.policy);
  j["sigma_window"] = c.params.sigma_window;
  j["sigma_step"] = c.params.sigma_step;
  j["horizon"] = c.params.horizon;
  j["sufficiency"] = to_string(c.params.sufficiency);
  j["balanced_target"] = to_string(c.params.target);
  j["epoch"] = c.epoch;
  j["migration"] = {{"rate", c.migration.rate},
                    {"fixed_floor", c.migration.fixed_floor},
                    {"revocation_restart", c.migration.revocation_restart},
                    {"pinned", c.migration.pinned ? json(*c.migration.pinned) : json(nullptr)}};
  j["composition"] = c.composition.to_string();
  j["cap_as_revocation"] = c.cap_as_revocation;
  json forced = json::array();
  for (const auto& f : c.forced) forced.push_back({{"at", f.at}, {"task", f.task}, {"target", f.target}});
  j["forced"] = forced;
  j["seed"] = c.seed;
  return j;
}

SimConfig config_from(const json& j) {
  SimConfig c;
  if (j.contains("policy")) c.policy = policy_kind_from_string(j.at("policy").get<std::string>());
  read_opt(j, "sigma_window", c.params.sigma_window);
  read_opt(j, "sigma_step", c.params.sigma_step);
  read_opt(j, "horizon", c.params.horizon);
  if (j.contains("sufficiency")) c.params.sufficiency = sufficiency_from_string(j.at("sufficiency").get<std::string>());
  if (j.contains("balanced_target"))
    c.params.target = balanced_target_from_string(j.at("balanced_target").get<std::string>());
  read_opt(j, "epoch", c.epoch);
  if (j.contains("migration")) {
    const auto& m = j.at("migration");
    read_opt(m, "rate", c.migration.rate);
    read_opt(m, "fixed_floor", c.migration.fixed_floor);
    read_opt(m, "revocation_restart", c.migration.revocation_restart);
    if (m.contains("pinned") && !m.at("pinned").is_null()) c.migration.pinned = m.at("pinned").get<Seconds>();
  }
  if (j.contains("composition")) c.composition = CompositionScope::parse(j.at("composition").get<std::string>());
  read_opt(j, "cap_as_revocation", c.cap_as_revocation);
  if (j.contains("forced"))
    for (const auto& f : j.at("forced")) {
      ForcedMigration fm;
      fm.at = f.at("at").get<Timestamp>();
      read_opt(f, "task", fm.task);
      read_opt(f, "target", fm.target);
      c.forced.push_back(fm);
    }
  read_opt(j, "seed", c.seed);
  return c;
}

TaskState task_state_from(std::string_view s) {
  for (auto st : {TaskState::running, TaskState::paused, TaskState::migrating, TaskState::restarting,
                  TaskState::waiting, TaskState::done})
    if (to_string(st) == s) return st;
  throw Error(fmt::format("unknown task state '{}'", s));
}

json ledger_event_json(const LedgerEvent& e) {
  return {{"t0", e.t0},
          {"t1", e.t1},
          {"kind", to_string(e.kind)},
          {"productive", e.productive},
          {"vm_id", e.vm_id},
          {"target_vm", e.target_vm},
          {"price", e.price},
          {"target_price", e.target_price},
          {"index_value", e.index_value},
          {"capacity_scale", e.capacity_scale},
          {"gain", e.gain},
          {"loss", e.loss}};
}

LedgerEvent ledger_event_from(const json& j) {
  LedgerEvent e;
  e.t0 = j.at("t0").get<Timestamp>();
  e.t1 = j.at("t1").get<Timestamp>();
  e.kind = ledger_event_kind_from_string(j.at("kind").get<std::string>());
  e.productive = j.at("productive").get<bool>();
  e.vm_id = j.at("vm_id").get<std::string>();
  e.target_vm = j.at("target_vm").get<std::string>();
  e.price = j.at("price").get<double>();
  e.target_price = j.at("target_price").get<double>();
  e.index_value = j.at("index_value").get<double>();
  e.capacity_scale = j.at("capacity_scale").get<double>();
  e.gain = j.at("gain").get<double>();
  e.loss = j.at("loss").get<double>();
  return e;
}

json event_json(const SimEvent& e) {
  return {{"t", e.t},           {"kind", e.kind},         {"task", e.task},           {"vm_id", e.vm_id},
          {"target", e.target}, {"reason", e.reason},     {"duration", e.duration},   {"lost_work", e.lost_work},
          {"value", e.value}};
}

SimEvent event_from(const json& j) {
  SimEvent e;
  e.t = j.at("t").get<Timestamp>();
  e.kind = j.at("kind").get<std::string>();
  e.task = j.at("task").get<int>();
  e.vm_id = j.at("vm_id").get<std::string>();
  e.target = j.at("target").get<std::string>();
  e.reason = j.at("reason").get<std::string>();
  e.duration = j.at("duration").get<Seconds>();
  e.lost_work = j.at("lost_work").get<Seconds>();
  e.value = j.at("value").get<double>();
  return e;
}

const char* const kSummaryKeys[] = {"total_cost", "index_cost", "reference_index_cost", "baseline_on_demand_cost",
                                    "cost_vs_on_demand", "cost_vs_index", "availability"};

}  // namespace

JobSpec parse_job(std::istream& in, const std::string& source) {
  const auto doc = parse_document(in, source);
  try {
    return job_from(doc);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, "job", e.what());
  }
}

JobSpec load_job(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open job file '{}'", path.string()));
  return parse_job(in, path.string());
}

std::string job_to_json(const JobSpec& job, int indent) { return job_json(job).dump(indent); }

SimConfig parse_sim_config(std::istream& in, const std::string& source) {
  const auto doc = parse_document(in, source);
  try {
    return config_from(doc);
  } catch (const json::exception& e) {
    throw ParseError(source, 0, "config", e.what());
  }
}

std::string sim_config_to_json(const SimConfig& config, int indent) { return config_json(config).dump(indent); }

std::string report_to_json(const SimReport& r, const JobSpec& job, const SimConfig& config, int indent,
                           const std::string& cli_echo_json) {
  json j;
  j["echo"] = {{"job", job_json(job)}, {"config", config_json(config)}, {"seed", config.seed},
               {"tool_version", tool_version()}};
  if (!cli_echo_json.empty()) j["echo"]["cli"] = json::parse(cli_echo_json);
  j["job_name"] = r.job_name;
  j["policy"] = r.policy;
  j["seed"] = r.seed;
  j["start"] = r.start;
  j["end"] = r.end;
  j["wallclock"] = r.wallclock;
  j["downtime"] = r.downtime;
  j["availability"] = r.availability;
  j["total_cost"] = r.total_cost;
  j["index_cost"] = r.index_cost;
  j["reference_index_cost"] = r.reference_index_cost;
  j["baseline_on_demand_cost"] = r.baseline_on_demand_cost;
  j["cost_vs_on_demand"] = r.cost_vs_on_demand;
  j["cost_vs_index"] = r.cost_vs_index;
  j["migrations"] = r.migrations;
  j["forced_migrations"] = r.forced_migrations;
  j["revocations"] = r.revocations;
  j["sufficiency_violated"] = r.sufficiency_violated;
  j["max_price"] = r.max_price;
  j["migration_seconds"] = r.migration_seconds;
  j["ledger"] = {{"gain", r.ledger_gain}, {"loss", r.ledger_loss}, {"net", r.ledger_net}};
  j["candidates"] = r.candidates;
  json events = json::array();
  for (const auto& e : r.events) events.push_back(event_json(e));
  j["events"] = events;
  json billing = json::array();
  for (const auto& b : r.billing)
    billing.push_back({{"task", b.task}, {"vm_id", b.vm_id}, {"t0", b.t0}, {"t1", b.t1}, {"price", b.price}});
  j["billing"] = billing;
  json tasks = json::array();
  for (const auto& t : r.tasks) {
    json tl = json::array();
    for (const auto& s : t.timeline)
      tl.push_back({{"t0", s.t0}, {"t1", s.t1}, {"state", to_string(s.state)}, {"vm_id", s.vm_id}});
    json ledger = json::array();
    for (const auto& e : t.ledger) ledger.push_back(ledger_event_json(e));
    tasks.push_back(
        {{"task", t.task}, {"timeline", tl}, {"ledger", ledger}, {"gain", t.gain}, {"loss", t.loss}, {"cost", t.cost}});
  }
  j["tasks"] = tasks;
  return j.dump(indent) + "\n";
}

LoadedReport parse_report(std::istream& in, const std::string& source) {
  const auto j = parse_document(in, source);
  LoadedReport out;
  auto& r = out.report;
  try {
    for (const char* key : kSummaryKeys)
      if (!j.contains(key)) throw ParseError(source, 0, key, "missing (not a simulation report?)");
    out.echo_json = j.contains("echo") ? j.at("echo").dump() : std::string("{}");
    r.job_name = j.at("job_name").get<std::string>();
    r.policy = j.at("policy").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.start = j.at("start").get<Timestamp>();
    r.end = j.at("end").get<Timestamp>();
    r.wallclock = j.at("wallclock").get<Seconds>();
    r.downtime = j.at("downtime").get<Seconds>();
    r.availability = j.at("availability").get<double>();
    r.total_cost = j.at("total_cost").get<double>();
    r.index_cost = j.at("index_cost").get<double>();
    r.reference_index_cost = j.at("reference_index_cost").get<double>();
    r.baseline_on_demand_cost = j.at("baseline_on_demand_cost").get<double>();
    r.cost_vs_on_demand = j.at("cost_vs_on_demand").get<double>();
    r.cost_vs_index = j.at("cost_vs_index").get<double>();
    r.migrations = j.at("migrations").get<int>();
    r.forced_migrations = j.at("forced_migrations").get<int>();
    r.revocations = j.at("revocations").get<int>();
    r.sufficiency_violated = j.at("sufficiency_violated").get<bool>();
    r.max_price = j.at("max_price").get<double>();
    r.migration_seconds = j.at("migration_seconds").get<Seconds>();
    r.ledger_gain = j.at("ledger").at("gain").get<double>();
    r.ledger_loss = j.at("ledger").at("loss").get<double>();
    r.ledger_net = j.at("ledger").at("net").get<double>();
    r.candidates = j.at("candidates").get<std::vector<std::string>>();
    for (const auto& e : j.at("events")) r.events.push_back(event_from(e));
    for (const auto& b : j.at("billing"))
      r.billing.push_back({b.at("task").get<int>(), b.at("vm_id").get<std::string>(), b.at("t0").get<Timestamp>(),
                           b.at("t1").get<Timestamp>(), b.at("price").get<double>()});
    for (const auto& t : j.at("tasks")) {
      TaskReport tr;
      tr.task = t.at("task").get<int>();
      for (const auto& s : t.at("timeline"))
        tr.timeline.push_back({s.at("t0").get<Timestamp>(), s.at("t1").get<Timestamp>(),
                               task_state_from(s.at("state").get<std::string>()), s.at("vm_id").get<std::string>()});
      for (const auto& e : t.at("ledger")) tr.ledger.push_back(ledger_event_from(e));
      tr.gain = t.at("gain").get<double>();
      tr.loss = t.at("loss").get<double>();
      tr.cost = t.at("cost").get<double>();
      r.tasks.push_back(std::move(tr));
    }
  } catch (const json::exception& e) {
    throw ParseError(source, 0, "report", e.what());
  }
  return out;
}

LoadedReport load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open report '{}'", path.string()));
  return parse_report(in, path.string());
}

void write_events_jsonl(std::ostream& out, const SimReport& report) {
  for (const auto& e : report.events) out << event_json(e).dump() << '\n';
  for (const auto& t : report.tasks) write_ledger_jsonl(out, t.ledger, t.task);
}

void write_billing_csv(std::ostream& out, const SimReport& report) {
  out << "task,vm_id,t0,t1,price,amount\n";
  for (const auto& b : report.billing)
    out << fmt::format("{},{},{},{},{},{}\n", b.task, b.vm_id, b.t0, b.t1, b.price, b.amount());
}

}  // namespace spotindex
