#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "spotindex/catalog.hpp"
#include "spotindex/errors.hpp"
#include "spotindex/index.hpp"
#include "spotindex/prices.hpp"
#include "spotindex/report_io.hpp"
#include "spotindex/simulator.hpp"
#include "spotindex/synth.hpp"

namespace spotindex::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// CLI11 config formatter reading and writing a flat JSON object keyed by
/// long option names.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App* app, bool default_also, bool, std::string) const override {
    json j = json::object();
    for (const CLI::Option* opt : app->get_options()) {
      if (!opt->get_configurable()) continue;
      const std::string name = opt->get_single_name();
      if (name.empty() || name == "help" || name == "config") continue;
      const bool flag = opt->get_expected_min() == 0;
      if (opt->count() == 0) {
        if (!default_also) continue;
        const auto d = opt->get_default_str();
        if (flag)
          j[name] = d == "true";
        else if (!d.empty())
          j[name] = d;
        continue;
      }
      if (flag) {
        j[name] = opt->as<bool>();
        continue;
      }
      const auto& res = opt->results();
      if (opt->get_items_expected_max() > 1 || res.size() > 1)
        j[name] = res;
      else
        j[name] = res.front();
    }
    return j.dump();
  }

  std::vector<CLI::ConfigItem> from_config(std::istream& in) const override {
    json j;
    try {
      j = json::parse(in);
    } catch (const json::parse_error& e) {
      throw CLI::ConversionError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config file must hold a JSON object");
    std::vector<CLI::ConfigItem> items;
    for (auto it = j.begin(); it != j.end(); ++it) {
      CLI::ConfigItem item;
      item.name = it.key();
      auto text = [](const json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); };
      const auto& v = it.value();
      if (v.is_null()) continue;
      if (v.is_object()) throw CLI::ConversionError("config key '" + it.key() + "' must not be an object");
      if (v.is_array())
        for (const auto& e : v) item.inputs.push_back(text(e));
      else
        item.inputs.push_back(text(v));
      items.push_back(std::move(item));
    }
    return items;
  }
};

/// Subcommand config files are not read by CLI11 itself, so the file is
/// turned into plain arguments ahead of the explicit ones. Explicit
/// arguments win.
std::vector<std::string> expand_config(const CLI::App& app, const std::vector<std::string>& args) {
  if (args.empty()) return args;
  const CLI::App* sub = app.get_subcommand_no_throw(args.front());
  if (sub == nullptr) return args;
  std::vector<std::string> explicit_args;
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[++i];
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
    } else {
      explicit_args.push_back(args[i]);
    }
  }
  if (path.empty()) return args;
  std::ifstream in(path);
  if (!in) throw CLI::FileError::Missing(path);
  auto given = [&](const std::string& name) {
    return std::any_of(explicit_args.begin(), explicit_args.end(), [&](const std::string& a) {
      return a == "--" + name || a.rfind("--" + name + "=", 0) == 0;
    });
  };
  std::vector<std::string> out{explicit_args.front()};
  for (const auto& item : JsonConfig().from_config(in)) {
    const CLI::Option* opt = sub->get_option_no_throw("--" + item.name);
    if (opt == nullptr) throw CLI::ConversionError("unknown config key '" + item.name + "'");
    if (given(item.name)) continue;
    if (opt->get_expected_min() == 0) {
      if (item.inputs.size() != 1) throw CLI::ConversionError::TooManyInputsFlag(item.name);
      out.push_back("--" + item.name + "=" + item.inputs.front());
      continue;
    }
    for (const auto& v : item.inputs) {
      out.push_back("--" + item.name);
      out.push_back(v);
    }
  }
  out.insert(out.end(), explicit_args.begin() + 1, explicit_args.end());
  return out;
}

std::string echo_of(const CLI::App* sub) { return JsonConfig().to_config(sub, true, false, ""); }

std::vector<std::string> header_lines(const CLI::App* sub, std::uint64_t seed) {
  return {fmt::format("spotindex {} {}", tool_version(), sub->get_name()), fmt::format("seed {}", seed),
          fmt::format("config {}", echo_of(sub))};
}

void with_output(const std::string& path, std::ostream& fallback, const std::function<void(std::ostream&)>& fn) {
  if (path.empty() || path == "-") {
    fn(fallback);
    return;
  }
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error(fmt::format("cannot write '{}'", path));
  fn(f);
}

std::string file_stem_for(std::string_view id) {
  std::string out(id);
  for (auto& c : out)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '.' && c != '-' && c != '_' && c != '@') c = '_';
  return out;
}

TimestampFormat ts_format_from(const std::string& s) {
  if (s == "auto") return TimestampFormat::automatic;
  if (s == "iso8601") return TimestampFormat::iso8601;
  return TimestampFormat::epoch;
}

std::optional<TraceFormat> schema_from(const std::string& s) {
  if (s == "csv") return TraceFormat::csv;
  if (s == "jsonl") return TraceFormat::jsonl;
  return std::nullopt;
}

void write_combined_csv(std::ostream& out, const TraceSet& traces, const std::vector<std::string>& header) {
  for (const auto& h : header) out << "# " << h << '\n';
  out << "timestamp,vm_id,price\n";
  for (const auto& [id, trace] : traces)
    for (const auto& p : trace.points()) out << fmt::format("{},{},{}\n", p.timestamp, id, p.price);
}

void write_trace_dir(const fs::path& dir, const TraceSet& traces, const std::vector<std::string>& header) {
  fs::create_directories(dir);
  for (const auto& [id, trace] : traces) {
    std::ofstream f(dir / (file_stem_for(id) + ".csv"), std::ios::binary);
    if (!f) throw Error(fmt::format("cannot write traces into '{}'", dir.string()));
    write_trace_csv(f, trace, header);
  }
}

struct ScopeFlags {
  bool global = false;
  std::string region, zone, family, require, composition;

  CompositionScope scope() const {
    CompositionScope s = composition.empty() ? CompositionScope::global() : CompositionScope::parse(composition);
    if (global) return s;
    if (!region.empty()) s.region = region;
    if (!zone.empty()) s.zone = zone;
    if (!family.empty()) s.family = family_from_string(family);
    return s;
  }

  ResourceRequirement requirement() const {
    ResourceRequirement req;
    if (require.empty()) return req;
    const auto comma = require.find(',');
    if (comma == std::string::npos) throw Error(fmt::format("--require expects 'cpu,mem' (got '{}')", require));
    try {
      req.min_cpu = std::stod(require.substr(0, comma));
      req.min_mem = std::stod(require.substr(comma + 1));
    } catch (const std::exception&) {
      throw Error(fmt::format("--require expects two numbers 'cpu,mem' (got '{}')", require));
    }
    validate(req);
    return req;
  }
};

json series_json(const IndexSeries& s) {
  json samples = json::array();
  for (const auto& p : s.samples)
    samples.push_back(
        {{"timestamp", p.timestamp}, {"value", p.value}, {"min", p.min}, {"max", p.max}, {"n_effective", p.n_effective}});
  return {{"composition", s.composition}, {"period", s.period}, {"samples", samples}, {"gaps", s.gaps}};
}

std::pair<Timestamp, Timestamp> common_window(const TraceSet& traces, const std::vector<std::string>& ids) {
  std::optional<Timestamp> lo, hi;
  for (const auto& id : ids) {
    auto it = traces.find(id);
    if (it == traces.end() || it->second.empty()) continue;
    lo = std::max(lo.value_or(it->second.first_timestamp()), it->second.first_timestamp());
    hi = std::min(hi.value_or(it->second.last_timestamp()), it->second.last_timestamp());
  }
  if (!lo) throw Error("no composition member has a price trace");
  return {*lo, std::max(*lo, *hi)};
}

// ---------------------------------------------------------------- ingest

struct IngestArgs {
  std::string catalog, traces, schema = "auto", timestamps = "auto", out;
  bool strict = false;
};

void add_ingest(CLI::App& app, IngestArgs& a) {
  app.add_option("--catalog", a.catalog, "VM catalog (CSV or JSON lines)")->required()->check(CLI::ExistingFile);
  app.add_option("--traces", a.traces, "Trace file or directory")->required()->check(CLI::ExistingPath);
  app.add_option("--schema", a.schema, "Trace file schema")->check(CLI::IsMember({"auto", "csv", "jsonl"}))->capture_default_str();
  app.add_option("--timestamps", a.timestamps, "Timestamp format")
      ->check(CLI::IsMember({"auto", "iso8601", "epoch"}))
      ->capture_default_str();
  app.add_flag("--strict", a.strict, "Fail on records for VMs missing from the catalog");
  app.add_option("--out", a.out, "Directory for per-VM trace files (default: one CSV on stdout)");
}

int run_ingest(const CLI::App* sub, const IngestArgs& a, std::ostream& out, std::ostream& err) {
  const auto catalog = load_catalog_file(a.catalog);
  IngestReport rep;
  const auto traces = load_traces(a.traces, catalog, {a.strict}, &rep, schema_from(a.schema), ts_format_from(a.timestamps));
  for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
  const auto header = header_lines(sub, 0);
  if (a.out.empty()) {
    write_combined_csv(out, traces, header);
  } else {
    write_trace_dir(a.out, traces, header);
    out << fmt::format("ingested {} records into {} traces: {} accepted, {} unknown skipped, {} duplicate timestamps, "
                       "{} repeated prices collapsed\n",
                       rep.records, traces.size(), rep.accepted, rep.unknown_skipped, rep.duplicate_timestamps,
                       rep.collapsed);
  }
  return 0;
}

// ---------------------------------------------------------------- index

struct IndexArgs {
  std::string catalog, traces, start, end, out, format = "csv", compare, missing = "skip";
  Seconds period = kDefaultIndexPeriod;
  ScopeFlags scope;
};

void add_index(CLI::App& app, IndexArgs& a) {
  app.add_option("--catalog", a.catalog, "VM catalog")->required()->check(CLI::ExistingFile);
  app.add_option("--traces", a.traces, "Trace file or directory")->required()->check(CLI::ExistingPath);
  app.add_flag("--global", a.scope.global, "Use every catalog entry (ignores region/zone/family)");
  app.add_option("--region", a.scope.region, "Restrict to a region");
  app.add_option("--zone", a.scope.zone, "Restrict to an availability zone");
  app.add_option("--family", a.scope.family, "Restrict to a family");
  app.add_option("--require", a.scope.require, "Minimum capacity as 'cpu,mem'");
  app.add_option("--composition", a.scope.composition, "Scope text such as 'region:R,family:F'");
  app.add_option("--start", a.start, "Window start (epoch seconds or ISO-8601)");
  app.add_option("--end", a.end, "Window end, inclusive");
  app.add_option("--period", a.period, "Sampling period in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--missing", a.missing, "Members without a price at an instant")
      ->check(CLI::IsMember({"skip", "error"}))
      ->capture_default_str();
  app.add_option("--compare", a.compare, "Second composition scope; emits a JSON comparison");
  app.add_option("--format", a.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
  app.add_option("--out", a.out, "Output file (default stdout)");
}

int run_index(const CLI::App* sub, const IndexArgs& a, std::ostream& out, std::ostream&) {
  const auto catalog = load_catalog_file(a.catalog);
  const auto traces = load_traces(a.traces, catalog);
  const auto req = a.scope.requirement();
  const auto ids = filter_candidate_ids(catalog, req, a.scope.scope());
  if (ids.empty()) throw Error("composition is empty: no catalog entry matches the scope and requirement");
  auto [lo, hi] = common_window(traces, ids);
  if (!a.start.empty()) lo = parse_timestamp(a.start);
  if (!a.end.empty()) hi = parse_timestamp(a.end);
  IndexOptions opts;
  opts.missing = a.missing == "error" ? MissingMember::error : MissingMember::skip;
  const auto series = index_series(traces, catalog, ids, lo, hi, a.period, opts);
  const double od = on_demand_index(catalog, ids);
  const auto header = header_lines(sub, 0);

  if (!a.compare.empty()) {
    const auto other_ids = filter_candidate_ids(catalog, req, CompositionScope::parse(a.compare));
    if (other_ids.empty()) throw Error(fmt::format("comparison composition '{}' is empty", a.compare));
    const auto other = index_series(traces, catalog, other_ids, lo, hi, a.period, opts);
    const double od_other = on_demand_index(catalog, other_ids);
    const auto cmp = compare_indices(series, other, od, od_other);
    json inv = json::array();
    for (const auto& i : cmp.inversions) inv.push_back({{"start", i.start}, {"end", i.end}});
    json j = {{"echo", {{"config", json::parse(echo_of(sub))}, {"seed", 0}, {"tool_version", tool_version()}}},
              {"a", {{"scope", a.scope.scope().to_string()}, {"on_demand_index", od}, {"members", ids}}},
              {"b", {{"scope", a.compare}, {"on_demand_index", od_other}, {"members", other_ids}}},
              {"overlap", cmp.overlap},
              {"mean_ratio", cmp.mean_ratio},
              {"discount", cmp.discount},
              {"on_demand_ratio", od / od_other},
              {"timestamps", cmp.timestamps},
              {"signs", cmp.signs},
              {"inversions", inv}};
    with_output(a.out, out, [&](std::ostream& o) { o << j.dump(2) << '\n'; });
    return 0;
  }

  with_output(a.out, out, [&](std::ostream& o) {
    if (a.format == "json") {
      json j = series_json(series);
      j["echo"] = {{"config", json::parse(echo_of(sub))}, {"seed", 0}, {"tool_version", tool_version()}};
      j["on_demand_index"] = od;
      o << j.dump(2) << '\n';
    } else {
      auto lines = header;
      lines.push_back(fmt::format("on_demand_index {}", od));
      write_index_csv(o, series, lines);
    }
  });
  return 0;
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
  std::string spec, out;
  std::uint64_t seed = 0;
  double scale = 1.0;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  app.add_option("--spec", a.spec, "Market spec JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--seed", a.seed, "Master seed")->capture_default_str();
  app.add_option("--scale", a.scale, "Extra multiplier on every market's volatility scale")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--out", a.out, "Directory for per-market trace files (default: one CSV on stdout)");
}

int run_synth(const CLI::App* sub, const SynthArgs& a, std::ostream& out, std::ostream&) {
  auto specs = load_market_specs(a.spec);
  for (auto& s : specs) s.volatility_scale *= a.scale;
  const auto traces = generate_market_suite(specs, a.seed);
  const auto header = header_lines(sub, a.seed);
  if (a.out.empty())
    write_combined_csv(out, traces, header);
  else
    write_trace_dir(a.out, traces, header);
  return 0;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string job, catalog, policy = "balanced", composition = "global", sufficiency = "eq5", target = "argmax";
  std::vector<std::string> traces;
  std::string out, events, billing, summary;
  Seconds epoch = 300, sigma_window = 3600, sigma_step = 300, horizon = 3600, restart = 90, migration_floor = 0;
  double migration_rate = 1.0;
  std::optional<Seconds> migration_seconds;
  std::optional<double> max_price;
  std::uint64_t seed = 0;
  bool cap_as_revocation = false, parallel = false;
};

void add_simulate(CLI::App& app, SimulateArgs& a) {
  app.add_option("--job", a.job, "Job spec JSON")->required()->check(CLI::ExistingFile);
  app.add_option("--catalog", a.catalog, "VM catalog")->required()->check(CLI::ExistingFile);
  app.add_option("--traces", a.traces, "Trace directory or file; repeat for one trial per trace set")
      ->required()
      ->check(CLI::ExistingPath);
  app.add_option("--policy", a.policy, "Policy")
      ->check(CLI::IsMember({"static", "cost", "avail", "balanced"}))
      ->capture_default_str();
  app.add_option("--composition", a.composition, "Candidate/index scope")->capture_default_str();
  app.add_option("--epoch", a.epoch, "Policy evaluation period in seconds")->check(CLI::PositiveNumber)->capture_default_str();
  app.add_option("--seed", a.seed, "Seed recorded with the run")->capture_default_str();
  app.add_option("--sigma-window", a.sigma_window, "Volatility window in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--sigma-step", a.sigma_step, "Volatility sampling step in seconds")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  app.add_option("--horizon", a.horizon, "Cost-centric benefit horizon in seconds")->capture_default_str();
  app.add_option("--sufficiency", a.sufficiency, "Balanced migration gate")
      ->check(CLI::IsMember({"eq5", "off"}))
      ->capture_default_str();
  app.add_option("--balanced-target", a.target, "Balanced migration target")
      ->check(CLI::IsMember({"argmax", "any"}))
      ->capture_default_str();
  app.add_option("--migration-rate", a.migration_rate, "Migration seconds per GB")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  app.add_option("--migration-floor", a.migration_floor, "Minimum migration seconds")->capture_default_str();
  app.add_option("--migration-seconds", a.migration_seconds, "Pin the migration duration");
  app.add_option("--restart", a.restart, "Restart delay after a revocation, seconds")->capture_default_str();
  app.add_option("--max-price", a.max_price, "Override the job's revocation threshold");
  app.add_flag("--cap-as-revocation", a.cap_as_revocation, "Revoke VMs whose price sits at the 10x cap");
  app.add_flag("--parallel", a.parallel, "Run trials concurrently");
  app.add_option("--out", a.out, "Report JSON (default stdout)");
  app.add_option("--events", a.events, "Event log as JSON lines");
  app.add_option("--billing", a.billing, "Billing intervals as CSV");
  app.add_option("--summary", a.summary, "One-row summary CSV per trial");
}

SimConfig config_of(const SimulateArgs& a) {
  SimConfig c;
  c.policy = policy_kind_from_string(a.policy);
  c.params.sigma_window = a.sigma_window;
  c.params.sigma_step = a.sigma_step;
  c.params.horizon = a.horizon;
  c.params.sufficiency = sufficiency_from_string(a.sufficiency);
  c.params.target = balanced_target_from_string(a.target);
  c.epoch = a.epoch;
  c.migration.rate = a.migration_rate;
  c.migration.fixed_floor = a.migration_floor;
  c.migration.revocation_restart = a.restart;
  c.migration.pinned = a.migration_seconds;
  c.composition = CompositionScope::parse(a.composition);
  c.cap_as_revocation = a.cap_as_revocation;
  c.seed = a.seed;
  return c;
}

void write_summary_csv(std::ostream& o, std::span<const SimReport> reports) {
  o << "trial,job,policy,total_cost,cost_vs_on_demand,cost_vs_index,availability,migrations,revocations,wallclock,"
       "downtime\n";
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    o << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", i, r.job_name, r.policy, r.total_cost, r.cost_vs_on_demand,
                     r.cost_vs_index, r.availability, r.migrations, r.revocations, r.wallclock, r.downtime);
  }
}

json range_json(const Range& r) { return {{"min", r.min}, {"mean", r.mean}, {"max", r.max}}; }

int run_simulate(const CLI::App* sub, const SimulateArgs& a, std::ostream& out, std::ostream&) {
  auto job = load_job(a.job);
  if (a.max_price) job.max_price = a.max_price;
  const auto catalog = load_catalog_file(a.catalog);
  const auto config = config_of(a);
  std::vector<TraceSet> sets;
  for (const auto& t : a.traces) sets.push_back(load_traces(t, catalog));
  const auto agg = run_trials(job, config, sets, catalog, a.parallel);
  const auto echo = echo_of(sub);

  with_output(a.out, out, [&](std::ostream& o) {
    if (agg.trials.size() == 1) {
      o << report_to_json(agg.trials.front(), job, config, 2, echo);
      return;
    }
    json j;
    json trials = json::array();
    for (const auto& r : agg.trials) trials.push_back(json::parse(report_to_json(r, job, config, -1, echo)));
    j["echo"] = trials.front().at("echo");
    j["trials"] = trials;
    j["aggregate"] = {{"cost", range_json(agg.cost)},
                      {"availability", range_json(agg.availability)},
                      {"cost_vs_on_demand", range_json(agg.cost_vs_on_demand)},
                      {"cost_vs_index", range_json(agg.cost_vs_index)},
                      {"migrations", range_json(agg.migrations)}};
    o << j.dump(2) << '\n';
  });
  if (!a.events.empty())
    with_output(a.events, out, [&](std::ostream& o) {
      for (const auto& r : agg.trials) write_events_jsonl(o, r);
    });
  if (!a.billing.empty())
    with_output(a.billing, out, [&](std::ostream& o) {
      for (const auto& h : header_lines(sub, a.seed)) o << "# " << h << '\n';
      for (const auto& r : agg.trials) write_billing_csv(o, r);
    });
  if (!a.summary.empty())
    with_output(a.summary, out, [&](std::ostream& o) {
      for (const auto& h : header_lines(sub, a.seed)) o << "# " << h << '\n';
      write_summary_csv(o, agg.trials);
    });
  return 0;
}

// ---------------------------------------------------------------- report

struct ReportArgs {
  std::vector<std::string> reports;
  std::string format = "text", out, samples;
  bool force = false;
};

void add_report(CLI::App& app, ReportArgs& a) {
  app.add_option("reports", a.reports, "Simulation report JSON files")->required()->check(CLI::ExistingFile);
  app.add_flag("--force", a.force, "Allow reports from different jobs");
  app.add_option("--format", a.format, "Table format")->check(CLI::IsMember({"text", "csv", "json"}))->capture_default_str();
  app.add_option("--out", a.out, "Output file (default stdout)");
  app.add_option("--samples", a.samples, "Per-interval billing CSV across all reports, for plotting");
}

int run_report(const CLI::App* sub, const ReportArgs& a, std::ostream& out, std::ostream&) {
  std::vector<LoadedReport> loaded;
  for (const auto& p : a.reports) loaded.push_back(load_report(p));
  for (std::size_t i = 1; i < loaded.size(); ++i)
    if (loaded[i].report.job_name != loaded[0].report.job_name && !a.force)
      throw Error(fmt::format("reports are incomparable: '{}' is job '{}' but '{}' is job '{}' (use --force)",
                              a.reports[i], loaded[i].report.job_name, a.reports[0], loaded[0].report.job_name));

  with_output(a.out, out, [&](std::ostream& o) {
    if (a.format == "json") {
      json rows = json::array();
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        const auto& r = loaded[i].report;
        rows.push_back({{"file", a.reports[i]},
                        {"job", r.job_name},
                        {"policy", r.policy},
                        {"cost_vs_on_demand", r.cost_vs_on_demand},
                        {"cost_vs_index", r.cost_vs_index},
                        {"availability", r.availability},
                        {"migrations", r.migrations},
                        {"revocations", r.revocations},
                        {"total_cost", r.total_cost}});
      }
      json j = {{"echo", {{"config", json::parse(echo_of(sub))}, {"tool_version", tool_version()}}}, {"rows", rows}};
      o << j.dump(2) << '\n';
      return;
    }
    if (a.format == "csv") {
      for (const auto& h : header_lines(sub, 0)) o << "# " << h << '\n';
      o << "file,job,policy,cost_vs_on_demand,cost_vs_index,availability,migrations,revocations,total_cost\n";
      for (std::size_t i = 0; i < loaded.size(); ++i) {
        const auto& r = loaded[i].report;
        o << fmt::format("{},{},{},{},{},{},{},{},{}\n", a.reports[i], r.job_name, r.policy, r.cost_vs_on_demand,
                         r.cost_vs_index, r.availability, r.migrations, r.revocations, r.total_cost);
      }
      return;
    }
    for (const auto& h : header_lines(sub, 0)) o << "# " << h << '\n';
    o << fmt::format("{:<12} {:<10} {:>12} {:>12} {:>12} {:>10} {:>11}\n", "job", "policy", "cost/od", "cost/index",
                     "availability", "migrations", "revocations");
    for (const auto& l : loaded) {
      const auto& r = l.report;
      o << fmt::format("{:<12} {:<10} {:>12.4f} {:>12.4f} {:>12.4f} {:>10} {:>11}\n", r.job_name, r.policy,
                       r.cost_vs_on_demand, r.cost_vs_index, r.availability, r.migrations, r.revocations);
    }
  });
  if (!a.samples.empty())
    with_output(a.samples, out, [&](std::ostream& o) {
      o << "file,policy,task,vm_id,t0,t1,price,amount\n";
      for (std::size_t i = 0; i < loaded.size(); ++i)
        for (const auto& b : loaded[i].report.billing)
          o << fmt::format("{},{},{},{},{},{},{},{}\n", a.reports[i], loaded[i].report.policy, b.task, b.vm_id, b.t0,
                           b.t1, b.price, b.amount());
    });
  return 0;
}

CLI::App* add_command(CLI::App& app, const std::string& name, const std::string& description) {
  auto* sub = app.add_subcommand(name, description);
  sub->config_formatter(std::make_shared<JsonConfig>());
  sub->set_config("--config", "", "JSON file mirroring this command's flags");
  return sub;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spot-price index analytics and VM migration policy simulator", "spotindex"};
  app.set_version_flag("--version", tool_version());
  app.require_subcommand(1);

  IngestArgs ingest;
  IndexArgs index;
  SynthArgs synth;
  SimulateArgs simulate;
  ReportArgs report;
  auto* s_ingest = add_command(app, "ingest", "Normalize raw price records into per-VM traces");
  add_ingest(*s_ingest, ingest);
  auto* s_index = add_command(app, "index", "Compute an index series for a composition");
  add_index(*s_index, index);
  auto* s_synth = add_command(app, "synth", "Generate synthetic market traces");
  add_synth(*s_synth, synth);
  auto* s_sim = add_command(app, "simulate", "Run a job under a migration policy");
  add_simulate(*s_sim, simulate);
  auto* s_report = add_command(app, "report", "Compare simulation reports");
  add_report(*s_report, report);

  try {
    auto rev = expand_config(app, std::vector<std::string>(args.size() > 1 ? args.begin() + 1 : args.end(), args.end()));
    std::reverse(rev.begin(), rev.end());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (s_ingest->parsed()) return run_ingest(s_ingest, ingest, out, err);
    if (s_index->parsed()) return run_index(s_index, index, out, err);
    if (s_synth->parsed()) return run_synth(s_synth, synth, out, err);
    if (s_sim->parsed()) return run_simulate(s_sim, simulate, out, err);
    if (s_report->parsed()) return run_report(s_report, report, out, err);
  } catch (const spotindex::Error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  err << app.help();
  return 2;
}

}  // namespace spotindex::cli
