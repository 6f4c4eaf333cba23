#include "spotindex/prices.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>
#include "json.hpp"

#include "spotindex/errors.hpp"
#include "text_util.hpp"

namespace spotindex {

PriceTrace::PriceTrace(std::string vm_id, std::vector<PricePoint> points)
    : vm_id_(std::move(vm_id)), points_(std::move(points)) {
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!(points_[i].price >= 0.0) || !std::isfinite(points_[i].price))
      throw InvariantError(fmt::format("{}: negative or non-finite price {} at t={}", vm_id_, points_[i].price,
                                       points_[i].timestamp));
    if (i > 0 && points_[i].timestamp <= points_[i - 1].timestamp)
      throw InvariantError(fmt::format("{}: timestamps not strictly increasing at t={}", vm_id_,
                                       points_[i].timestamp));
  }
}

Timestamp PriceTrace::first_timestamp() const {
  if (points_.empty()) throw OutOfRangeError(fmt::format("{}: empty trace", vm_id_));
  return points_.front().timestamp;
}

Timestamp PriceTrace::last_timestamp() const {
  if (points_.empty()) throw OutOfRangeError(fmt::format("{}: empty trace", vm_id_));
  return points_.back().timestamp;
}

std::optional<double> PriceTrace::try_price_at(Timestamp t) const noexcept {
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](Timestamp key, const PricePoint& p) { return key < p.timestamp; });
  if (it == points_.begin()) return std::nullopt;
  return std::prev(it)->price;
}

double PriceTrace::price_at(Timestamp t) const {
  if (auto p = try_price_at(t)) return *p;
  if (points_.empty()) throw OutOfRangeError(fmt::format("{}: empty trace", vm_id_));
  throw OutOfRangeError(
      fmt::format("{}: t={} precedes the first price point (t={})", vm_id_, t, points_.front().timestamp));
}

std::optional<Timestamp> PriceTrace::next_change_after(Timestamp t) const noexcept {
  auto it = std::upper_bound(points_.begin(), points_.end(), t,
                             [](Timestamp key, const PricePoint& p) { return key < p.timestamp; });
  if (it == points_.end()) return std::nullopt;
  return it->timestamp;
}

double price_at(const PriceTrace& trace, Timestamp t) { return trace.price_at(t); }

bool is_capped(double price, const VmSpec& spec, double epsilon) {
  const double cap = kCapMultiple * spec.on_demand_price;
  return std::abs(price - cap) <= epsilon * cap;
}

TraceSet ingest_traces(std::span<const TraceRecord> records, const Catalog& catalog, const IngestOptions& options,
                       IngestReport* report) {
  IngestReport local;
  IngestReport& rep = report ? *report : local;
  rep.records += records.size();

  struct Row {
    Timestamp t;
    std::size_t order;
    double price;
  };
  std::map<std::string, std::vector<Row>, std::less<>> rows;
  std::size_t order = 0;
  for (const auto& r : records) {
    const VmSpec* spec = !r.vm_id.empty() ? catalog.find(r.vm_id) : catalog.find(r.instance_type, r.zone);
    if (!spec) {
      const auto who = !r.vm_id.empty() ? r.vm_id : r.instance_type + "@" + r.zone;
      if (options.strict_unknown)
        throw ParseError(r.source, r.line, "vm_id", fmt::format("unknown vm '{}'", who));
      ++rep.unknown_skipped;
      rep.warnings.push_back(fmt::format("{}:{}: unknown vm '{}' skipped", r.source, r.line, who));
      continue;
    }
    if (!(r.price >= 0.0) || !std::isfinite(r.price))
      throw ParseError(r.source, r.line, "price", fmt::format("invalid price {}", r.price));
    rows[spec->id].push_back({r.timestamp, order++, r.price});
    ++rep.accepted;
  }

  TraceSet out;
  for (auto& [id, list] : rows) {
    std::stable_sort(list.begin(), list.end(), [](const Row& a, const Row& b) { return a.t < b.t; });
    std::vector<PricePoint> points;
    for (std::size_t i = 0; i < list.size(); ++i) {
      if (i + 1 < list.size() && list[i + 1].t == list[i].t) {
        ++rep.duplicate_timestamps;
        rep.warnings.push_back(fmt::format("{}: duplicate timestamp {}; last record wins", id, list[i].t));
        continue;
      }
      if (!points.empty() && points.back().price == list[i].price) {
        ++rep.collapsed;
        continue;
      }
      points.push_back({list[i].t, list[i].price});
    }
    out.emplace(id, PriceTrace(id, std::move(points)));
  }
  return out;
}

namespace {

Timestamp parse_iso8601(std::string_view s) {
  // YYYY-MM-DD[T ]HH:MM:SS[.fff][Z|+HH:MM|-HH:MM]
  auto num = [&](std::size_t pos, std::size_t len) -> int {
    if (pos + len > s.size()) throw Error(fmt::format("truncated timestamp '{}'", s));
    auto v = detail::parse_int(s.substr(pos, len));
    if (!v) throw Error(fmt::format("bad timestamp '{}'", s));
    return static_cast<int>(*v);
  };
  if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') || s[13] != ':' ||
      s[16] != ':')
    throw Error(fmt::format("bad ISO-8601 timestamp '{}'", s));
  using namespace std::chrono;
  const year_month_day ymd{year{num(0, 4)}, month{static_cast<unsigned>(num(5, 2))},
                           day{static_cast<unsigned>(num(8, 2))}};
  if (!ymd.ok()) throw Error(fmt::format("invalid calendar date in '{}'", s));
  const int hh = num(11, 2), mm = num(14, 2), ss = num(17, 2);
  if (hh > 23 || mm > 59 || ss > 60) throw Error(fmt::format("invalid time of day in '{}'", s));
  std::size_t pos = 19;
  if (pos < s.size() && s[pos] == '.') {
    ++pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
  }
  long offset = 0;
  if (pos < s.size()) {
    const char c = s[pos];
    if (c == 'Z' || c == 'z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      const int oh = num(pos + 1, 2);
      const std::size_t mpos = (pos + 3 < s.size() && s[pos + 3] == ':') ? pos + 4 : pos + 3;
      const int om = num(mpos, 2);
      offset = (c == '+' ? 1 : -1) * (oh * 3600L + om * 60L);
      pos = mpos + 2;
    }
  }
  if (pos != s.size()) throw Error(fmt::format("trailing characters in timestamp '{}'", s));
  const auto days = sys_days{ymd}.time_since_epoch().count();
  return static_cast<Timestamp>(days) * 86400 + hh * 3600L + mm * 60L + ss - offset;
}

}  // namespace

Timestamp parse_timestamp(std::string_view text, TimestampFormat format) {
  text = detail::trim(text);
  if (format != TimestampFormat::iso8601) {
    if (auto v = detail::parse_int(text)) return *v;
    if (format == TimestampFormat::epoch) {
      // Fractional epoch seconds are accepted and truncated.
      if (auto d = detail::parse_double(text)) return static_cast<Timestamp>(std::floor(*d));
      throw Error(fmt::format("bad epoch timestamp '{}'", text));
    }
  }
  return parse_iso8601(text);
}

std::string format_iso8601(Timestamp t) {
  using namespace std::chrono;
  const auto days = static_cast<long>(t >= 0 ? t / 86400 : (t - 86399) / 86400);
  const long rem = static_cast<long>(t - static_cast<Timestamp>(days) * 86400);
  const year_month_day ymd{sys_days{std::chrono::days{days}}};
  return fmt::format("{:04d}-{:02d}-{:02d}T{:02d}:{:02d}:{:02d}Z", static_cast<int>(ymd.year()),
                     static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), rem / 3600,
                     (rem / 60) % 60, rem % 60);
}

std::vector<TraceRecord> read_trace_records(std::istream& in, TraceFormat format, TimestampFormat ts_format,
                                            const std::string& source) {
  std::vector<TraceRecord> out;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  auto column = [&](std::string_view name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  std::optional<std::size_t> c_ts, c_vm, c_type, c_zone, c_price;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_skippable(line)) continue;
    TraceRecord r;
    r.source = source;
    r.line = line_no;
    std::string ts_text, price_text;
    if (format == TraceFormat::csv) {
      auto cells = detail::split_csv(line);
      if (header.empty()) {
        header = std::move(cells);
        c_ts = column("timestamp");
        c_vm = column("vm_id");
        c_type = column("instance_type");
        c_zone = column("zone");
        c_price = column("price");
        if (!c_ts) throw ParseError(source, line_no, "timestamp", "missing from header");
        if (!c_price) throw ParseError(source, line_no, "price", "missing from header");
        if (!c_vm && !(c_type && c_zone))
          throw ParseError(source, line_no, "vm_id", "header needs vm_id or instance_type+zone");
        continue;
      }
      // Concatenated files repeat their header.
      if (cells == header) continue;
      if (cells.size() != header.size())
        throw ParseError(source, line_no, "*",
                         fmt::format("expected {} columns, found {}", header.size(), cells.size()));
      ts_text = cells[*c_ts];
      price_text = cells[*c_price];
      if (c_vm) r.vm_id = cells[*c_vm];
      if (r.vm_id.empty() && c_type && c_zone) {
        r.instance_type = cells[*c_type];
        r.zone = cells[*c_zone];
      }
    } else {
      nlohmann::json j;
      try {
        j = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line_no, "*", e.what());
      }
      if (!j.is_object()) throw ParseError(source, line_no, "*", "record is not a JSON object");
      if (j.contains("_meta")) continue;
      auto text = [&](const char* key) -> std::string {
        if (!j.contains(key)) return {};
        const auto& v = j.at(key);
        return v.is_string() ? v.get<std::string>() : v.dump();
      };
      ts_text = text("timestamp");
      price_text = text("price");
      r.vm_id = text("vm_id");
      r.instance_type = text("instance_type");
      r.zone = text("zone");
      if (ts_text.empty()) throw ParseError(source, line_no, "timestamp", "missing");
      if (price_text.empty()) throw ParseError(source, line_no, "price", "missing");
      if (r.vm_id.empty() && (r.instance_type.empty() || r.zone.empty()))
        throw ParseError(source, line_no, "vm_id", "record needs vm_id or instance_type+zone");
    }
    try {
      r.timestamp = parse_timestamp(ts_text, ts_format);
    } catch (const Error& e) {
      throw ParseError(source, line_no, "timestamp", e.what());
    }
    auto price = detail::parse_double(price_text);
    if (!price) throw ParseError(source, line_no, "price", fmt::format("not a number: '{}'", price_text));
    r.price = *price;
    out.push_back(std::move(r));
  }
  return out;
}

namespace {

std::optional<TraceFormat> format_for(const std::filesystem::path& p) {
  const auto ext = p.extension().string();
  if (ext == ".csv") return TraceFormat::csv;
  if (ext == ".jsonl" || ext == ".json") return TraceFormat::jsonl;
  return std::nullopt;
}

}  // namespace

std::vector<TraceRecord> read_trace_records_file(const std::filesystem::path& path, std::optional<TraceFormat> format,
                                                 TimestampFormat ts_format) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open trace file '{}'", path.string()));
  auto fmt_ = format ? format : format_for(path);
  return read_trace_records(in, fmt_.value_or(TraceFormat::csv), ts_format, path.string());
}

TraceSet load_traces(const std::filesystem::path& path, const Catalog& catalog, const IngestOptions& options,
                     IngestReport* report, std::optional<TraceFormat> format, TimestampFormat ts_format) {
  std::vector<std::filesystem::path> files;
  if (std::filesystem::is_directory(path)) {
    for (const auto& entry : std::filesystem::directory_iterator(path))
      if (entry.is_regular_file() && format_for(entry.path())) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
  } else if (std::filesystem::exists(path)) {
    files.push_back(path);
  } else {
    throw Error(fmt::format("trace path '{}' does not exist", path.string()));
  }
  std::vector<TraceRecord> all;
  for (const auto& f : files) {
    auto recs = read_trace_records_file(f, format, ts_format);
    all.insert(all.end(), std::make_move_iterator(recs.begin()), std::make_move_iterator(recs.end()));
  }
  return ingest_traces(all, catalog, options, report);
}

void write_trace_csv(std::ostream& out, const PriceTrace& trace, std::span<const std::string> header) {
  for (const auto& h : header) out << "# " << h << '\n';
  out << "timestamp,vm_id,price\n";
  for (const auto& p : trace.points()) out << fmt::format("{},{},{}\n", p.timestamp, trace.vm_id(), p.price);
}

void write_trace_jsonl(std::ostream& out, const PriceTrace& trace) {
  for (const auto& p : trace.points()) {
    nlohmann::json j{{"timestamp", p.timestamp}, {"vm_id", trace.vm_id()}, {"price", fmt::format("{}", p.price)}};
    out << j.dump() << '\n';
  }
}

}  // namespace spotindex
