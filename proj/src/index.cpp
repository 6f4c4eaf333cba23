#include "spotindex/index.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <ostream>

#include <fmt/format.h>

#include "spotindex/errors.hpp"

namespace spotindex {

double normalize(const VmSpec& spec, double price) { return price / spec.capacity_scale(); }

IndexPoint index_point_at(const TraceSet& traces, const Catalog& catalog, std::span<const std::string> composition,
                          Timestamp t, const IndexOptions& options) {
  if (composition.empty()) throw Error("index composition is empty");
  IndexPoint point;
  point.timestamp = t;
  point.min = std::numeric_limits<double>::infinity();
  point.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const auto& id : composition) {
    const VmSpec& spec = catalog.at(id);
    auto it = traces.find(id);
    std::optional<double> price;
    if (it != traces.end()) price = it->second.try_price_at(t);
    if (!price) {
      if (options.missing == MissingMember::error)
        throw OutOfRangeError(fmt::format("index member '{}' has no price at t={}", id, t));
      continue;
    }
    if (is_capped(*price, spec, options.cap_epsilon)) continue;
    const double v = normalize(spec, *price);
    sum += v;
    point.min = std::min(point.min, v);
    point.max = std::max(point.max, v);
    ++point.n_effective;
  }
  if (point.n_effective == 0) throw GapError(fmt::format("index undefined at t={}: no uncapped member", t));
  point.value = sum / static_cast<double>(point.n_effective);
  return point;
}

double index_at(const TraceSet& traces, const Catalog& catalog, std::span<const std::string> composition,
                Timestamp t, const IndexOptions& options) {
  return index_point_at(traces, catalog, composition, t, options).value;
}

const IndexPoint* IndexSeries::find(Timestamp t) const {
  auto it = std::lower_bound(samples.begin(), samples.end(), t,
                             [](const IndexPoint& p, Timestamp key) { return p.timestamp < key; });
  return (it != samples.end() && it->timestamp == t) ? &*it : nullptr;
}

IndexSeries index_series(const TraceSet& traces, const Catalog& catalog, std::span<const std::string> composition,
                         Timestamp t_start, Timestamp t_end, Seconds period, const IndexOptions& options) {
  if (period <= 0) throw Error(fmt::format("index period must be > 0 (got {})", period));
  if (t_end < t_start) throw Error(fmt::format("index window end {} precedes start {}", t_end, t_start));
  IndexSeries series;
  series.composition.assign(composition.begin(), composition.end());
  series.period = period;
  for (Timestamp t = t_start; t <= t_end; t += period) {
    try {
      series.samples.push_back(index_point_at(traces, catalog, composition, t, options));
    } catch (const GapError&) {
      series.gaps.push_back(t);
    }
  }
  return series;
}

double on_demand_index(const Catalog& catalog, std::span<const std::string> composition) {
  if (composition.empty()) throw Error("on-demand index composition is empty");
  double sum = 0.0;
  for (const auto& id : composition) {
    const VmSpec& spec = catalog.at(id);
    sum += normalize(spec, spec.on_demand_price);
  }
  return sum / static_cast<double>(composition.size());
}

namespace {

int sign_of(double x) { return (x > 0.0) - (x < 0.0); }

}  // namespace

ComparisonReport compare_indices(const IndexSeries& a, const IndexSeries& b, std::optional<double> on_demand_a,
                                 std::optional<double> on_demand_b) {
  ComparisonReport report;
  if (on_demand_a && on_demand_b) report.on_demand_sign = sign_of(*on_demand_a - *on_demand_b);
  double sum_a = 0.0, sum_b = 0.0;
  std::optional<InversionInterval> open;
  for (const auto& pa : a.samples) {
    const IndexPoint* pb = b.find(pa.timestamp);
    if (!pb) continue;
    const int s = sign_of(pa.value - pb->value);
    report.timestamps.push_back(pa.timestamp);
    report.signs.push_back(s);
    sum_a += pa.value;
    sum_b += pb->value;
    const bool inverted = report.on_demand_sign && s != 0 && *report.on_demand_sign != 0 && s != *report.on_demand_sign;
    if (inverted) {
      if (!open) open = InversionInterval{pa.timestamp, pa.timestamp};
      open->end = pa.timestamp + std::max(a.period, Seconds{1});
    } else if (open) {
      report.inversions.push_back(*open);
      open.reset();
    }
  }
  if (open) report.inversions.push_back(*open);
  report.overlap = report.timestamps.size();
  if (report.overlap == 0) throw Error("index series share no sample instants");
  if (sum_b == 0.0) throw Error("reference index series is identically zero");
  report.mean_ratio = sum_a / sum_b;
  report.discount = 1.0 - report.mean_ratio;
  return report;
}

void write_index_csv(std::ostream& out, const IndexSeries& series, std::span<const std::string> header) {
  for (const auto& h : header) out << "# " << h << '\n';
  out << "timestamp,value,min,max,n_effective\n";
  for (const auto& p : series.samples)
    out << fmt::format("{},{},{},{},{}\n", p.timestamp, p.value, p.min, p.max, p.n_effective);
  for (const auto& g : series.gaps) out << fmt::format("# gap at {}\n", g);
}

}  // namespace spotindex
