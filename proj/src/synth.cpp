#include "spotindex/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <fmt/format.h>
#include "json.hpp"

#include "spotindex/errors.hpp"

namespace spotindex {

namespace {

constexpr double kClampTolerance = 1e-9;
constexpr double kMomentTolerance = 1e-9;
constexpr std::uint64_t kWarmupStream = 0x5741524d55505354ULL;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// [0, 1) with 53 random bits. Spelled out so results do not depend on the
/// standard library's distribution implementation.
double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::vector<double> draw_segment(const SynthMarketSpec& spec, std::size_t n, std::uint64_t seed) {
  const double sd = spec.stddev * spec.volatility_scale;
  std::vector<double> xs(n, spec.mean);
  if (n == 0 || sd == 0.0) return xs;
  std::mt19937_64 rng(seed);
  const double half = sd * std::sqrt(3.0);
  for (auto& x : xs) x = spec.mean - half + 2.0 * half * unit_uniform(rng);

  if (spec.enforce_sample_moments) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double s = std::sqrt(ss / static_cast<double>(n));
    if (s > 0.0)
      for (auto& x : xs) x = spec.mean + (x - m) * (sd / s);
    else
      std::fill(xs.begin(), xs.end(), spec.mean);
  }

  const double lo = *std::min_element(xs.begin(), xs.end());
  if (lo < 0.0) {
    if (lo < -kClampTolerance * spec.mean)
      throw InvariantError(fmt::format(
          "{}: stddev {} (scaled) forces negative prices around mean {}; use a smaller stddev or scale", spec.vm_id,
          sd, spec.mean));
    for (auto& x : xs) x = std::max(x, 0.0);
  }

  if (spec.enforce_sample_moments && n > 1) {
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double s = std::sqrt(ss / static_cast<double>(n));
    if (std::abs(m - spec.mean) > kMomentTolerance * spec.mean || std::abs(s - sd) > kMomentTolerance * sd)
      throw InvariantError(fmt::format("{}: sample moments drifted after clamping (mean {}, std {})", spec.vm_id, m, s));
  }
  return xs;
}

SynthMarketSpec market_from_json(const nlohmann::json& j, const SynthMarketSpec& defaults, const std::string& source,
                                 std::size_t index) {
  SynthMarketSpec spec = defaults;
  auto field = [&](const char* key) -> const nlohmann::json* {
    return j.contains(key) ? &j.at(key) : nullptr;
  };
  try {
    if (auto* v = field("vm_id")) spec.vm_id = v->get<std::string>();
    if (auto* v = field("mean")) spec.mean = v->get<double>();
    if (auto* v = field("stddev")) spec.stddev = v->get<double>();
    if (auto* v = field("change_period")) spec.change_period = v->get<Seconds>();
    if (auto* v = field("duration")) spec.duration = v->get<Seconds>();
    if (auto* v = field("volatility_scale")) spec.volatility_scale = v->get<double>();
    if (auto* v = field("enforce_sample_moments")) spec.enforce_sample_moments = v->get<bool>();
    if (auto* v = field("start")) spec.start = v->get<Timestamp>();
    if (auto* v = field("warmup")) spec.warmup = v->get<Seconds>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(source, index, "market", e.what());
  }
  return spec;
}

}  // namespace

void validate(const SynthMarketSpec& spec) {
  if (spec.vm_id.empty()) throw InvariantError("synthetic market has an empty vm_id");
  if (!(spec.mean > 0.0) || !std::isfinite(spec.mean))
    throw InvariantError(fmt::format("{}: mean must be > 0 (got {})", spec.vm_id, spec.mean));
  if (!(spec.stddev >= 0.0) || !std::isfinite(spec.stddev))
    throw InvariantError(fmt::format("{}: stddev must be >= 0 (got {})", spec.vm_id, spec.stddev));
  if (!(spec.volatility_scale >= 0.0))
    throw InvariantError(fmt::format("{}: volatility_scale must be >= 0", spec.vm_id));
  if (spec.change_period <= 0) throw InvariantError(fmt::format("{}: change_period must be > 0", spec.vm_id));
  if (spec.duration < spec.change_period)
    throw InvariantError(fmt::format("{}: duration must cover at least one change period", spec.vm_id));
  if (spec.warmup < 0) throw InvariantError(fmt::format("{}: warmup must be >= 0", spec.vm_id));
}

std::uint64_t market_seed(std::uint64_t master_seed, std::string_view vm_id) {
  return splitmix64(master_seed ^ fnv1a64(vm_id));
}

PriceTrace generate(const SynthMarketSpec& spec, std::uint64_t seed) {
  validate(spec);
  const auto n_main = static_cast<std::size_t>(spec.duration / spec.change_period);
  const auto n_warm = static_cast<std::size_t>(spec.warmup / spec.change_period);
  std::vector<PricePoint> points;
  points.reserve(n_main + n_warm);
  if (n_warm > 0) {
    const auto warm = draw_segment(spec, n_warm, splitmix64(seed ^ kWarmupStream));
    const Timestamp t0 = spec.start - static_cast<Timestamp>(n_warm) * spec.change_period;
    for (std::size_t i = 0; i < n_warm; ++i)
      points.push_back({t0 + static_cast<Timestamp>(i) * spec.change_period, warm[i]});
  }
  const auto main = draw_segment(spec, n_main, seed);
  for (std::size_t i = 0; i < n_main; ++i)
    points.push_back({spec.start + static_cast<Timestamp>(i) * spec.change_period, main[i]});
  return PriceTrace(spec.vm_id, std::move(points));
}

TraceSet generate_market_suite(std::span<const SynthMarketSpec> specs, std::uint64_t seed) {
  TraceSet out;
  for (const auto& spec : specs) {
    if (out.contains(spec.vm_id))
      throw ConflictError(fmt::format("duplicate synthetic market '{}'", spec.vm_id));
    out.emplace(spec.vm_id, generate(spec, market_seed(seed, spec.vm_id)));
  }
  return out;
}

std::vector<SynthMarketSpec> parse_market_specs(std::istream& in, const std::string& source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(source, 0, "*", e.what());
  }
  SynthMarketSpec defaults;
  const nlohmann::json* markets = &doc;
  if (doc.is_object()) {
    if (doc.contains("defaults")) defaults = market_from_json(doc.at("defaults"), defaults, source, 0);
    if (!doc.contains("markets")) throw ParseError(source, 0, "markets", "missing");
    markets = &doc.at("markets");
  }
  if (!markets->is_array()) throw ParseError(source, 0, "markets", "expected an array");
  std::vector<SynthMarketSpec> out;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < markets->size(); ++i) {
    auto spec = market_from_json(markets->at(i), defaults, source, i + 1);
    validate(spec);
    if (!seen.insert(spec.vm_id).second)
      throw ConflictError(fmt::format("{}: duplicate synthetic market '{}'", source, spec.vm_id));
    out.push_back(std::move(spec));
  }
  return out;
}

std::vector<SynthMarketSpec> load_market_specs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open market spec '{}'", path.string()));
  return parse_market_specs(in, path.string());
}

std::pair<double, double> sample_moments(std::span<const PricePoint> points) {
  if (points.empty()) return {0.0, 0.0};
  double m = 0.0;
  for (const auto& p : points) m += p.price;
  m /= static_cast<double>(points.size());
  double ss = 0.0;
  for (const auto& p : points) ss += (p.price - m) * (p.price - m);
  return {m, std::sqrt(ss / static_cast<double>(points.size()))};
}

}  // namespace spotindex
