#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotindex/prices.hpp"

namespace spotindex {

struct SynthMarketSpec {
  std::string vm_id;
  double mean = 0.0;
  double stddev = 0.0;
  Seconds change_period = 60;
  Seconds duration = 3600;
  double volatility_scale = 1.0;
  bool enforce_sample_moments = true;
  /// Timestamp of the first main-segment point.
  Timestamp start = 0;
  /// Length of an independent segment generated before `start` so that
  /// trailing-window statistics have history at the start.
  Seconds warmup = 0;
};

void validate(const SynthMarketSpec& spec);

/// Uniform draws on [mean - stddev*sqrt(3)*scale, mean + stddev*sqrt(3)*scale],
/// one per change period. With moment enforcement each segment is affinely
/// rescaled so its mean and population std are exact.
PriceTrace generate(const SynthMarketSpec& spec, std::uint64_t seed);

/// Per-market sub-seed, independent of every other market in the suite.
std::uint64_t market_seed(std::uint64_t master_seed, std::string_view vm_id);

/// Throws ConflictError on duplicate vm ids.
TraceSet generate_market_suite(std::span<const SynthMarketSpec> specs, std::uint64_t seed);

/// JSON: either an array of market objects or {"defaults": {...}, "markets": [...]}.
std::vector<SynthMarketSpec> parse_market_specs(std::istream& in, const std::string& source = "<markets>");
std::vector<SynthMarketSpec> load_market_specs(const std::filesystem::path& path);

/// Population mean and std of the prices at each point of a trace.
std::pair<double, double> sample_moments(std::span<const PricePoint> points);

}  // namespace spotindex
