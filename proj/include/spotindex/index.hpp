#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spotindex/catalog.hpp"
#include "spotindex/prices.hpp"

namespace spotindex {

/// Price per unit of sqrt(cpu * mem) capacity.
double normalize(const VmSpec& spec, double price);

enum class MissingMember { skip, error };

struct IndexOptions {
  /// What to do with a member whose trace does not cover the instant.
  MissingMember missing = MissingMember::skip;
  double cap_epsilon = kDefaultCapEpsilon;
};

struct IndexPoint {
  Timestamp timestamp = 0;
  double value = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t n_effective = 0;
};

/// Equal-weighted mean of member normalized prices at t. Capped members drop
/// out of the mean at that instant. Throws GapError when no member remains.
IndexPoint index_point_at(const TraceSet& traces, const Catalog& catalog, std::span<const std::string> composition,
                          Timestamp t, const IndexOptions& options = {});
double index_at(const TraceSet& traces, const Catalog& catalog, std::span<const std::string> composition,
                Timestamp t, const IndexOptions& options = {});

inline constexpr Seconds kDefaultIndexPeriod = 300;

struct IndexSeries {
  std::vector<std::string> composition;
  Seconds period = kDefaultIndexPeriod;
  std::vector<IndexPoint> samples;
  /// Grid instants where the index was undefined.
  std::vector<Timestamp> gaps;

  /// Sample at exactly t, if present.
  const IndexPoint* find(Timestamp t) const;
};

/// Samples at t_start, t_start + period, ... up to and including t_end.
IndexSeries index_series(const TraceSet& traces, const Catalog& catalog, std::span<const std::string> composition,
                         Timestamp t_start, Timestamp t_end, Seconds period = kDefaultIndexPeriod,
                         const IndexOptions& options = {});

/// The same aggregation applied to on-demand prices.
double on_demand_index(const Catalog& catalog, std::span<const std::string> composition);

struct InversionInterval {
  Timestamp start = 0;
  /// Exclusive.
  Timestamp end = 0;
};

struct ComparisonReport {
  std::size_t overlap = 0;
  /// mean(a) / mean(b) over the shared sample instants.
  double mean_ratio = 0.0;
  /// 1 - mean_ratio; positive when a is cheaper.
  double discount = 0.0;
  std::vector<Timestamp> timestamps;
  /// Sign of a - b at each shared instant (-1, 0, +1).
  std::vector<int> signs;
  std::optional<int> on_demand_sign;
  std::vector<InversionInterval> inversions;
};

/// Compares two series on their shared instants. When on-demand reference
/// values are given, runs where the spot sign opposes the on-demand sign are
/// reported as inversions. Throws Error when the grids do not overlap.
ComparisonReport compare_indices(const IndexSeries& a, const IndexSeries& b,
                                 std::optional<double> on_demand_a = std::nullopt,
                                 std::optional<double> on_demand_b = std::nullopt);

void write_index_csv(std::ostream& out, const IndexSeries& series, std::span<const std::string> header = {});

}  // namespace spotindex
