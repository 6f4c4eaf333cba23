#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotindex/catalog.hpp"

namespace spotindex {

struct PricePoint {
  Timestamp timestamp = 0;
  double price = 0.0;

  friend bool operator==(const PricePoint&, const PricePoint&) = default;
};

/// Right-continuous step function of spot price over time: the price at t is
/// the price of the latest point with timestamp <= t. The last price holds
/// indefinitely; querying before the first point is an error.
class PriceTrace {
 public:
  PriceTrace() = default;
  /// Throws InvariantError unless timestamps strictly increase and prices are >= 0.
  PriceTrace(std::string vm_id, std::vector<PricePoint> points);

  const std::string& vm_id() const noexcept { return vm_id_; }
  std::span<const PricePoint> points() const noexcept { return points_; }
  bool empty() const noexcept { return points_.empty(); }
  std::size_t size() const noexcept { return points_.size(); }
  Timestamp first_timestamp() const;
  Timestamp last_timestamp() const;

  bool covers(Timestamp t) const noexcept { return !points_.empty() && t >= points_.front().timestamp; }
  /// Throws OutOfRangeError when t precedes the first point.
  double price_at(Timestamp t) const;
  std::optional<double> try_price_at(Timestamp t) const noexcept;
  /// Earliest point timestamp strictly after t.
  std::optional<Timestamp> next_change_after(Timestamp t) const noexcept;

  friend bool operator==(const PriceTrace&, const PriceTrace&) = default;

 private:
  std::string vm_id_;
  std::vector<PricePoint> points_;
};

using TraceSet = std::map<std::string, PriceTrace, std::less<>>;

double price_at(const PriceTrace& trace, Timestamp t);

inline constexpr double kDefaultCapEpsilon = 1e-9;
inline constexpr double kCapMultiple = 10.0;

/// True when the price sits at the 10x on-demand cap, within a relative epsilon.
bool is_capped(double price, const VmSpec& spec, double epsilon = kDefaultCapEpsilon);

/// One row of a raw price dump. Either vm_id or the (instance_type, zone)
/// pair identifies the VM.
struct TraceRecord {
  Timestamp timestamp = 0;
  std::string vm_id;
  std::string instance_type;
  std::string zone;
  double price = 0.0;
  std::string source;
  std::size_t line = 0;
};

struct IngestOptions {
  /// Unknown VMs raise an error instead of being skipped.
  bool strict_unknown = false;
};

struct IngestReport {
  std::size_t records = 0;
  std::size_t accepted = 0;
  std::size_t unknown_skipped = 0;
  std::size_t duplicate_timestamps = 0;
  std::size_t collapsed = 0;
  std::vector<std::string> warnings;
};

/// Builds per-VM traces: sorted by time, exact-duplicate timestamps resolved
/// last-write-wins (with a warning), consecutive equal prices collapsed.
TraceSet ingest_traces(std::span<const TraceRecord> records, const Catalog& catalog,
                       const IngestOptions& options = {}, IngestReport* report = nullptr);

enum class TraceFormat { csv, jsonl };
enum class TimestampFormat { automatic, iso8601, epoch };

/// Accepts epoch seconds or ISO-8601 ("2017-03-01T00:00:00Z", optional
/// fractional seconds and +HH:MM offset). Fractional seconds are truncated.
Timestamp parse_timestamp(std::string_view text, TimestampFormat format = TimestampFormat::automatic);
std::string format_iso8601(Timestamp t);

std::vector<TraceRecord> read_trace_records(std::istream& in, TraceFormat format,
                                            TimestampFormat ts_format = TimestampFormat::automatic,
                                            const std::string& source = "<traces>");
/// Format chosen from the extension unless given.
std::vector<TraceRecord> read_trace_records_file(const std::filesystem::path& path,
                                                 std::optional<TraceFormat> format = std::nullopt,
                                                 TimestampFormat ts_format = TimestampFormat::automatic);

/// Reads every .csv/.jsonl file in a directory (sorted by name), or a single
/// file, and ingests the union.
TraceSet load_traces(const std::filesystem::path& path, const Catalog& catalog, const IngestOptions& options = {},
                     IngestReport* report = nullptr, std::optional<TraceFormat> format = std::nullopt,
                     TimestampFormat ts_format = TimestampFormat::automatic);

/// Writes "timestamp,vm_id,price" rows with epoch-second timestamps and
/// round-trip precision prices. Each header line is emitted as a '#' comment.
void write_trace_csv(std::ostream& out, const PriceTrace& trace, std::span<const std::string> header = {});
void write_trace_jsonl(std::ostream& out, const PriceTrace& trace);

}  // namespace spotindex
