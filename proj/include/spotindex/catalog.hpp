#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace spotindex {

using Timestamp = std::int64_t;
using Seconds = std::int64_t;

enum class Family { general, compute, memory, storage, accelerated, other };

std::string_view to_string(Family family);
/// Unknown names map to Family::other.
Family family_from_string(std::string_view name);

struct VmSpec {
  std::string id;
  std::string instance_type;
  std::string zone;
  std::string region;
  Family family = Family::other;
  double cpu_capacity = 0.0;
  double mem_capacity = 0.0;
  double on_demand_price = 0.0;

  /// sqrt(C * M), the denominator of the normalized price.
  double capacity_scale() const { return std::sqrt(cpu_capacity * mem_capacity); }
};

/// Throws InvariantError when capacities or the on-demand price are not positive and finite.
void validate(const VmSpec& spec);

struct ResourceRequirement {
  double min_cpu = 0.0;
  double min_mem = 0.0;

  bool satisfied_by(const VmSpec& spec) const {
    return spec.cpu_capacity >= min_cpu && spec.mem_capacity >= min_mem;
  }
};

void validate(const ResourceRequirement& req);

/// Location/family restriction applied when forming a composition. Unset
/// fields do not constrain; all set fields must match.
struct CompositionScope {
  std::optional<std::string> region;
  std::optional<std::string> zone;
  std::optional<Family> family;

  static CompositionScope global() { return {}; }
  static CompositionScope in_region(std::string r) { return {std::move(r), std::nullopt, std::nullopt}; }
  static CompositionScope in_zone(std::string z) { return {std::nullopt, std::move(z), std::nullopt}; }
  static CompositionScope of_family(Family f) { return {std::nullopt, std::nullopt, f}; }

  bool matches(const VmSpec& spec) const;

  /// Parses "global", "region:R", "zone:Z", "family:F", or a comma-joined
  /// combination such as "region:us-west-1,family:compute".
  static CompositionScope parse(std::string_view text);
  std::string to_string() const;
};

/// Immutable set of VM specs keyed by id. Iteration order is by id.
class Catalog {
 public:
  Catalog() = default;

  /// Validates every spec and rejects duplicate ids with ConflictError.
  static Catalog from_specs(std::vector<VmSpec> specs);

  std::size_t size() const noexcept { return specs_.size(); }
  bool empty() const noexcept { return specs_.empty(); }
  auto begin() const noexcept { return specs_.begin(); }
  auto end() const noexcept { return specs_.end(); }
  const std::vector<VmSpec>& specs() const noexcept { return specs_; }

  const VmSpec* find(std::string_view id) const;
  const VmSpec* find(std::string_view instance_type, std::string_view zone) const;
  /// Throws OutOfRangeError for unknown ids.
  const VmSpec& at(std::string_view id) const;

 private:
  std::vector<VmSpec> specs_;
};

enum class CatalogFormat { csv, jsonl };

Catalog load_catalog(std::istream& in, CatalogFormat format, const std::string& source = "<catalog>");
/// Format is chosen from the extension (.csv, .jsonl/.json).
Catalog load_catalog_file(const std::filesystem::path& path);
void write_catalog_csv(std::ostream& out, const Catalog& catalog);

/// Specs meeting the requirement and scope, ordered by id. May be empty.
std::vector<const VmSpec*> filter_candidates(const Catalog& catalog, const ResourceRequirement& req,
                                             const CompositionScope& scope);
std::vector<std::string> filter_candidate_ids(const Catalog& catalog, const ResourceRequirement& req,
                                              const CompositionScope& scope);

}  // namespace spotindex
