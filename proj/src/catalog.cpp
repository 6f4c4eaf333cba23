#include "spotindex/catalog.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <fmt/format.h>
#include "json.hpp"

#include "spotindex/errors.hpp"
#include "text_util.hpp"

namespace spotindex {

namespace {

constexpr std::array<std::pair<Family, std::string_view>, 6> kFamilyNames{{
    {Family::general, "general"},
    {Family::compute, "compute"},
    {Family::memory, "memory"},
    {Family::storage, "storage"},
    {Family::accelerated, "accelerated"},
    {Family::other, "other"},
}};

constexpr std::array<std::string_view, 8> kFields{"id",     "instance_type", "zone",         "region",
                                                  "family", "cpu_capacity",  "mem_capacity", "on_demand_price"};

bool positive_finite(double v) { return std::isfinite(v) && v > 0.0; }

double require_number(const std::string& source, std::size_t line, std::string_view field, std::string_view text) {
  auto v = detail::parse_double(text);
  if (!v) throw ParseError(source, line, std::string(field), fmt::format("not a number: '{}'", text));
  return *v;
}

VmSpec spec_from_fields(const std::map<std::string, std::string, std::less<>>& fields, const std::string& source,
                        std::size_t line) {
  for (auto name : kFields) {
    auto it = fields.find(name);
    if (it == fields.end()) throw ParseError(source, line, std::string(name), "missing");
    if (it->second.empty()) throw ParseError(source, line, std::string(name), "empty");
  }
  VmSpec spec;
  spec.id = fields.find("id")->second;
  spec.instance_type = fields.find("instance_type")->second;
  spec.zone = fields.find("zone")->second;
  spec.region = fields.find("region")->second;
  spec.family = family_from_string(fields.find("family")->second);
  spec.cpu_capacity = require_number(source, line, "cpu_capacity", fields.find("cpu_capacity")->second);
  spec.mem_capacity = require_number(source, line, "mem_capacity", fields.find("mem_capacity")->second);
  spec.on_demand_price = require_number(source, line, "on_demand_price", fields.find("on_demand_price")->second);
  try {
    validate(spec);
  } catch (const InvariantError& e) {
    throw InvariantError(fmt::format("{}:{}: {}", source, line, e.what()));
  }
  return spec;
}

std::string json_field_text(const nlohmann::json& value) {
  if (value.is_string()) return value.get<std::string>();
  if (value.is_number()) return value.dump();
  return {};
}

}  // namespace

std::string_view to_string(Family family) {
  for (const auto& [f, name] : kFamilyNames)
    if (f == family) return name;
  return "other";
}

Family family_from_string(std::string_view name) {
  const auto trimmed = detail::trim(name);
  for (const auto& [f, n] : kFamilyNames)
    if (n == trimmed) return f;
  return Family::other;
}

void validate(const VmSpec& spec) {
  if (spec.id.empty()) throw InvariantError("vm spec has an empty id");
  if (!positive_finite(spec.cpu_capacity))
    throw InvariantError(fmt::format("{}: cpu_capacity must be > 0 (got {})", spec.id, spec.cpu_capacity));
  if (!positive_finite(spec.mem_capacity))
    throw InvariantError(fmt::format("{}: mem_capacity must be > 0 (got {})", spec.id, spec.mem_capacity));
  if (!positive_finite(spec.on_demand_price))
    throw InvariantError(fmt::format("{}: on_demand_price must be > 0 (got {})", spec.id, spec.on_demand_price));
}

void validate(const ResourceRequirement& req) {
  if (!std::isfinite(req.min_cpu) || req.min_cpu < 0.0 || !std::isfinite(req.min_mem) || req.min_mem < 0.0)
    throw InvariantError(fmt::format("resource requirement must be finite and >= 0 (got cpu={}, mem={})",
                                     req.min_cpu, req.min_mem));
}

bool CompositionScope::matches(const VmSpec& spec) const {
  if (region && spec.region != *region) return false;
  if (zone && spec.zone != *zone) return false;
  if (family && spec.family != *family) return false;
  return true;
}

CompositionScope CompositionScope::parse(std::string_view text) {
  CompositionScope scope;
  text = detail::trim(text);
  if (text.empty() || text == "global") return scope;
  for (const auto& part : detail::split_csv(text)) {
    const auto colon = part.find(':');
    if (colon == std::string::npos) throw Error(fmt::format("bad composition scope term '{}'", part));
    const auto key = part.substr(0, colon);
    auto value = part.substr(colon + 1);
    if (value.empty()) throw Error(fmt::format("empty value in composition scope term '{}'", part));
    if (key == "region")
      scope.region = value;
    else if (key == "zone")
      scope.zone = value;
    else if (key == "family")
      scope.family = family_from_string(value);
    else
      throw Error(fmt::format("unknown composition scope key '{}'", key));
  }
  return scope;
}

std::string CompositionScope::to_string() const {
  std::string out;
  auto add = [&out](std::string_view k, std::string_view v) {
    if (!out.empty()) out += ',';
    out += fmt::format("{}:{}", k, v);
  };
  if (region) add("region", *region);
  if (zone) add("zone", *zone);
  if (family) add("family", spotindex::to_string(*family));
  return out.empty() ? "global" : out;
}

Catalog Catalog::from_specs(std::vector<VmSpec> specs) {
  for (const auto& s : specs) validate(s);
  std::sort(specs.begin(), specs.end(), [](const VmSpec& a, const VmSpec& b) { return a.id < b.id; });
  auto dup = std::adjacent_find(specs.begin(), specs.end(),
                                [](const VmSpec& a, const VmSpec& b) { return a.id == b.id; });
  if (dup != specs.end()) throw ConflictError(fmt::format("duplicate vm id '{}' in catalog", dup->id));
  Catalog c;
  c.specs_ = std::move(specs);
  return c;
}

const VmSpec* Catalog::find(std::string_view id) const {
  auto it = std::lower_bound(specs_.begin(), specs_.end(), id,
                             [](const VmSpec& s, std::string_view key) { return s.id < key; });
  return (it != specs_.end() && it->id == id) ? &*it : nullptr;
}

const VmSpec* Catalog::find(std::string_view instance_type, std::string_view zone) const {
  auto it = std::find_if(specs_.begin(), specs_.end(),
                         [&](const VmSpec& s) { return s.instance_type == instance_type && s.zone == zone; });
  return it != specs_.end() ? &*it : nullptr;
}

const VmSpec& Catalog::at(std::string_view id) const {
  if (const auto* s = find(id)) return *s;
  throw OutOfRangeError(fmt::format("unknown vm id '{}'", id));
}

Catalog load_catalog(std::istream& in, CatalogFormat format, const std::string& source) {
  std::vector<VmSpec> specs;
  std::map<std::string, std::size_t, std::less<>> first_line;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;

  auto add = [&](VmSpec spec, std::size_t at) {
    auto [it, inserted] = first_line.emplace(spec.id, at);
    if (!inserted)
      throw ConflictError(
          fmt::format("{}:{}: duplicate vm id '{}' (first seen on line {})", source, at, spec.id, it->second));
    specs.push_back(std::move(spec));
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_skippable(line)) continue;
    std::map<std::string, std::string, std::less<>> fields;
    if (format == CatalogFormat::csv) {
      auto cells = detail::split_csv(line);
      if (header.empty()) {
        header = std::move(cells);
        for (auto name : kFields)
          if (std::find(header.begin(), header.end(), name) == header.end())
            throw ParseError(source, line_no, std::string(name), "missing from header");
        continue;
      }
      if (cells.size() != header.size())
        throw ParseError(source, line_no, "*",
                         fmt::format("expected {} columns, found {}", header.size(), cells.size()));
      for (std::size_t i = 0; i < header.size(); ++i) fields[header[i]] = cells[i];
    } else {
      nlohmann::json record;
      try {
        record = nlohmann::json::parse(line);
      } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(source, line_no, "*", e.what());
      }
      if (!record.is_object()) throw ParseError(source, line_no, "*", "record is not a JSON object");
      for (auto it = record.begin(); it != record.end(); ++it) fields[it.key()] = json_field_text(it.value());
    }
    add(spec_from_fields(fields, source, line_no), line_no);
  }
  return Catalog::from_specs(std::move(specs));
}

Catalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(fmt::format("cannot open catalog '{}'", path.string()));
  const auto ext = path.extension().string();
  const auto format = (ext == ".jsonl" || ext == ".json") ? CatalogFormat::jsonl : CatalogFormat::csv;
  return load_catalog(in, format, path.string());
}

void write_catalog_csv(std::ostream& out, const Catalog& catalog) {
  out << "id,instance_type,zone,region,family,cpu_capacity,mem_capacity,on_demand_price\n";
  for (const auto& s : catalog)
    out << fmt::format("{},{},{},{},{},{},{},{}\n", s.id, s.instance_type, s.zone, s.region, to_string(s.family),
                       s.cpu_capacity, s.mem_capacity, s.on_demand_price);
}

std::vector<const VmSpec*> filter_candidates(const Catalog& catalog, const ResourceRequirement& req,
                                             const CompositionScope& scope) {
  validate(req);
  std::vector<const VmSpec*> out;
  for (const auto& s : catalog)
    if (req.satisfied_by(s) && scope.matches(s)) out.push_back(&s);
  return out;
}

std::vector<std::string> filter_candidate_ids(const Catalog& catalog, const ResourceRequirement& req,
                                              const CompositionScope& scope) {
  std::vector<std::string> ids;
  for (const auto* s : filter_candidates(catalog, req, scope)) ids.push_back(s->id);
  return ids;
}

}  // namespace spotindex
