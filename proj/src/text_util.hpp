#pragma once

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/tokenizer.hpp>

namespace spotindex::detail {

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

/// RFC 4180-style field split (double-quoted fields, backslash escapes off).
inline std::vector<std::string> split_csv(std::string_view line) {
  using Sep = boost::escaped_list_separator<char>;
  const std::string owned(line);
  boost::tokenizer<Sep> tok(owned, Sep('\0', ',', '"'));
  std::vector<std::string> out;
  for (const auto& field : tok) out.emplace_back(trim(field));
  return out;
}

/// Blank lines and '#' comment lines are skipped by every reader.
inline bool is_skippable(std::string_view line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

inline std::optional<long long> parse_int(std::string_view s) {
  s = trim(s);
  long long value = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, value);
  if (ec != std::errc{} || ptr != end || s.empty()) return std::nullopt;
  return value;
}

}  // namespace spotindex::detail
