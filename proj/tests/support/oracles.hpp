#pragma once

// Brute-force reference implementations. They share no code with the
// library beyond plain data types.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spotindex/catalog.hpp"
#include "spotindex/policies.hpp"
#include "spotindex/prices.hpp"
#include "spotindex/simulator.hpp"

namespace spotindex::oracle {

/// Linear scan for the latest point at or before t.
inline std::optional<double> scan_price(const PriceTrace& trace, Timestamp t) {
  std::optional<double> out;
  for (const auto& p : trace.points())
    if (p.timestamp <= t) out = p.price;
  return out;
}

inline double normalized(double price, double cpu, double mem) { return price / (std::sqrt(cpu) * std::sqrt(mem)); }

inline bool capped(double price, double on_demand) {
  const double cap = 10.0 * on_demand;
  return std::fabs(price - cap) <= 1e-9 * cap;
}

struct IndexSample {
  double value = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t n = 0;
};

inline std::optional<IndexSample> index(const TraceSet& traces, const Catalog& catalog,
                                        const std::vector<std::string>& members, Timestamp t) {
  long double sum = 0.0L;
  IndexSample s;
  for (const auto& id : members) {
    const VmSpec* spec = nullptr;
    for (const auto& v : catalog.specs())
      if (v.id == id) spec = &v;
    if (!spec) continue;
    const auto it = traces.find(id);
    if (it == traces.end()) continue;
    const auto p = scan_price(it->second, t);
    if (!p || capped(*p, spec->on_demand_price)) continue;
    const double x = normalized(*p, spec->cpu_capacity, spec->mem_capacity);
    s.lo = s.n == 0 ? x : std::min(s.lo, x);
    s.hi = s.n == 0 ? x : std::max(s.hi, x);
    sum += x;
    ++s.n;
  }
  if (s.n == 0) return std::nullopt;
  s.value = static_cast<double>(sum / static_cast<long double>(s.n));
  return s;
}

/// Riemann sum over [t1, t2) with the index recomputed at every grid instant.
/// Also returns the gross size of both sides for tolerance scaling.
inline std::pair<double, double> gain(const TraceSet& traces, const Catalog& catalog,
                                      const std::vector<std::string>& members, const VmSpec& vm, Timestamp t1,
                                      Timestamp t2, Seconds period) {
  long double total = 0.0L, magnitude = 0.0L;
  const double scale = std::sqrt(vm.cpu_capacity) * std::sqrt(vm.mem_capacity);
  for (Timestamp t = t1; t < t2; t += period) {
    const auto idx = index(traces, catalog, members, t);
    const auto p = scan_price(traces.at(vm.id), t);
    if (!idx || !p) throw std::out_of_range("oracle gain: missing sample");
    const long double term =
        (static_cast<long double>(idx->value) * scale - *p) * static_cast<long double>(period) / 3600.0L;
    total += term;
    magnitude += (std::fabs(static_cast<long double>(idx->value) * scale) + std::fabs(*p)) *
                 static_cast<long double>(period) / 3600.0L;
  }
  return {static_cast<double>(total), static_cast<double>(magnitude)};
}

inline double migration_loss(double a, double b, double seconds) {
  return static_cast<double>((static_cast<long double>(a) + b) * seconds / 3600.0L);
}

inline bool should_migrate(double index_value, double src, double dst) { return index_value > src + 2.0 * dst; }

inline double utilized(double price, double cpu_used, double mem_used, double cpu_capacity) {
  const double cpu = std::max(cpu_used, 0.05 * cpu_capacity);
  const double mem = std::max(mem_used, 0.05);
  return price / (std::sqrt(cpu) * std::sqrt(mem));
}

inline double sharpe(double index_value, double p_breve, double sigma) {
  return (index_value - p_breve) / (sigma > 1e-9 ? sigma : 1e-9);
}

/// Two-pass population mean and std over samples at t, t-step, ... inside the window.
inline std::pair<double, double> volatility(const PriceTrace& trace, const VmSpec& spec, double cpu_used,
                                            double mem_used, Timestamp t, Seconds window, Seconds step) {
  std::vector<long double> xs;
  for (Seconds k = 0; k * step < window; ++k)
    if (auto p = scan_price(trace, t - k * step)) xs.push_back(utilized(*p, cpu_used, mem_used, spec.cpu_capacity));
  if (xs.empty()) return {0.0, 0.0};
  long double mean = 0.0L;
  for (auto x : xs) mean += x;
  mean /= static_cast<long double>(xs.size());
  long double ss = 0.0L;
  for (auto x : xs) ss += (x - mean) * (x - mean);
  return {static_cast<double>(mean), static_cast<double>(std::sqrt(ss / static_cast<long double>(xs.size())))};
}

/// Balanced decision written out directly: stay while the current candidate
/// holds the maximum score; otherwise migrate to the best-scoring candidate
/// (smallest id on ties) only if the sufficiency inequality holds.
inline std::optional<std::string> balanced(const std::string& current, const std::vector<CandidateQuote>& quotes,
                                           double index_value) {
  double best = -INFINITY, cur = 0.0;
  for (const auto& q : quotes) {
    const double s = sharpe(index_value, q.p_breve_mean, q.sigma);
    best = std::max(best, s);
    if (q.vm_id == current) cur = s;
  }
  if (cur >= best - 1e-12 * std::max(1.0, std::fabs(best))) return std::nullopt;
  std::string target;
  for (const auto& q : quotes)
    if (sharpe(index_value, q.p_breve_mean, q.sigma) == best && (target.empty() || q.vm_id < target)) target = q.vm_id;
  const CandidateQuote *src = nullptr, *dst = nullptr;
  for (const auto& q : quotes) {
    if (q.vm_id == current) src = &q;
    if (q.vm_id == target) dst = &q;
  }
  if (!should_migrate(index_value, src->p_hat, dst->p_hat)) return std::nullopt;
  return target;
}

/// Total cost rebuilt second by second from the acquire/release events.
inline double replayed_cost(const SimReport& report, const TraceSet& traces) {
  std::multimap<std::pair<int, std::string>, Timestamp> open;
  long double total = 0.0L;
  auto bill = [&](const std::string& vm, Timestamp from, Timestamp to) {
    const auto pts = traces.at(vm).points();
    std::size_t i = 0;
    for (Timestamp s = from; s < to; ++s) {
      while (i + 1 < pts.size() && pts[i + 1].timestamp <= s) ++i;
      if (pts[i].timestamp > s) throw std::out_of_range("replay before trace start");
      total += pts[i].price / 3600.0L;
    }
  };
  for (const auto& e : report.events) {
    if (e.kind == "acquire") open.emplace(std::pair{e.task, e.vm_id}, e.t);
    if (e.kind == "release") {
      auto it = open.find({e.task, e.vm_id});
      if (it == open.end()) throw std::logic_error("release without acquire");
      bill(e.vm_id, it->second, e.t);
      open.erase(it);
    }
  }
  for (const auto& [key, from] : open) bill(key.second, from, report.end);
  return static_cast<double>(total);
}

}  // namespace spotindex::oracle
