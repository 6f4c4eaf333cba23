#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spotindex/catalog.hpp"
#include "spotindex/prices.hpp"
#include "spotindex/simulator.hpp"
#include "spotindex/synth.hpp"

namespace spotindex::testing {

inline VmSpec make_vm(std::string id, double cpu, double mem, double on_demand, std::string zone = "us-east-1a",
                      std::string region = "us-east-1", Family family = Family::general) {
  VmSpec s;
  s.instance_type = id;
  s.id = std::move(id);
  s.zone = std::move(zone);
  s.region = std::move(region);
  s.family = family;
  s.cpu_capacity = cpu;
  s.mem_capacity = mem;
  s.on_demand_price = on_demand;
  return s;
}

/// The four synthetic markets of the baseline experiment.
inline Catalog market_catalog() {
  return Catalog::from_specs({
      make_vm("m4.large", 2, 8, 10),
      make_vm("m4.2xlarge", 8, 32, 40),
      make_vm("c4.2xlarge", 8, 16, 39.8, "us-east-1a", "us-east-1", Family::compute),
      make_vm("r4.xlarge", 4, 30.5, 26.6, "us-east-1a", "us-east-1", Family::memory),
  });
}

inline std::vector<SynthMarketSpec> market_specs(double volatility_scale = 1.0, Seconds duration = 14400) {
  struct Row {
    const char* id;
    double mean, stddev;
  };
  const Row rows[] = {{"m4.large", 4.5, 0.5}, {"m4.2xlarge", 8.5, 0.5}, {"c4.2xlarge", 6.5, 1.0}, {"r4.xlarge", 6.5, 1.1}};
  std::vector<SynthMarketSpec> out;
  for (const auto& r : rows) {
    SynthMarketSpec s;
    s.vm_id = r.id;
    s.mean = r.mean;
    s.stddev = r.stddev;
    s.change_period = 60;
    s.duration = duration;
    s.volatility_scale = volatility_scale;
    s.start = 3600;
    s.warmup = 3600;
    out.push_back(s);
  }
  return out;
}

/// Two-phase job; variant 1 is the baseline, 2 and 3 split each phase into
/// shorter alternating phases.
inline JobSpec market_job(int variant = 1) {
  JobSpec job;
  job.name = variant == 1 ? "baseline" : "v" + std::to_string(variant);
  const Seconds half = 1800 / variant;
  for (int i = 0; i < variant; ++i) {
    job.phases.push_back({half, 4, 16});
    job.phases.push_back({half, 2, 8});
  }
  job.requirement = {2, 8};
  job.mem_footprint = 16;
  job.reference_vm = "m4.2xlarge";
  job.start = 3600;
  return job;
}

inline PriceTrace constant_trace(const std::string& id, double price, Timestamp t0 = 0) {
  return PriceTrace(id, {{t0, price}});
}

inline PriceTrace step_trace(const std::string& id, std::vector<PricePoint> points) {
  return PriceTrace(id, std::move(points));
}

/// Small hand-rolled generator helper for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : eng_(seed) {}
  double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
  std::int64_t integer(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(eng_);
  }
  bool coin(double p = 0.5) { return real(0.0, 1.0) < p; }
  template <typename T>
  const T& pick(const std::vector<T>& xs) {
    return xs[static_cast<std::size_t>(integer(0, static_cast<std::int64_t>(xs.size()) - 1))];
  }
  std::mt19937_64& engine() { return eng_; }

  VmSpec vm(const std::string& id) {
    return make_vm(id, static_cast<double>(integer(1, 64)), real(0.5, 256.0), real(0.01, 50.0));
  }

  /// Random step trace starting at t0 with `n` points spaced 1..max_gap apart.
  PriceTrace trace(const std::string& id, Timestamp t0, int n, Seconds max_gap, double lo, double hi) {
    std::vector<PricePoint> pts;
    Timestamp t = t0;
    for (int i = 0; i < n; ++i) {
      pts.push_back({t, real(lo, hi)});
      t += integer(1, max_gap);
    }
    return PriceTrace(id, std::move(pts));
  }

 private:
  std::mt19937_64 eng_;
};

/// Relative comparison. `scale` bounds the magnitude of the terms that were
/// summed, for results that cancel towards zero.
inline bool close_rel(double a, double b, double rel, double scale = 0.0) {
  return std::fabs(a - b) <= rel * std::max({std::fabs(a), std::fabs(b), scale});
}

}  // namespace spotindex::testing
