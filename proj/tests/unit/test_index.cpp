#include <cmath>
#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "spotindex/errors.hpp"
#include "spotindex/index.hpp"
#include "spotindex/synth.hpp"

using namespace spotindex;
using spotindex::testing::constant_trace;
using spotindex::testing::Gen;
using spotindex::testing::make_vm;

namespace {

// Unit-capacity specs so the normalized price equals the raw price.
Catalog unit_catalog(int n, double on_demand = 1.0) {
  std::vector<VmSpec> specs;
  for (int i = 0; i < n; ++i) specs.push_back(make_vm("v" + std::to_string(i), 1, 1, on_demand));
  return Catalog::from_specs(specs);
}

TraceSet constants(std::initializer_list<std::pair<const char*, double>> xs) {
  TraceSet ts;
  for (const auto& [id, p] : xs) ts.emplace(id, constant_trace(id, p));
  return ts;
}

}  // namespace

TEST_SUITE("index") {
  TEST_CASE("normalize") {
    CHECK(normalize(make_vm("a", 4, 16, 1), 8) == 1.0);
    CHECK(normalize(make_vm("a", 1, 1, 1), 0.37) == 0.37);
    CHECK(normalize(make_vm("m4.2xlarge", 8, 32, 40), 8.5) == 0.53125);
  }

  TEST_CASE("index is the member mean") {
    const auto cat = unit_catalog(3, 1.0);
    const std::vector<std::string> two{"v0", "v1"};
    CHECK(index_at(constants({{"v0", 0.4}, {"v1", 0.6}}), cat, two, 0) == doctest::Approx(0.5));
    const std::vector<std::string> one{"v0"};
    CHECK(index_at(constants({{"v0", 0.4}}), cat, one, 0) == 0.4);
  }

  TEST_CASE("capped members drop out of numerator and count") {
    const auto cat = unit_catalog(3, 0.1);
    const std::vector<std::string> all{"v0", "v1", "v2"};
    const auto p = index_point_at(constants({{"v0", 0.04}, {"v1", 0.06}, {"v2", 1.0}}), cat, all, 0);
    CHECK(p.n_effective == 2);
    CHECK(p.value == doctest::Approx(0.05));
    CHECK_THROWS_AS(index_at(constants({{"v0", 1.0}, {"v1", 1.0}, {"v2", 1.0}}), cat, all, 0), GapError);
  }

  TEST_CASE("missing members: skip or error") {
    const auto cat = unit_catalog(2);
    TraceSet ts{{"v0", PriceTrace("v0", {{0, 0.2}})}, {"v1", PriceTrace("v1", {{100, 0.4}})}};
    const std::vector<std::string> all{"v0", "v1"};
    CHECK(index_at(ts, cat, all, 50) == 0.2);
    CHECK(index_at(ts, cat, all, 100) == doctest::Approx(0.3));
    CHECK_THROWS_AS(index_at(ts, cat, all, 50, {MissingMember::error}), OutOfRangeError);
  }

  TEST_CASE("series over constant members") {
    const auto cat = unit_catalog(2);
    const std::vector<std::string> all{"v0", "v1"};
    const auto s = index_series(constants({{"v0", 0.4}, {"v1", 0.6}}), cat, all, 0, 300, 300);
    REQUIRE(s.samples.size() == 2);
    for (const auto& p : s.samples) {
      CHECK(p.value == doctest::Approx(0.5));
      CHECK(p.min == 0.4);
      CHECK(p.max == 0.6);
    }
    CHECK(s.find(300) != nullptr);
    CHECK(s.find(150) == nullptr);
  }

  TEST_CASE("series records gaps instead of failing") {
    const auto cat = unit_catalog(1, 0.1);
    TraceSet ts{{"v0", PriceTrace("v0", {{0, 0.05}, {300, 1.0}, {600, 0.07}})}};
    const std::vector<std::string> all{"v0"};
    const auto s = index_series(ts, cat, all, 0, 900, 300);
    CHECK(s.samples.size() == 3);
    CHECK(s.gaps == std::vector<Timestamp>{300});
    std::ostringstream out;
    write_index_csv(out, s);
    CHECK(out.str().find("timestamp,value,min,max,n_effective") != std::string::npos);
  }

  TEST_CASE("on-demand index") {
    const auto cat = Catalog::from_specs({make_vm("a", 4, 16, 0.1), make_vm("b", 1, 1, 0.01), make_vm("c", 1, 1, 0.03)});
    CHECK(on_demand_index(cat, std::vector<std::string>{"a"}) == doctest::Approx(0.0125));
    CHECK(on_demand_index(cat, std::vector<std::string>{"b", "c"}) == doctest::Approx(0.02));
    CHECK_THROWS_AS(on_demand_index(cat, std::vector<std::string>{}), Error);
    const auto r1 = Catalog::from_specs({make_vm("x", 1, 1, 0.0314)});
    const auto r2 = Catalog::from_specs({make_vm("y", 1, 1, 0.02)});
    const double ratio =
        on_demand_index(r1, std::vector<std::string>{"x"}) / on_demand_index(r2, std::vector<std::string>{"y"});
    CHECK(ratio - 1.0 == doctest::Approx(0.57));
  }

  TEST_CASE("comparisons") {
    const auto cat = unit_catalog(2);
    const std::vector<std::string> a{"v0"}, b{"v1"};
    const auto same = constants({{"v0", 0.5}, {"v1", 0.5}});
    const auto sa = index_series(same, cat, a, 0, 900, 300);
    const auto sb = index_series(same, cat, b, 0, 900, 300);
    auto r = compare_indices(sa, sb);
    CHECK(r.mean_ratio == 1.0);
    CHECK(r.inversions.empty());
    CHECK(r.overlap == 4);

    const auto cheap = constants({{"v0", 0.3}, {"v1", 0.5}});
    r = compare_indices(index_series(cheap, cat, a, 0, 900, 300), index_series(cheap, cat, b, 0, 900, 300));
    CHECK(r.discount == doctest::Approx(0.4));

    // Cheaper on spot but dearer on demand.
    r = compare_indices(index_series(cheap, cat, a, 0, 900, 300), index_series(cheap, cat, b, 0, 900, 300), 2.0, 1.0);
    REQUIRE(r.inversions.size() == 1);
    CHECK(r.inversions[0].start == 0);
    CHECK(r.inversions[0].end == 1200);

    const auto late = index_series(cheap, cat, b, 5000, 6000, 300);
    CHECK_THROWS_AS(compare_indices(sa, late), Error);
  }

  TEST_CASE("property: matches oracle, bounds, scale covariance, permutation invariance") {
    Gen g(21);
    for (int trial = 0; trial < 300; ++trial) {
      const int n = static_cast<int>(g.integer(1, 8));
      std::vector<VmSpec> specs;
      TraceSet ts, scaled;
      std::vector<std::string> ids;
      const double k = g.real(0.1, 10.0);
      for (int i = 0; i < n; ++i) {
        auto v = g.vm("m" + std::to_string(i));
        specs.push_back(v);
        ids.push_back(v.id);
        auto tr = g.trace(v.id, 0, static_cast<int>(g.integer(1, 10)), 300, 0.0, v.on_demand_price * 2);
        std::vector<PricePoint> pts(tr.points().begin(), tr.points().end());
        if (g.coin(0.2)) pts.push_back({pts.back().timestamp + 1, 10 * v.on_demand_price});
        std::vector<PricePoint> sp = pts;
        for (auto& p : sp) p.price *= k;
        ts.emplace(v.id, PriceTrace(v.id, pts));
        scaled.emplace(v.id, PriceTrace(v.id, sp));
      }
      const auto cat = Catalog::from_specs(specs);
      auto shuffled = ids;
      std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
      for (int q = 0; q < 10; ++q) {
        const Timestamp t = g.integer(0, 3000);
        const auto expect = oracle::index(ts, cat, ids, t);
        if (!expect) {
          CHECK_THROWS_AS(index_point_at(ts, cat, ids, t), GapError);
          continue;
        }
        const auto p = index_point_at(ts, cat, ids, t);
        CHECK(spotindex::testing::close_rel(p.value, expect->value, 1e-12));
        CHECK(p.n_effective == expect->n);
        CHECK(p.min <= p.value * (1 + 1e-12));
        CHECK(p.value <= p.max * (1 + 1e-12));
        CHECK(spotindex::testing::close_rel(index_at(ts, cat, shuffled, t), p.value, 1e-12));
        // Capped members of the scaled set are no longer at the cap, so compare
        // only instants where nothing is capped.
        if (expect->n == static_cast<std::size_t>(n) && k != 1.0 && oracle::index(scaled, cat, ids, t)->n == expect->n)
          CHECK(spotindex::testing::close_rel(index_at(scaled, cat, ids, t), k * p.value, 1e-12));
      }
    }
  }

  TEST_CASE("aggregation shrinks dispersion") {
    auto stdev_for = [](int n, std::uint64_t seed) {
      std::vector<SynthMarketSpec> specs;
      std::vector<VmSpec> vms;
      std::vector<std::string> ids;
      for (int i = 0; i < n; ++i) {
        SynthMarketSpec s;
        s.vm_id = "m" + std::to_string(i);
        s.mean = 6.5;
        s.stddev = 1.0;
        specs.push_back(s);
        vms.push_back(make_vm(s.vm_id, 1, 1, 100));
        ids.push_back(s.vm_id);
      }
      const auto ts = generate_market_suite(specs, seed);
      const auto cat = Catalog::from_specs(vms);
      const auto series = index_series(ts, cat, ids, 0, 3540, 60);
      double m = 0, ss = 0;
      for (const auto& p : series.samples) m += p.value;
      m /= static_cast<double>(series.samples.size());
      for (const auto& p : series.samples) ss += (p.value - m) * (p.value - m);
      return std::sqrt(ss / static_cast<double>(series.samples.size()));
    };
    CHECK(stdev_for(16, 3) < stdev_for(1, 3));
    CHECK(stdev_for(4, 4) < stdev_for(1, 4));
  }
}
