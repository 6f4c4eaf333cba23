#include <algorithm>

#include "doctest.h"
#include "fixtures.hpp"
#include "oracles.hpp"
#include "spotindex/errors.hpp"
#include "spotindex/index.hpp"
#include "spotindex/policies.hpp"
#include "spotindex/tracking.hpp"

using namespace spotindex;
using spotindex::testing::close_rel;
using spotindex::testing::Gen;
using spotindex::testing::make_vm;

namespace {

CandidateQuote quote(std::string id, double p_breve, double sigma, double p_hat = 0.0, double price = 0.0) {
  CandidateQuote q;
  q.vm_id = std::move(id);
  q.p_breve = p_breve;
  q.p_breve_mean = p_breve;
  q.sigma = sigma;
  q.p_hat = p_hat;
  q.price = price;
  return q;
}

}  // namespace

TEST_SUITE("policies") {
  TEST_CASE("utilized price") {
    CHECK(utilized_price(8, {0, 4, 16}) == 1.0);
    CHECK(utilized_price(8, {0, 2, 8}) == 2.0);
    CHECK(utilized_price(8, {0, 1, 1}) == 8.0);
    CHECK_THROWS_AS(utilized_price(8, {0, 0, 1}), InvariantError);
    const auto f = floor_utilization({0, 0, 0}, make_vm("a", 8, 32, 1));
    CHECK(f.cpu_used == doctest::Approx(0.4));
    CHECK(f.mem_used == doctest::Approx(0.05));
  }

  TEST_CASE("sharpe score and floor") {
    CHECK(sharpe_score(0.5, 0.3, 0.1) == doctest::Approx(2.0));
    CHECK(sharpe_score(0.5, 0.2, 0.2) == doctest::Approx(1.5));
    CHECK(sharpe_score(0.5, 0.4, 0.0) == doctest::Approx(0.1 / 1e-9));
  }

  TEST_CASE("volatility window") {
    const auto spec = make_vm("a", 1, 1, 10);
    const PriceTrace tr("a", {{0, 1.0}, {300, 3.0}});
    const auto v = estimate_volatility(tr, spec, {0, 1, 1}, 300, 3600, 300);
    CHECK(v.samples == 2);
    CHECK(v.mean == doctest::Approx(2.0));
    CHECK(v.sigma == doctest::Approx(1.0));
  }

  TEST_CASE("static picks the cheapest mean, smallest id on ties") {
    std::vector<CandidateQuote> qs{quote("b", 1.0, 0), quote("a", 0.9, 0)};
    CHECK(policy_static(qs) == "a");
    CHECK(policy_static(std::vector<CandidateQuote>{quote("z", 3, 0)}) == "z");
    CHECK(policy_static(std::vector<CandidateQuote>{quote("b", 1, 0), quote("a", 1, 0), quote("c", 1, 0)}) == "a");
    CHECK_THROWS_AS(policy_static(std::vector<CandidateQuote>{}), PolicyError);
  }

  TEST_CASE("cost-centric") {
    std::vector<CandidateQuote> qs{quote("cur", 2.0, 0, 0, 2.0), quote("best", 1.0, 0, 0, 1.0)};
    auto d = policy_cost_centric("cur", qs, 0, 3600);
    CHECK(d.migrates());
    CHECK(d.target == "best");
    CHECK(!policy_cost_centric("best", qs, 0, 3600).migrates());
    // Saving 0.001/h over an hour cannot pay for a 30 s double-pay.
    std::vector<CandidateQuote> close{quote("cur", 1.001, 0, 0, 1.001), quote("best", 1.0, 0, 0, 1.0)};
    d = policy_cost_centric("cur", close, 30, 3600);
    CHECK(!d.migrates());
    CHECK((1.001 - 1.0) < migration_loss(1.001, 1.0, 30));
  }

  TEST_CASE("availability-aware") {
    std::vector<CandidateQuote> qs{quote("cur", 0, 0.1, 0.4), quote("cheap", 0, 0.5, 0.1)};
    CHECK(!policy_availability_aware("cur", qs, 0.5).migrates());
    std::vector<CandidateQuote> above{quote("cur", 0, 0.1, 0.9), quote("x", 0, 0.5, 0.2), quote("y", 0, 0.2, 0.3),
                                      quote("z", 0, 0.01, 0.8)};
    const auto d = policy_availability_aware("cur", above, 0.5);
    CHECK(d.migrates());
    CHECK(d.target == "y");
    std::vector<CandidateQuote> none{quote("cur", 0, 0.1, 0.9), quote("x", 0, 0.5, 0.7)};
    CHECK_THROWS_AS(policy_availability_aware("cur", none, 0.5), PolicyError);
  }

  TEST_CASE("a composition always has a member at or below its index") {
    Gen g(2);
    for (int trial = 0; trial < 200; ++trial) {
      const double a = g.real(0, 1), b = g.real(0, 1), c = g.real(0, 1);
      const double index = (a + b + c) / 3;
      CHECK(std::min({a, b, c}) <= index);
    }
  }

  TEST_CASE("balanced") {
    std::vector<CandidateQuote> qs{quote("cur", 0.3, 0.1, 0.3), quote("rival", 0.2, 0.2, 0.2)};
    auto d = policy_balanced("cur", qs, 0.5);
    CHECK(!d.migrates());
    CHECK(d.scores.size() == 2);

    std::vector<CandidateQuote> lose{quote("cur", 0.45, 0.1, 0.45), quote("rival", 0.1, 0.01, 0.1)};
    d = policy_balanced("cur", lose, 0.5);
    CHECK(!d.migrates());
    CHECK(d.reason == "sufficiency condition");
    PolicyParams off;
    off.sufficiency = Sufficiency::off;
    CHECK(policy_balanced("cur", lose, 0.5, off).migrates());

    std::vector<CandidateQuote> win{quote("cur", 0.45, 0.1, 0.1), quote("rival", 0.1, 0.01, 0.1)};
    d = policy_balanced("cur", win, 0.5);
    CHECK(d.migrates());
    CHECK(d.target == "rival");
  }

  TEST_CASE("equal sigmas: argmax score is argmin utilized price") {
    Gen g(3);
    for (int trial = 0; trial < 200; ++trial) {
      std::vector<CandidateQuote> qs;
      const int n = static_cast<int>(g.integer(1, 6));
      for (int i = 0; i < n; ++i) qs.push_back(quote("v" + std::to_string(i), g.real(0, 2), 0.3));
      const auto top = select_vm(PolicyKind::balanced, qs, 1.0, {});
      const auto cheapest = select_vm(PolicyKind::cost_centric, qs, 1.0, {});
      CHECK(top == cheapest);
    }
  }

  TEST_CASE("property: balanced matches the brute-force decision on every small instance") {
    // Exhaustive over a small grid of values for three candidates.
    const std::vector<double> prices{0.05, 0.2, 0.35};
    const std::vector<double> sigmas{0.0, 0.1, 0.3};
    const std::vector<double> indices{0.2, 0.5, 1.2};
    std::size_t checked = 0;
    for (double index : indices)
      for (double p0 : prices)
        for (double p1 : prices)
          for (double p2 : prices)
            for (double s0 : sigmas)
              for (double s1 : sigmas)
                for (double s2 : sigmas) {
                  std::vector<CandidateQuote> qs{quote("a", p0, s0, p0 / 2), quote("b", p1, s1, p1 / 2),
                                                 quote("c", p2, s2, p2 / 2)};
                  for (const auto* cur : {"a", "b", "c"}) {
                    const auto d = policy_balanced(cur, qs, index);
                    const auto expect = oracle::balanced(cur, qs, index);
                    REQUIRE(d.migrates() == expect.has_value());
                    if (expect) CHECK(d.target == *expect);
                    if (d.migrates()) {
                      const auto& src = *std::find_if(qs.begin(), qs.end(), [&](auto& q) { return q.vm_id == cur; });
                      const auto& dst =
                          *std::find_if(qs.begin(), qs.end(), [&](auto& q) { return q.vm_id == d.target; });
                      CHECK(should_migrate(index, src.p_hat, dst.p_hat));
                      CHECK(d.target != cur);
                    }
                    ++checked;
                  }
                }
    CHECK(checked == 3 * 27 * 27 * 3);
  }

  TEST_CASE("property: selection is scale invariant and scores shift invariant") {
    Gen g(4);
    for (int trial = 0; trial < 300; ++trial) {
      std::vector<CandidateQuote> qs, scaled, shifted;
      const int n = static_cast<int>(g.integer(2, 6));
      const double k = g.real(0.1, 10), c = g.real(-1, 1), index = g.real(0.1, 1.0);
      for (int i = 0; i < n; ++i) {
        const auto id = "v" + std::to_string(i);
        const double pb = g.real(0.01, 1.5), sg = g.real(0.01, 0.5), ph = g.real(0.01, 1.5);
        qs.push_back(quote(id, pb, sg, ph, pb));
        scaled.push_back(quote(id, k * pb, k * sg, k * ph, k * pb));
        shifted.push_back(quote(id, pb + c, sg, ph, pb));
      }
      for (auto kind : {PolicyKind::static_placement, PolicyKind::cost_centric, PolicyKind::balanced})
        CHECK(select_vm(kind, qs, index, {}) == select_vm(kind, scaled, k * index, {}));
      const auto& cur = qs[0].vm_id;
      const auto a = policy_balanced(cur, qs, index), b = policy_balanced(cur, scaled, k * index);
      CHECK(a.migrates() == b.migrates());
      CHECK(a.target == b.target);
      CHECK(policy_cost_centric(cur, qs, 0, 3600).target == policy_cost_centric(cur, scaled, 0, 3600).target);
      if (std::any_of(qs.begin(), qs.end(), [&](auto& q) { return q.p_hat < index; })) {
        const auto x = policy_availability_aware(cur, qs, index);
        const auto y = policy_availability_aware(cur, scaled, k * index);
        CHECK(x.target == y.target);
        if (qs[0].p_hat <= index) CHECK(!x.migrates());
      }
      for (std::size_t i = 0; i < qs.size(); ++i)
        CHECK(close_rel(sharpe_score(index, qs[i].p_breve, qs[i].sigma),
                        sharpe_score(index + c, shifted[i].p_breve, shifted[i].sigma), 1e-9,
                        (std::fabs(index) + std::fabs(c) + 2) / qs[i].sigma));
    }
  }

  TEST_CASE("names") {
    CHECK(policy_kind_from_string("avail") == PolicyKind::availability_aware);
    CHECK(policy_kind_from_string("cost-centric") == PolicyKind::cost_centric);
    CHECK(to_string(PolicyKind::static_placement) == "static");
    CHECK_THROWS_AS(policy_kind_from_string("greedy"), Error);
    CHECK(sufficiency_from_string("off") == Sufficiency::off);
    CHECK(balanced_target_from_string("any") == BalancedTarget::any);
  }
}
