#include "spotindex/policies.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "spotindex/errors.hpp"
#include "spotindex/index.hpp"
#include "spotindex/tracking.hpp"

namespace spotindex {

UtilizationSample floor_utilization(const UtilizationSample& util, const VmSpec& spec) {
  UtilizationSample out = util;
  out.cpu_used = std::max(util.cpu_used, kCpuFloorFraction * spec.cpu_capacity);
  out.mem_used = std::max(util.mem_used, kMemFloorGb);
  return out;
}

double utilized_price(double price, const UtilizationSample& util) {
  if (!(util.cpu_used > 0.0) || !(util.mem_used > 0.0) || !std::isfinite(util.cpu_used) ||
      !std::isfinite(util.mem_used))
    throw InvariantError(fmt::format("utilization must be positive and finite (cpu={}, mem={})", util.cpu_used,
                                     util.mem_used));
  return price / std::sqrt(util.cpu_used * util.mem_used);
}

double sharpe_score(double index_value, double p_breve, double sigma) {
  return (index_value - p_breve) / std::max(sigma, kSigmaFloor);
}

VolatilityEstimate estimate_volatility(const PriceTrace& trace, const VmSpec& spec, const UtilizationSample& util,
                                       Timestamp t, Seconds window, Seconds step) {
  if (window <= 0 || step <= 0)
    throw Error(fmt::format("volatility window and step must be > 0 (got {}, {})", window, step));
  const auto floored = floor_utilization(util, spec);
  std::vector<double> xs;
  for (Seconds back = 0; back < window; back += step)
    if (auto p = trace.try_price_at(t - back)) xs.push_back(utilized_price(*p, floored));
  VolatilityEstimate est;
  est.vm_id = spec.id;
  est.window = window;
  est.samples = xs.size();
  if (xs.empty()) return est;
  double sum = 0.0;
  for (double x : xs) sum += x;
  est.mean = sum / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - est.mean) * (x - est.mean);
  est.sigma = std::sqrt(ss / static_cast<double>(xs.size()));
  return est;
}

namespace {

struct Named {
  PolicyKind kind;
  std::string_view name;
};

constexpr Named kPolicyNames[] = {
    {PolicyKind::static_placement, "static"},
    {PolicyKind::cost_centric, "cost"},
    {PolicyKind::availability_aware, "avail"},
    {PolicyKind::balanced, "balanced"},
};

const CandidateQuote* find_quote(std::span<const CandidateQuote> quotes, std::string_view id) {
  for (const auto& q : quotes)
    if (q.vm_id == id) return &q;
  return nullptr;
}

const CandidateQuote& require_current(std::span<const CandidateQuote> quotes, std::string_view current) {
  if (const auto* q = find_quote(quotes, current)) return *q;
  throw PolicyError(fmt::format("current vm '{}' is not among the candidates", current));
}

/// Best by key with ties broken on the smallest vm_id. `better(a, b)` is a strict order on keys.
template <typename Key, typename Better>
const CandidateQuote* best_by(std::span<const CandidateQuote> quotes, Key key, Better better) {
  const CandidateQuote* best = nullptr;
  for (const auto& q : quotes) {
    if (!best) {
      best = &q;
      continue;
    }
    const double kq = key(q), kb = key(*best);
    if (better(kq, kb) || (!better(kb, kq) && q.vm_id < best->vm_id)) best = &q;
  }
  return best;
}

const CandidateQuote* argmin(std::span<const CandidateQuote> quotes, auto key) {
  return best_by(quotes, key, std::less<double>{});
}

const CandidateQuote* argmax(std::span<const CandidateQuote> quotes, auto key) {
  return best_by(quotes, key, std::greater<double>{});
}

void require_nonempty(std::span<const CandidateQuote> quotes) {
  if (quotes.empty()) throw PolicyError("no candidate VM available");
}

bool ties_max(double value, double max) { return value >= max - 1e-12 * std::max(1.0, std::abs(max)); }

std::vector<std::pair<std::string, double>> scores_of(std::span<const CandidateQuote> quotes, auto key) {
  std::vector<std::pair<std::string, double>> out;
  out.reserve(quotes.size());
  for (const auto& q : quotes) out.emplace_back(q.vm_id, key(q));
  return out;
}

double sharpe_of(const CandidateQuote& q, double index_value) {
  return sharpe_score(index_value, q.p_breve_mean, q.sigma);
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  for (const auto& n : kPolicyNames)
    if (n.kind == kind) return n.name;
  return "static";
}

PolicyKind policy_kind_from_string(std::string_view name) {
  for (const auto& n : kPolicyNames)
    if (n.name == name) return n.kind;
  if (name == "cost_centric" || name == "cost-centric") return PolicyKind::cost_centric;
  if (name == "availability_aware" || name == "availability-aware") return PolicyKind::availability_aware;
  throw Error(fmt::format("unknown policy '{}' (expected static, cost, avail or balanced)", name));
}

std::string_view to_string(Sufficiency s) { return s == Sufficiency::gated ? "eq5" : "off"; }

Sufficiency sufficiency_from_string(std::string_view name) {
  if (name == "eq5") return Sufficiency::gated;
  if (name == "off") return Sufficiency::off;
  throw Error(fmt::format("unknown sufficiency mode '{}' (expected eq5 or off)", name));
}

std::string_view to_string(BalancedTarget t) { return t == BalancedTarget::argmax ? "argmax" : "any"; }

BalancedTarget balanced_target_from_string(std::string_view name) {
  if (name == "argmax") return BalancedTarget::argmax;
  if (name == "any") return BalancedTarget::any;
  throw Error(fmt::format("unknown balanced target mode '{}' (expected argmax or any)", name));
}

CandidateQuote make_quote(const VmSpec& spec, const PriceTrace& trace, const UtilizationSample& util, Timestamp t,
                          const PolicyParams& params) {
  CandidateQuote q;
  q.vm_id = spec.id;
  q.price = trace.price_at(t);
  q.p_hat = normalize(spec, q.price);
  q.p_breve = utilized_price(q.price, floor_utilization(util, spec));
  const auto vol = estimate_volatility(trace, spec, util, t, params.sigma_window, params.sigma_step);
  q.p_breve_mean = vol.samples ? vol.mean : q.p_breve;
  q.sigma = vol.sigma;
  return q;
}

std::string policy_static(std::span<const CandidateQuote> candidates) {
  require_nonempty(candidates);
  return argmin(candidates, [](const CandidateQuote& q) { return q.p_breve_mean; })->vm_id;
}

PolicyDecision policy_cost_centric(std::string_view current, std::span<const CandidateQuote> candidates,
                                   Seconds migration_seconds, Seconds horizon) {
  const auto& cur = require_current(candidates, current);
  PolicyDecision d;
  d.scores = scores_of(candidates, [](const CandidateQuote& q) { return q.p_breve; });
  const auto* best = argmin(candidates, [](const CandidateQuote& q) { return q.p_breve; });
  if (best->vm_id == cur.vm_id) {
    d.reason = "current is cheapest";
    return d;
  }
  const double savings = (cur.price - best->price) * static_cast<double>(horizon) / 3600.0;
  const double loss = migration_loss(cur.price, best->price, static_cast<double>(migration_seconds));
  if (savings > loss) {
    d.action = Action::migrate;
    d.target = best->vm_id;
    d.reason = fmt::format("savings {} over horizon exceed migration loss {}", savings, loss);
  } else {
    d.reason = fmt::format("savings {} do not cover migration loss {}", savings, loss);
  }
  return d;
}

PolicyDecision policy_availability_aware(std::string_view current, std::span<const CandidateQuote> candidates,
                                         double index_value) {
  const auto& cur = require_current(candidates, current);
  PolicyDecision d;
  d.scores = scores_of(candidates, [](const CandidateQuote& q) { return q.sigma; });
  if (cur.p_hat <= index_value) {
    d.reason = "current at or below index";
    return d;
  }
  std::vector<CandidateQuote> below;
  for (const auto& q : candidates)
    if (q.p_hat < index_value) below.push_back(q);
  if (below.empty())
    throw PolicyError(fmt::format(
        "index violation: no candidate below index {} (candidate set differs from the index composition)",
        index_value));
  const auto* pick = argmin(std::span<const CandidateQuote>(below), [](const CandidateQuote& q) { return q.sigma; });
  d.action = Action::migrate;
  d.target = pick->vm_id;
  d.reason = "current above index";
  return d;
}

PolicyDecision policy_balanced(std::string_view current, std::span<const CandidateQuote> candidates,
                               double index_value, const PolicyParams& params) {
  const auto& cur = require_current(candidates, current);
  PolicyDecision d;
  auto score = [index_value](const CandidateQuote& q) { return sharpe_of(q, index_value); };
  d.scores = scores_of(candidates, score);
  const auto* top = argmax(candidates, score);
  if (ties_max(score(cur), score(*top))) {
    d.reason = "current has the highest score";
    return d;
  }
  if (params.sufficiency == Sufficiency::off) {
    d.action = Action::migrate;
    d.target = top->vm_id;
    d.reason = "higher score";
    return d;
  }
  if (params.target == BalancedTarget::argmax) {
    if (should_migrate(index_value, cur.p_hat, top->p_hat)) {
      d.action = Action::migrate;
      d.target = top->vm_id;
      d.reason = "higher score and sufficiency condition holds";
    } else {
      d.reason = "sufficiency condition";
    }
    return d;
  }
  // Highest-scoring rival that satisfies the sufficiency condition.
  std::vector<CandidateQuote> eligible;
  for (const auto& q : candidates)
    if (q.vm_id != cur.vm_id && score(q) > score(cur) && should_migrate(index_value, cur.p_hat, q.p_hat))
      eligible.push_back(q);
  if (eligible.empty()) {
    d.reason = "sufficiency condition";
    return d;
  }
  d.action = Action::migrate;
  d.target = argmax(std::span<const CandidateQuote>(eligible), score)->vm_id;
  d.reason = "higher score and sufficiency condition holds";
  return d;
}

PolicyDecision decide(PolicyKind kind, std::string_view current, std::span<const CandidateQuote> candidates,
                      double index_value, Seconds migration_seconds, const PolicyParams& params) {
  switch (kind) {
    case PolicyKind::static_placement: {
      require_current(candidates, current);
      PolicyDecision d;
      d.reason = "static placement";
      return d;
    }
    case PolicyKind::cost_centric:
      return policy_cost_centric(current, candidates, migration_seconds, params.horizon);
    case PolicyKind::availability_aware:
      return policy_availability_aware(current, candidates, index_value);
    case PolicyKind::balanced:
      return policy_balanced(current, candidates, index_value, params);
  }
  throw PolicyError("unknown policy");
}

std::string select_vm(PolicyKind kind, std::span<const CandidateQuote> candidates, double index_value,
                      const PolicyParams&) {
  require_nonempty(candidates);
  switch (kind) {
    case PolicyKind::static_placement:
      return policy_static(candidates);
    case PolicyKind::cost_centric:
      return argmin(candidates, [](const CandidateQuote& q) { return q.p_breve; })->vm_id;
    case PolicyKind::availability_aware: {
      std::vector<CandidateQuote> below;
      for (const auto& q : candidates)
        if (q.p_hat <= index_value) below.push_back(q);
      if (below.empty())
        throw PolicyError(fmt::format(
            "index violation: no candidate below index {} (candidate set differs from the index composition)",
            index_value));
      return argmin(std::span<const CandidateQuote>(below), [](const CandidateQuote& q) { return q.sigma; })->vm_id;
    }
    case PolicyKind::balanced:
      return argmax(candidates, [index_value](const CandidateQuote& q) { return sharpe_of(q, index_value); })->vm_id;
  }
  throw PolicyError("unknown policy");
}

}  // namespace spotindex
