#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spotindex/catalog.hpp"
#include "spotindex/prices.hpp"

namespace spotindex {

struct UtilizationSample {
  Timestamp timestamp = 0;
  double cpu_used = 0.0;
  double mem_used = 0.0;
};

inline constexpr double kCpuFloorFraction = 0.05;
inline constexpr double kMemFloorGb = 0.05;
inline constexpr double kSigmaFloor = 1e-9;

/// Raises usage to at least 5% of the VM's CPU capacity and 0.05 GB.
UtilizationSample floor_utilization(const UtilizationSample& util, const VmSpec& spec);

/// Price per unit of sqrt(cpu_used * mem_used). Throws InvariantError on
/// non-positive usage; apply floor_utilization first.
double utilized_price(double price, const UtilizationSample& util);

/// (index - p_breve) / max(sigma, 1e-9).
double sharpe_score(double index_value, double p_breve, double sigma);

struct VolatilityEstimate {
  std::string vm_id;
  Seconds window = 0;
  double sigma = 0.0;
  double mean = 0.0;
  std::size_t samples = 0;
};

/// Population std and mean of the utilized price sampled at t, t-step, ...
/// over the trailing window. Instants before the trace starts are skipped.
VolatilityEstimate estimate_volatility(const PriceTrace& trace, const VmSpec& spec, const UtilizationSample& util,
                                       Timestamp t, Seconds window, Seconds step);

enum class PolicyKind { static_placement, cost_centric, availability_aware, balanced };
enum class Sufficiency { gated, off };
enum class BalancedTarget { argmax, any };

std::string_view to_string(PolicyKind kind);
/// Accepts static, cost, cost_centric, avail, availability_aware, balanced.
PolicyKind policy_kind_from_string(std::string_view name);
std::string_view to_string(Sufficiency s);
Sufficiency sufficiency_from_string(std::string_view name);
std::string_view to_string(BalancedTarget t);
BalancedTarget balanced_target_from_string(std::string_view name);

struct PolicyParams {
  Seconds sigma_window = 3600;
  Seconds sigma_step = 300;
  /// Cost-centric expected-benefit horizon.
  Seconds horizon = 3600;
  Sufficiency sufficiency = Sufficiency::gated;
  BalancedTarget target = BalancedTarget::argmax;
};

/// Everything a policy sees about one candidate at a decision instant.
struct CandidateQuote {
  std::string vm_id;
  double price = 0.0;
  /// Capacity-normalized price.
  double p_hat = 0.0;
  /// Utilization-normalized price now.
  double p_breve = 0.0;
  /// Utilization-normalized price averaged over the volatility window.
  double p_breve_mean = 0.0;
  double sigma = 0.0;
};

CandidateQuote make_quote(const VmSpec& spec, const PriceTrace& trace, const UtilizationSample& util, Timestamp t,
                          const PolicyParams& params);

enum class Action { stay, migrate };

struct PolicyDecision {
  Action action = Action::stay;
  std::string target;
  std::string reason;
  /// Per-candidate ranking value (p_breve, sigma or Sharpe score).
  std::vector<std::pair<std::string, double>> scores;

  bool migrates() const noexcept { return action == Action::migrate; }
};

/// Argmin of window-mean utilized price. Ties go to the smallest vm_id.
std::string policy_static(std::span<const CandidateQuote> candidates);

PolicyDecision policy_cost_centric(std::string_view current, std::span<const CandidateQuote> candidates,
                                   Seconds migration_seconds, Seconds horizon);

/// Throws PolicyError when the current VM is above the index and no candidate is below it.
PolicyDecision policy_availability_aware(std::string_view current, std::span<const CandidateQuote> candidates,
                                         double index_value);

PolicyDecision policy_balanced(std::string_view current, std::span<const CandidateQuote> candidates,
                               double index_value, const PolicyParams& params = {});

/// Periodic re-evaluation for a VM currently held. The static policy always stays.
PolicyDecision decide(PolicyKind kind, std::string_view current, std::span<const CandidateQuote> candidates,
                      double index_value, Seconds migration_seconds, const PolicyParams& params);

/// Fresh placement (job start, after a revocation, or when the held VM no
/// longer fits the workload). The availability-aware policy picks among
/// candidates at or below the index.
std::string select_vm(PolicyKind kind, std::span<const CandidateQuote> candidates, double index_value,
                      const PolicyParams& params);

}  // namespace spotindex
