#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "spotindex/catalog.hpp"
#include "spotindex/index.hpp"
#include "spotindex/prices.hpp"

namespace spotindex {

/// Index-relative gain of holding `vm` over the half-open grid [t1, t2) with
/// the given step. Each sample contributes (I - P_hat) * sqrt(C*M) * period/3600.
/// Throws OutOfRangeError listing grid instants missing from the index or trace.
double gain(const IndexSeries& index, const VmSpec& vm, const PriceTrace& trace, Timestamp t1, Timestamp t2,
            Seconds period);

/// Double-pay cost of a migration lasting t_m seconds.
double migration_loss(double price_src, double price_dst, double t_m);

/// Migration sufficiency: index > p_hat_src + 2 * p_hat_dst (strict).
bool should_migrate(double index_value, double p_hat_src, double p_hat_dst);

enum class LedgerEventKind { hold_tick, migrate, revoke };

std::string_view to_string(LedgerEventKind kind);
LedgerEventKind ledger_event_kind_from_string(std::string_view name);

/// One accounting interval [t0, t1). Prices and the index are constant over it.
///  - hold_tick, productive: gain (I * scale - price) * dt / 3600
///  - hold_tick, idle (paused): loss price * dt / 3600
///  - migrate: loss (price + target_price) * dt / 3600
///  - revoke (restart on a new VM): loss price * dt / 3600
struct LedgerEvent {
  Timestamp t0 = 0;
  Timestamp t1 = 0;
  LedgerEventKind kind = LedgerEventKind::hold_tick;
  bool productive = false;
  std::string vm_id;
  std::string target_vm;
  double price = 0.0;
  double target_price = 0.0;
  double index_value = 0.0;
  double capacity_scale = 0.0;
  double gain = 0.0;
  double loss = 0.0;
};

/// Recomputes an event's gain and loss from its raw fields.
std::pair<double, double> evaluate(const LedgerEvent& event);

class TrackingLedger {
 public:
  TrackingLedger() = default;
  explicit TrackingLedger(std::string vm_id) : current_vm_(std::move(vm_id)) {}

  const std::string& current_vm() const noexcept { return current_vm_; }
  Timestamp hold_start() const noexcept { return hold_start_; }
  double accrued_gain() const noexcept { return gain_; }
  double accrued_loss() const noexcept { return loss_; }
  double net() const noexcept { return gain_ - loss_; }
  std::span<const LedgerEvent> events() const noexcept { return events_; }

  void hold(Timestamp t0, Timestamp t1, const std::string& vm_id, double price, double index_value,
            double capacity_scale);
  void idle(Timestamp t0, Timestamp t1, const std::string& vm_id, double price);
  void migrating(Timestamp t0, Timestamp t1, const std::string& src, double price_src, const std::string& dst,
                 double price_dst);
  void restarting(Timestamp t0, Timestamp t1, const std::string& vm_id, double price);

 private:
  void record(LedgerEvent event);

  std::string current_vm_;
  Timestamp hold_start_ = 0;
  double gain_ = 0.0;
  double loss_ = 0.0;
  std::vector<LedgerEvent> events_;
};

/// Net gain rebuilt from raw event fields in log order.
double replay_net(std::span<const LedgerEvent> events);

void write_ledger_jsonl(std::ostream& out, std::span<const LedgerEvent> events, int task = 0);

}  // namespace spotindex
