#include "spotindex/tracking.hpp"

#include <ostream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include "json.hpp"

#include "spotindex/errors.hpp"

namespace spotindex {

double gain(const IndexSeries& index, const VmSpec& vm, const PriceTrace& trace, Timestamp t1, Timestamp t2,
            Seconds period) {
  if (period <= 0) throw Error(fmt::format("gain period must be > 0 (got {})", period));
  if (t2 <= t1) throw Error(fmt::format("gain interval [{}, {}) is empty", t1, t2));
  const double scale = vm.capacity_scale();
  const double weight = static_cast<double>(period) / 3600.0;
  double total = 0.0;
  std::vector<Timestamp> missing;
  for (Timestamp t = t1; t < t2; t += period) {
    const IndexPoint* point = index.find(t);
    const auto price = trace.try_price_at(t);
    if (!point || !price) {
      missing.push_back(t);
      continue;
    }
    total += (point->value - normalize(vm, *price)) * scale * weight;
  }
  if (!missing.empty())
    throw OutOfRangeError(fmt::format("gain for '{}': no index or price at t={}", vm.id, fmt::join(missing, ",")));
  return total;
}

double migration_loss(double price_src, double price_dst, double t_m) { return (price_src + price_dst) * t_m / 3600.0; }

bool should_migrate(double index_value, double p_hat_src, double p_hat_dst) {
  return index_value > p_hat_src + 2.0 * p_hat_dst;
}

std::string_view to_string(LedgerEventKind kind) {
  switch (kind) {
    case LedgerEventKind::hold_tick: return "hold_tick";
    case LedgerEventKind::migrate: return "migrate";
    case LedgerEventKind::revoke: return "revoke";
  }
  return "hold_tick";
}

LedgerEventKind ledger_event_kind_from_string(std::string_view name) {
  if (name == "hold_tick") return LedgerEventKind::hold_tick;
  if (name == "migrate") return LedgerEventKind::migrate;
  if (name == "revoke") return LedgerEventKind::revoke;
  throw Error(fmt::format("unknown ledger event kind '{}'", name));
}

std::pair<double, double> evaluate(const LedgerEvent& e) {
  const double dt = static_cast<double>(e.t1 - e.t0);
  switch (e.kind) {
    case LedgerEventKind::hold_tick:
      if (e.productive) return {(e.index_value * e.capacity_scale - e.price) * dt / 3600.0, 0.0};
      return {0.0, e.price * dt / 3600.0};
    case LedgerEventKind::migrate:
      return {0.0, migration_loss(e.price, e.target_price, dt)};
    case LedgerEventKind::revoke:
      return {0.0, e.price * dt / 3600.0};
  }
  return {0.0, 0.0};
}

void TrackingLedger::record(LedgerEvent event) {
  if (event.t1 <= event.t0) return;
  const auto [g, l] = evaluate(event);
  event.gain = g;
  event.loss = l;
  gain_ += g;
  loss_ += l;
  events_.push_back(std::move(event));
}

void TrackingLedger::hold(Timestamp t0, Timestamp t1, const std::string& vm_id, double price, double index_value,
                          double capacity_scale) {
  if (vm_id != current_vm_) {
    current_vm_ = vm_id;
    hold_start_ = t0;
  }
  LedgerEvent e;
  e.t0 = t0;
  e.t1 = t1;
  e.kind = LedgerEventKind::hold_tick;
  e.productive = true;
  e.vm_id = vm_id;
  e.price = price;
  e.index_value = index_value;
  e.capacity_scale = capacity_scale;
  record(std::move(e));
}

void TrackingLedger::idle(Timestamp t0, Timestamp t1, const std::string& vm_id, double price) {
  LedgerEvent e;
  e.t0 = t0;
  e.t1 = t1;
  e.kind = LedgerEventKind::hold_tick;
  e.vm_id = vm_id;
  e.price = price;
  record(std::move(e));
}

void TrackingLedger::migrating(Timestamp t0, Timestamp t1, const std::string& src, double price_src,
                               const std::string& dst, double price_dst) {
  LedgerEvent e;
  e.t0 = t0;
  e.t1 = t1;
  e.kind = LedgerEventKind::migrate;
  e.vm_id = src;
  e.target_vm = dst;
  e.price = price_src;
  e.target_price = price_dst;
  record(std::move(e));
}

void TrackingLedger::restarting(Timestamp t0, Timestamp t1, const std::string& vm_id, double price) {
  if (vm_id != current_vm_) {
    current_vm_ = vm_id;
    hold_start_ = t0;
  }
  LedgerEvent e;
  e.t0 = t0;
  e.t1 = t1;
  e.kind = LedgerEventKind::revoke;
  e.vm_id = vm_id;
  e.price = price;
  record(std::move(e));
}

double replay_net(std::span<const LedgerEvent> events) {
  double gain_sum = 0.0, loss_sum = 0.0;
  for (const auto& e : events) {
    const auto [g, l] = evaluate(e);
    gain_sum += g;
    loss_sum += l;
  }
  return gain_sum - loss_sum;
}

void write_ledger_jsonl(std::ostream& out, std::span<const LedgerEvent> events, int task) {
  for (const auto& e : events) {
    nlohmann::ordered_json j;
    j["task"] = task;
    j["t0"] = e.t0;
    j["t1"] = e.t1;
    j["kind"] = to_string(e.kind);
    j["productive"] = e.productive;
    j["vm_id"] = e.vm_id;
    if (!e.target_vm.empty()) {
      j["target_vm"] = e.target_vm;
      j["target_price"] = e.target_price;
    }
    j["price"] = e.price;
    j["index_value"] = e.index_value;
    j["gain"] = e.gain;
    j["loss"] = e.loss;
    out << j.dump() << '\n';
  }
}

}  // namespace spotindex
