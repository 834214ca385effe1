#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "healnet/metrics.hpp"
#include "healnet/service_model.hpp"

/// Sensor half of the per-plane control loops: reads the model and reports
/// broken states (alarms) and degraded states (metric breaches).
namespace healnet::monitoring {

/// Declaration order is the report order: service first, data last.
enum class Plane { service, application, control, data };

enum class SymptomKind {
  service_down,
  service_misconfig,
  app_crashed,
  app_overloaded,
  app_misconfig,
  app_path_lost,
  controller_down,
  control_link_down,
  control_path_lost,
  controller_reply_rate_low,
  switch_down,
  data_link_down,
  rule_missing,
  bridge_misconfig,
  interference_high,
  client_misconfig,
  client_unreachable,
  metric_delay_high,
  metric_jitter_high,
  metric_throughput_low,
};

inline constexpr SymptomKind kAllSymptomKinds[] = {
    SymptomKind::service_down,       SymptomKind::service_misconfig,
    SymptomKind::app_crashed,        SymptomKind::app_overloaded,
    SymptomKind::app_misconfig,      SymptomKind::app_path_lost,
    SymptomKind::controller_down,    SymptomKind::control_link_down,
    SymptomKind::control_path_lost,  SymptomKind::controller_reply_rate_low,
    SymptomKind::switch_down,        SymptomKind::data_link_down,
    SymptomKind::rule_missing,       SymptomKind::bridge_misconfig,
    SymptomKind::interference_high,  SymptomKind::client_misconfig,
    SymptomKind::client_unreachable, SymptomKind::metric_delay_high,
    SymptomKind::metric_jitter_high, SymptomKind::metric_throughput_low,
};

enum class Severity { broken, degraded };

std::string_view to_string(Plane plane);
std::string_view to_string(SymptomKind kind);
std::string_view to_string(Severity severity);
std::optional<SymptomKind> parse_symptom_kind(std::string_view text);

/// Alarm codes are broken, metric codes are degraded.
Severity severity_of(SymptomKind kind);
Plane plane_of(SymptomKind kind);

struct SymptomKey {
  SymptomKind kind;
  std::string source;

  auto operator<=>(const SymptomKey&) const = default;
  bool operator==(const SymptomKey&) const = default;
  /// "<kind>/<source>", the node name used by the diagnosis model.
  std::string str() const;
};

struct Symptom {
  Plane plane;
  std::string source;
  SymptomKind kind;
  Severity severity;
  std::optional<double> value;
  int tick = 0;

  SymptomKey key() const { return SymptomKey{kind, source}; }
  bool broken() const noexcept { return severity == Severity::broken; }
  bool operator==(const Symptom&) const = default;
};

Symptom make_symptom(SymptomKind kind, std::string source, int tick,
                     std::optional<double> value = std::nullopt);

/// `TICK <t> SYMPTOM <plane> <source> <kind> <severity> [<value>]`
std::string format_symptom(const Symptom& s);
/// Shortest round-trip-stable rendering used for metric values in logs.
std::string format_value(double v);

struct PlaneReport {
  std::vector<Symptom> symptoms;
  /// Inventory lines of the plane ("Lists ..." tasks), informational only.
  std::vector<std::string> listing;
};

PlaneReport poll_service_plane(const service::Network& net, const MetricThresholds& th, int tick = 0);
PlaneReport poll_application_plane(const service::Network& net, const MetricThresholds& th,
                                   int tick = 0);
PlaneReport poll_control_plane(const service::Network& net, const MetricThresholds& th, int tick = 0);
PlaneReport poll_data_plane(const service::Network& net, const MetricThresholds& th, int tick = 0);

/// Fraction of switch requests the active controller answers:
/// min(1, capacity / aggregate request rate of up switches).
double controller_reply_rate(const net::Topology& t);

/// Symptoms of all four planes, unique per key and ordered by (plane, source, kind).
class SymptomSet {
 public:
  SymptomSet() = default;
  explicit SymptomSet(std::vector<Symptom> symptoms);

  const std::vector<Symptom>& items() const noexcept { return items_; }
  auto begin() const noexcept { return items_.begin(); }
  auto end() const noexcept { return items_.end(); }
  std::size_t size() const noexcept { return items_.size(); }
  bool empty() const noexcept { return items_.empty(); }

  const Symptom* find(const SymptomKey& key) const;
  bool contains(const SymptomKey& key) const { return find(key) != nullptr; }
  bool any_broken() const;

  bool operator==(const SymptomSet&) const = default;

 private:
  std::vector<Symptom> items_;
};

SymptomSet collect(const service::Network& net, const MetricThresholds& th, int tick = 0);

}  // namespace healnet::monitoring
