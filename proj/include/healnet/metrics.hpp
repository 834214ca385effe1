#pragma once

namespace healnet {

/// Thresholds separating nominal from degraded readings.
struct MetricThresholds {
  double delay_ms = 200.0;
  double jitter_ms = 50.0;
  double throughput_floor = 1.0;
  double controller_reply_rate_floor = 0.9;  // fraction of requests answered, in (0, 1]
  double load_factor_ceiling = 1.0;          // load / capacity above this is overload
  double interference_ceiling = 10.0;        // access point uplink power level

  /// Throws InvariantError when a value is out of range.
  void validate() const;
};

}  // namespace healnet
