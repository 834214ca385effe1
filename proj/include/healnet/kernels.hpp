#pragma once

#include <cstddef>
#include <span>
#include <vector>

/// Inner loops of exact noisy-OR inference over one coupled component.
///
/// A component has k causes and m positive findings. Cause c contributes
/// weight `on[c]` when active and `off[c]` when inactive (negative findings
/// are already folded into `on`). Positive finding s stays silent with
/// probability `keep[s] * prod_{c active} q[c*m + s]`, where keep = 1 - leak.
/// Both kernels return the unnormalised evidence mass and, per cause, the
/// mass of assignments where that cause is active.
///
///   enumerate_causes   sums over the 2^k cause assignments.
///   sum_over_findings  expands prod_s (1 - keep_s Q_s) over the 2^m subsets
///                      of positive findings (inclusion-exclusion), each term
///                      factorising over causes.
///
/// Every kernel has a scalar reference and an AVX2 variant;
/// bayes::posteriors() picks one at runtime.
namespace healnet::kernels {

struct Component {
  std::size_t causes = 0;
  std::size_t findings = 0;
  std::vector<double> on;
  std::vector<double> off;
  std::vector<double> keep;
  std::vector<double> q;  // causes x findings, row-major
};

struct Masses {
  double total = 0.0;
  std::vector<double> active;
};

Masses enumerate_causes_scalar(const Component& c);
Masses sum_over_findings_scalar(const Component& c);

/// Available only when `avx2_available()`; otherwise they fall back to scalar.
Masses enumerate_causes_avx2(const Component& c);
Masses sum_over_findings_avx2(const Component& c);

bool avx2_available();

}  // namespace healnet::kernels
