#include <bit>
#include <cstdint>

#include "healnet/kernels.hpp"

namespace healnet::kernels {

Masses enumerate_causes_scalar(const Component& c) {
  const std::size_t k = c.causes;
  const std::size_t m = c.findings;
  Masses out{0.0, std::vector<double>(k, 0.0)};
  std::vector<double> silent(m);

  for (std::uint64_t x = 0; x < (std::uint64_t{1} << k); ++x) {
    double w = 1.0;
    std::fill(silent.begin(), silent.end(), 1.0);
    for (std::size_t i = 0; i < k; ++i) {
      if ((x >> i) & 1U) {
        w *= c.on[i];
        const double* row = &c.q[i * m];
        for (std::size_t s = 0; s < m; ++s) silent[s] *= row[s];
      } else {
        w *= c.off[i];
      }
    }
    for (std::size_t s = 0; s < m; ++s) w *= 1.0 - c.keep[s] * silent[s];
    out.total += w;
    for (std::size_t i = 0; i < k; ++i) {
      if ((x >> i) & 1U) out.active[i] += w;
    }
  }
  return out;
}

Masses sum_over_findings_scalar(const Component& c) {
  const std::size_t k = c.causes;
  const std::size_t m = c.findings;
  Masses out{0.0, std::vector<double>(k, 0.0)};
  std::vector<double> active_part(k);
  std::vector<double> factor(k);

  for (std::uint64_t subset = 0; subset < (std::uint64_t{1} << m); ++subset) {
    double term = (std::popcount(subset) & 1) ? -1.0 : 1.0;
    for (std::size_t s = 0; s < m; ++s) {
      if ((subset >> s) & 1U) term *= c.keep[s];
    }
    for (std::size_t i = 0; i < k; ++i) {
      double silent = 1.0;
      const double* row = &c.q[i * m];
      for (std::size_t s = 0; s < m; ++s) {
        if ((subset >> s) & 1U) silent *= row[s];
      }
      active_part[i] = c.on[i] * silent;
      factor[i] = c.off[i] + active_part[i];
      term *= factor[i];
    }
    out.total += term;
    for (std::size_t i = 0; i < k; ++i) out.active[i] += term * active_part[i] / factor[i];
  }
  return out;
}

}  // namespace healnet::kernels
