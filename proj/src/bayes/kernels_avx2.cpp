// AVX2 variants of the inference kernels. Only the kernel bodies are built for
// AVX2 (function target attributes); the rest of this file stays baseline so
// nothing AVX2-encoded leaks into shared inline code.

#include <bit>
#include <cstdint>

#include "healnet/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)
#define HEALNET_X86 1
#include <immintrin.h>
#else
#define HEALNET_X86 0
#endif

namespace healnet::kernels {

#if HEALNET_X86

bool avx2_available() {
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported;
}

namespace {

// Lane l of a vector holds the assignment whose two lowest bits equal l:
// lane 0 = {}, lane 1 = {0}, lane 2 = {1}, lane 3 = {0, 1}.
__attribute__((target("avx2,fma"))) inline __m256d pick(double when0, double when1, double base0,
                                                        double base1) {
  return _mm256_setr_pd(base0 * base1, when0 * base1, base0 * when1, when0 * when1);
}

__attribute__((target("avx2,fma"))) inline double horizontal_sum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  __m128d pair = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(pair, _mm_unpackhi_pd(pair, pair)));
}

__attribute__((target("avx2,fma"))) Masses enumerate_causes_impl(const Component& c) {
  const std::size_t k = c.causes;
  const std::size_t m = c.findings;
  Masses out{0.0, std::vector<double>(k, 0.0)};

  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d low_weight = pick(c.on[0], c.on[1], c.off[0], c.off[1]);
  // Per-vector scratch lives in plain double buffers, four lanes per entry.
  std::vector<double> low_silent(4 * m);
  for (std::size_t s = 0; s < m; ++s) _mm256_storeu_pd(&low_silent[4 * s], pick(c.q[s], c.q[m + s], 1.0, 1.0));
  const __m256d bit0 = _mm256_setr_pd(0.0, 1.0, 0.0, 1.0);
  const __m256d bit1 = _mm256_setr_pd(0.0, 0.0, 1.0, 1.0);

  std::vector<double> acc(4 * k, 0.0);
  __m256d total = _mm256_setzero_pd();
  std::vector<double> silent(m);

  const std::uint64_t high_count = std::uint64_t{1} << (k - 2);
  for (std::uint64_t high = 0; high < high_count; ++high) {
    double hw = 1.0;
    std::fill(silent.begin(), silent.end(), 1.0);
    for (std::size_t i = 2; i < k; ++i) {
      if ((high >> (i - 2)) & 1U) {
        hw *= c.on[i];
        const double* row = &c.q[i * m];
        for (std::size_t s = 0; s < m; ++s) silent[s] *= row[s];
      } else {
        hw *= c.off[i];
      }
    }
    __m256d w = _mm256_mul_pd(_mm256_set1_pd(hw), low_weight);
    for (std::size_t s = 0; s < m; ++s) {
      __m256d keep = _mm256_set1_pd(c.keep[s] * silent[s]);
      w = _mm256_mul_pd(w, _mm256_fnmadd_pd(keep, _mm256_loadu_pd(&low_silent[4 * s]), one));
    }
    total = _mm256_add_pd(total, w);
    _mm256_storeu_pd(&acc[0], _mm256_fmadd_pd(w, bit0, _mm256_loadu_pd(&acc[0])));
    _mm256_storeu_pd(&acc[4], _mm256_fmadd_pd(w, bit1, _mm256_loadu_pd(&acc[4])));
    for (std::size_t i = 2; i < k; ++i) {
      if ((high >> (i - 2)) & 1U) _mm256_storeu_pd(&acc[4 * i], _mm256_add_pd(_mm256_loadu_pd(&acc[4 * i]), w));
    }
  }
  out.total = horizontal_sum(total);
  for (std::size_t i = 0; i < k; ++i) out.active[i] = horizontal_sum(_mm256_loadu_pd(&acc[4 * i]));
  return out;
}

__attribute__((target("avx2,fma"))) Masses sum_over_findings_impl(const Component& c) {
  const std::size_t k = c.causes;
  const std::size_t m = c.findings;
  Masses out{0.0, std::vector<double>(k, 0.0)};

  // Lane sign and keep factors for the two lowest findings.
  const __m256d low_term =
      _mm256_mul_pd(_mm256_setr_pd(1.0, -1.0, -1.0, 1.0), pick(c.keep[0], c.keep[1], 1.0, 1.0));
  std::vector<double> low_silent(4 * k);
  for (std::size_t i = 0; i < k; ++i) {
    _mm256_storeu_pd(&low_silent[4 * i], pick(c.q[i * m], c.q[i * m + 1], 1.0, 1.0));
  }

  std::vector<double> acc(4 * k, 0.0);
  std::vector<double> active_part(4 * k);
  std::vector<double> factor(4 * k);
  __m256d total = _mm256_setzero_pd();

  const std::uint64_t high_count = std::uint64_t{1} << (m - 2);
  for (std::uint64_t high = 0; high < high_count; ++high) {
    double scale = (std::popcount(high) & 1) ? -1.0 : 1.0;
    for (std::size_t s = 2; s < m; ++s) {
      if ((high >> (s - 2)) & 1U) scale *= c.keep[s];
    }
    __m256d term = _mm256_mul_pd(_mm256_set1_pd(scale), low_term);
    for (std::size_t i = 0; i < k; ++i) {
      double silent = 1.0;
      const double* row = &c.q[i * m];
      for (std::size_t s = 2; s < m; ++s) {
        if ((high >> (s - 2)) & 1U) silent *= row[s];
      }
      __m256d a = _mm256_mul_pd(_mm256_set1_pd(c.on[i] * silent), _mm256_loadu_pd(&low_silent[4 * i]));
      __m256d f = _mm256_add_pd(_mm256_set1_pd(c.off[i]), a);
      _mm256_storeu_pd(&active_part[4 * i], a);
      _mm256_storeu_pd(&factor[4 * i], f);
      term = _mm256_mul_pd(term, f);
    }
    total = _mm256_add_pd(total, term);
    for (std::size_t i = 0; i < k; ++i) {
      __m256d ratio = _mm256_div_pd(_mm256_loadu_pd(&active_part[4 * i]), _mm256_loadu_pd(&factor[4 * i]));
      _mm256_storeu_pd(&acc[4 * i], _mm256_fmadd_pd(term, ratio, _mm256_loadu_pd(&acc[4 * i])));
    }
  }
  out.total = horizontal_sum(total);
  for (std::size_t i = 0; i < k; ++i) out.active[i] = horizontal_sum(_mm256_loadu_pd(&acc[4 * i]));
  return out;
}

}  // namespace

Masses enumerate_causes_avx2(const Component& c) {
  if (!avx2_available() || c.causes < 2) return enumerate_causes_scalar(c);
  return enumerate_causes_impl(c);
}

Masses sum_over_findings_avx2(const Component& c) {
  if (!avx2_available() || c.findings < 2) return sum_over_findings_scalar(c);
  return sum_over_findings_impl(c);
}

#else

bool avx2_available() { return false; }

Masses enumerate_causes_avx2(const Component& c) { return enumerate_causes_scalar(c); }

Masses sum_over_findings_avx2(const Component& c) { return sum_over_findings_scalar(c); }

#endif

}  // namespace healnet::kernels
