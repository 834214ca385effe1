#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "healnet/bayes.hpp"
#include "healnet/kernels.hpp"
#include "support.hpp"

using namespace healnet;
using bayes::Algorithm;
using bayes::Backend;

TEST(NoisyOr, SingleCausePresent) {
  bayes::NoisyOrNetwork net;
  auto c = net.add_cause("C", 0.1);
  auto s = net.add_symptom("S", 0.01);
  net.link(c, s, 0.9);
  auto post = bayes::posteriors(net, {{"S", true}});
  // P(S|C) = 1 - 0.99 * 0.1 = 0.901, P(S|~C) = 0.01
  EXPECT_NEAR(post[0], 0.0901 / 0.0991, 1e-12);
  EXPECT_NEAR(post[0], 0.909183, 1e-6);
}

TEST(NoisyOr, SingleCauseAbsentLowersPosterior) {
  bayes::NoisyOrNetwork net;
  net.add_cause("C", 0.1);
  net.add_symptom("S", 0.01);
  net.link(0, 0, 0.9);
  auto post = bayes::posteriors(net, {{"S", false}});
  EXPECT_LT(post[0], 0.1);
  EXPECT_NEAR(post[0], testing_support::brute_force(net, {{"S", false}})[0], 1e-12);
}

TEST(NoisyOr, NoEvidenceGivesPriors) {
  bayes::NoisyOrNetwork net;
  net.add_cause("a", 0.2);
  net.add_cause("b", 0.03);
  net.add_symptom("s", 0.1);
  net.link(0, 0, 0.5);
  net.link(1, 0, 0.7);
  auto post = bayes::posteriors(net, {});
  EXPECT_DOUBLE_EQ(post[0], 0.2);
  EXPECT_DOUBLE_EQ(post[1], 0.03);
}

TEST(NoisyOr, RejectsBadParameters) {
  bayes::NoisyOrNetwork net;
  EXPECT_THROW(net.add_cause("a", 0.0), InvariantError);
  EXPECT_THROW(net.add_cause("a", 1.0), InvariantError);
  net.add_cause("a", 0.5);
  EXPECT_THROW(net.add_cause("a", 0.5), InvariantError);
  EXPECT_THROW(net.add_symptom("s", 1.0), InvariantError);
  net.add_symptom("s", 0.0);
  EXPECT_THROW(net.link(0, 0, 0.0), InvariantError);
  EXPECT_THROW(net.link(0, 3, 0.5), InvariantError);
}

TEST(NoisyOr, DuplicateLinkKeepsStronger) {
  bayes::NoisyOrNetwork net;
  net.add_cause("a", 0.5);
  net.add_symptom("s", 0.0);
  net.link(0, 0, 0.3);
  net.link(0, 0, 0.8);
  net.link(0, 0, 0.4);
  ASSERT_EQ(net.symptoms()[0].parents.size(), 1u);
  EXPECT_DOUBLE_EQ(net.symptoms()[0].parents[0].strength, 0.8);
}

TEST(NoisyOr, UnknownEvidenceKey) {
  bayes::NoisyOrNetwork net;
  net.add_cause("a", 0.5);
  EXPECT_THROW(bayes::posteriors(net, {{"nope", true}}), UnknownIdError);
}

TEST(NoisyOr, TooLargeComponent) {
  bayes::NoisyOrNetwork net;
  for (int c = 0; c < 8; ++c) net.add_cause("c" + std::to_string(c), 0.1);
  for (int s = 0; s < 8; ++s) {
    net.add_symptom("s" + std::to_string(s), 0.01);
    for (int c = 0; c < 8; ++c) net.link(c, s, 0.5);
  }
  bayes::Evidence ev;
  for (int s = 0; s < 8; ++s) ev["s" + std::to_string(s)] = true;
  bayes::InferenceOptions opt;
  opt.max_exponent = 7;
  EXPECT_THROW(bayes::posteriors(net, ev, opt), bayes::ModelTooLargeError);
  opt.max_exponent = 8;
  EXPECT_NO_THROW(bayes::posteriors(net, ev, opt));
}

TEST(NoisyOr, ZeroLeakImpossibleEvidence) {
  // A present finding with no parents and no leak has probability zero.
  bayes::NoisyOrNetwork net;
  net.add_cause("a", 0.5);
  net.add_symptom("s", 0.0);
  auto post = bayes::posteriors(net, {{"s", true}});
  for (double p : post) EXPECT_FALSE(std::isnan(p));
}

TEST(NoisyOr, MatchesBruteForceOnRandomNetworks) {
  std::mt19937_64 rng(20240611);
  double worst = 0.0;
  for (int i = 0; i < 1500; ++i) {
    auto rc = testing_support::random_case(rng);
    auto oracle = testing_support::brute_force(rc.net, rc.evidence);
    for (auto algo : {Algorithm::automatic, Algorithm::enumerate_causes, Algorithm::sum_over_findings}) {
      bayes::InferenceOptions opt;
      opt.algorithm = algo;
      auto got = bayes::posteriors(rc.net, rc.evidence, opt);
      ASSERT_EQ(got.size(), oracle.size());
      for (std::size_t c = 0; c < got.size(); ++c) worst = std::max(worst, std::abs(got[c] - oracle[c]));
    }
  }
  EXPECT_LE(worst, 1e-9);
}

namespace {

kernels::Component random_component(std::mt19937_64& rng, std::size_t k, std::size_t m) {
  std::uniform_real_distribution<double> u(0.01, 0.99);
  kernels::Component c;
  c.causes = k;
  c.findings = m;
  for (std::size_t i = 0; i < k; ++i) {
    double p = u(rng);
    c.on.push_back(p * u(rng));
    c.off.push_back(1 - p);
  }
  for (std::size_t s = 0; s < m; ++s) c.keep.push_back(u(rng));
  for (std::size_t i = 0; i < k * m; ++i) c.q.push_back(u(rng) < 0.3 ? 1.0 : u(rng));
  return c;
}

void expect_close(const kernels::Masses& a, const kernels::Masses& b, double tol = 1e-12) {
  ASSERT_EQ(a.active.size(), b.active.size());
  double scale = std::max(std::abs(a.total), 1e-300);
  EXPECT_NEAR(a.total / scale, b.total / scale, tol);
  for (std::size_t i = 0; i < a.active.size(); ++i) EXPECT_NEAR(a.active[i] / scale, b.active[i] / scale, tol);
}

}  // namespace

TEST(Kernels, Avx2MatchesScalar) {
  if (!kernels::avx2_available()) GTEST_SKIP() << "no AVX2 on this machine";
  std::mt19937_64 rng(7);
  for (std::size_t k = 1; k <= 12; ++k) {
    for (std::size_t m = 1; m <= 10; ++m) {
      auto c = random_component(rng, k, m);
      expect_close(kernels::enumerate_causes_scalar(c), kernels::enumerate_causes_avx2(c));
      expect_close(kernels::sum_over_findings_scalar(c), kernels::sum_over_findings_avx2(c));
    }
  }
}

TEST(Kernels, BothAlgorithmsAgree) {
  std::mt19937_64 rng(11);
  for (std::size_t k = 1; k <= 10; ++k) {
    for (std::size_t m = 1; m <= 10; ++m) {
      auto c = random_component(rng, k, m);
      // inclusion-exclusion cancels terms, so allow for rounding
      expect_close(kernels::enumerate_causes_scalar(c), kernels::sum_over_findings_scalar(c), 1e-9);
    }
  }
}

TEST(Kernels, BackendsAgreeThroughPosteriors) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 200; ++i) {
    auto rc = testing_support::random_case(rng);
    bayes::InferenceOptions scalar, avx;
    scalar.backend = Backend::scalar;
    avx.backend = Backend::avx2;
    auto a = bayes::posteriors(rc.net, rc.evidence, scalar);
    auto b = bayes::posteriors(rc.net, rc.evidence, avx);
    for (std::size_t c = 0; c < a.size(); ++c) EXPECT_NEAR(a[c], b[c], 1e-12);
  }
}
