#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "rdiqsdc/quantum.hpp"
#include "rdiqsdc/random.hpp"

using namespace rdiqsdc;

namespace {

constexpr double kPi = std::numbers::pi;

PureState complement(const PureState& s) { return PureState(-std::conj(s.amp1()), std::conj(s.amp0())); }

}  // namespace

TEST(BasisConfig, RejectsDegenerateSettings) {
  EXPECT_THROW(BasisConfig(2), std::invalid_argument);
  EXPECT_THROW(BasisConfig(4), std::invalid_argument);
  EXPECT_THROW(BasisConfig(0), std::invalid_argument);
  EXPECT_THROW(BasisConfig(8, 0.0), std::invalid_argument);
  EXPECT_THROW(BasisConfig(8, kPi / 2.0), std::invalid_argument);
  EXPECT_NO_THROW(BasisConfig(3));
  EXPECT_NO_THROW(BasisConfig(5, 0.3));
}

TEST(BasisConfig, PhaseIsTwoPiXOverN) {
  const BasisConfig c(16);
  EXPECT_NEAR(c.phase(4), kPi / 2.0, 1e-15);
  EXPECT_NEAR(c.phase(16), 2.0 * kPi, 1e-15);
}

TEST(PureState, ZeroVectorThrows) { EXPECT_THROW(PureState(0.0, 0.0), std::invalid_argument); }

TEST(PureState, NormalizesAndRemovesGlobalPhase) {
  const PureState s(Complex(0.0, 3.0), Complex(4.0, 0.0));
  EXPECT_NEAR(s.norm_squared(), 1.0, 1e-15);
  EXPECT_NEAR(s.amp0().imag(), 0.0, 1e-15);
  EXPECT_GE(s.amp0().real(), 0.0);
  EXPECT_NEAR(s.amp0().real(), 0.6, 1e-15);
  EXPECT_NEAR(std::abs(s.amp1()), 0.8, 1e-15);
}

TEST(PureState, AnglesRoundTrip) {
  const PureState s = PureState::from_angles(0.3, 1.1);
  EXPECT_NEAR(s.angle(), 0.3, 1e-14);
  EXPECT_NEAR(s.phase(), 1.1, 1e-14);
}

TEST(Prepare, UsesFamilyAngleAndPhase) {
  const BasisConfig c(16);
  const PureState s = prepare(3, c);
  EXPECT_NEAR(s.angle(), kPi / 4.0, 1e-14);
  EXPECT_NEAR(s.phase(), 2.0 * kPi * 3 / 16, 1e-14);
}

TEST(Measurement, IndexOutOfRangeThrows) {
  const BasisConfig c(8);
  EXPECT_THROW(Measurement(0, c), std::invalid_argument);
  EXPECT_THROW(Measurement(9, c), std::invalid_argument);
  EXPECT_NO_THROW(Measurement(8, c));
}

TEST(Measurement, MatchingBasisGivesOutcomeZero) {
  const BasisConfig c(16);
  for (int x = 1; x <= 16; ++x) {
    EXPECT_NEAR(outcome_probability(prepare(x, c), Measurement(x, c)), 1.0, 1e-12);
    EXPECT_NEAR(overlap_probability(complement(prepare(x, c)), prepare(x, c)), 0.0, 1e-12);
  }
}

TEST(Measurement, OffsetOverlapIsCosSquared) {
  // At theta = pi/4: |<psi_{x-k}|psi_x>|^2 = cos^2(pi k / n).
  for (int n : {3, 5, 8, 16}) {
    const BasisConfig c(n);
    for (int k = 0; k < n; ++k) {
      const int meas = ((5 - k) % n + n) % n + 1;
      const double expected = std::pow(std::cos(kPi * k / n), 2);
      EXPECT_NEAR(outcome_probability(prepare((5 % n) + 1, c), Measurement(meas, c)), expected, 1e-12)
          << "n=" << n << " k=" << k;
    }
  }
}

TEST(Encode, PhaseFlipIsInvolutionAndOrthogonalAtPiOverFour) {
  const BasisConfig c(16);
  const PureState s = prepare(7, c);
  const PureState flipped = apply_encode(s, EncodeOp::U1);
  EXPECT_TRUE(apply_encode(flipped, EncodeOp::U1).approx_equal(s));
  EXPECT_TRUE(apply_encode(s, EncodeOp::U0).approx_equal(s));
  EXPECT_NEAR(overlap_probability(s, flipped), 0.0, 1e-12);
}

TEST(Encode, OverlapAfterFlipIsCosSquaredTwoTheta) {
  const BasisConfig c(5, 0.4);
  const PureState s = prepare(2, c);
  EXPECT_NEAR(overlap_probability(s, apply_encode(s, EncodeOp::U1)), std::pow(std::cos(0.8), 2), 1e-12);
}

TEST(Rotation, ComposesAdditively) {
  const PureState s = PureState::from_angles(0.4, 0.9);
  const PureState two = apply_rotation(apply_rotation(s, {0.1}), {0.2});
  EXPECT_TRUE(two.approx_equal(apply_rotation(s, {0.3}), 1e-12));
  EXPECT_TRUE(apply_rotation(s, {0.0}).approx_equal(s));
}

TEST(Rotation, FidelityIsCosSquaredOfAngle) {
  const PureState s = prepare(3, BasisConfig(16));
  for (double d : {0.0, 0.05, 0.2547, 0.6}) {
    EXPECT_NEAR(state_fidelity(s, apply_rotation(s, {d})), std::pow(std::cos(d), 2), 1e-12);
  }
}

TEST(Sampling, FrequencyMatchesBornRule) {
  const BasisConfig c(16);
  const PureState s = prepare(1, c);
  const Measurement m(4, c);
  const double p = outcome_probability(s, m);
  RandomStream rng(42);
  const int trials = 200000;
  int zeros = 0;
  for (int i = 0; i < trials; ++i) zeros += sample_outcome(s, m, rng) == 0 ? 1 : 0;
  const double sigma = std::sqrt(p * (1.0 - p) / trials);
  EXPECT_NEAR(static_cast<double>(zeros) / trials, p, 5.0 * sigma);
}

TEST(Property, RandomOperationsPreserveNormAndProbability) {
  RandomStream rng(7, "quantum-property");
  for (int i = 0; i < 20000; ++i) {
    const int n = static_cast<int>(rng.uniform_int(3, 33));
    if (n == 4) continue;
    const BasisConfig c(n, 0.01 + 1.55 * rng.uniform());
    PureState s = prepare(static_cast<int>(rng.uniform_int(1, n)), c);
    const int steps = static_cast<int>(rng.uniform_int(1, 6));
    for (int k = 0; k < steps; ++k) {
      if (rng.bernoulli(0.5)) s = apply_encode(s, EncodeOp::U1);
      s = apply_rotation(s, {(rng.uniform() - 0.5) * 10.0});
    }
    ASSERT_NEAR(s.norm_squared(), 1.0, 1e-12);
    const Measurement m(static_cast<int>(rng.uniform_int(1, n)), c);
    const double p0 = outcome_probability(s, m);
    ASSERT_GE(p0, -1e-15);
    ASSERT_LE(p0, 1.0 + 1e-15);
    ASSERT_NEAR(p0 + overlap_probability(complement(m.projector_state()), s), 1.0, 1e-12);
  }
}

TEST(Property, OverlapIsSymmetric) {
  RandomStream rng(11);
  for (int i = 0; i < 5000; ++i) {
    const PureState a = PureState::from_angles(rng.uniform() * kPi, rng.uniform() * 2 * kPi);
    const PureState b = PureState::from_angles(rng.uniform() * kPi, rng.uniform() * 2 * kPi);
    ASSERT_NEAR(overlap_probability(a, b), overlap_probability(b, a), 1e-14);
  }
}

TEST(RandomStream, DeterministicPerSeedAndPurpose) {
  RandomStream a(5, "x", 3), b(5, "x", 3), c(5, "y", 3), d(5, "x", 4);
  const auto va = a(), vb = b(), vc = c(), vd = d();
  EXPECT_EQ(va, vb);
  EXPECT_NE(va, vc);
  EXPECT_NE(va, vd);
}

TEST(RandomStream, RangesAreRespected) {
  RandomStream rng(1);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 10000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = rng.uniform_int(-2, 2);
    ASSERT_GE(k, -2);
    ASSERT_LE(k, 2);
    seen.insert(k);
  }
  EXPECT_EQ(seen.size(), 5u);
  EXPECT_FALSE(rng.bernoulli(0.0));
  EXPECT_TRUE(rng.bernoulli(1.0));
}
