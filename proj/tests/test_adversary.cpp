#include <gtest/gtest.h>

#include <cmath>

#include "rdiqsdc/adversary.hpp"
#include "rdiqsdc/protocol.hpp"

using namespace rdiqsdc;

TEST(Closeness, QuarterTurnPredicate) {
  // Offsets within a quarter turn (2 pi k / n <= pi / 2) count as close.
  EXPECT_TRUE(bases_close(1, 1, 16));
  EXPECT_TRUE(bases_close(1, 5, 16));
  EXPECT_FALSE(bases_close(1, 6, 16));
  EXPECT_TRUE(bases_close(16, 1, 16));
  EXPECT_TRUE(bases_close(2, 14, 16));
  EXPECT_FALSE(bases_close(1, 2, 3));
  EXPECT_TRUE(bases_close(1, 2, 5));
  EXPECT_FALSE(bases_close(1, 3, 5));
  EXPECT_TRUE(bases_close(3, 3, 5));
}

TEST(Closeness, SymmetricInArguments) {
  for (int n : {3, 5, 8, 16, 17}) {
    for (int a = 1; a <= n; ++a) {
      for (int b = 1; b <= n; ++b) ASSERT_EQ(bases_close(a, b, n), bases_close(b, a, n));
    }
  }
}

TEST(EveBasis, ProbabilityTwoSelectsCloseOrFarSets) {
  RandomStream rng(1);
  for (int i = 0; i < 2000; ++i) {
    const int w = static_cast<int>(rng.uniform_int(1, 16));
    ASSERT_TRUE(bases_close(draw_eve_basis(w, 16, 1.0, rng), w, 16));
    ASSERT_FALSE(bases_close(draw_eve_basis(w, 16, 0.0, rng), w, 16));
  }
}

TEST(FakeState, ForcedOutcomeFollowsCloseness) {
  const DetectionOutcome close = blind_and_fake(3, 3, 16);
  EXPECT_TRUE(close.clicked);
  EXPECT_TRUE(close.forced);
  EXPECT_EQ(close.g, 0);
  const DetectionOutcome far = blind_and_fake(3, 11, 16);
  EXPECT_EQ(far.g, 1);
}

TEST(Prediction, MixtureAndHalvedForm) {
  BlindingAttackParams a{true, 0.4, 0.75, true, true, true};
  EXPECT_NEAR(predict_attacked_distribution(0.1, a), 0.6 * 0.1 + 0.4 * 0.75, 1e-15);
  EXPECT_NEAR(literal_attacked_expression(0.1, a), (0.6 * 0.1 + 0.4 * 0.75) / 2.0, 1e-15);
  a.p1 = 0.0;
  EXPECT_EQ(predict_attacked_distribution(0.3, a), 0.3);
}

TEST(Params, ValidationAndActivity) {
  BlindingAttackParams a;
  EXPECT_FALSE(a.active());
  a.enabled = true;
  EXPECT_FALSE(a.active());
  a.p1 = 0.2;
  EXPECT_TRUE(a.active());
  a.p2 = 1.5;
  EXPECT_THROW(a.validate(), std::invalid_argument);
  a.p2 = 0.5;
  a.p1 = -0.1;
  EXPECT_THROW(a.validate(), std::invalid_argument);
}

TEST(AbortProbability, HonestFalsePositiveBelowEpsilon) {
  const std::size_t m = 10000;
  const double tol = hoeffding_tolerance(m, 1e-6);
  for (double p1 : {0.1, 0.3, 0.5}) EXPECT_LE(binomial_abort_probability(p1, p1, m, tol), 1e-6);
}

TEST(AbortProbability, EdgeCases) {
  EXPECT_EQ(binomial_abort_probability(0.3, 0.1, 0, 0.01), 0.0);
  EXPECT_EQ(binomial_abort_probability(0.0, 0.1, 100, 0.01), 1.0);
  EXPECT_EQ(binomial_abort_probability(0.0, 0.0, 100, 0.01), 0.0);
  EXPECT_EQ(binomial_abort_probability(1.0, 1.0, 100, 0.01), 0.0);
  EXPECT_EQ(binomial_abort_probability(0.5, 0.5, 100, 1.0), 0.0);
  // Acceptance window holds no integer count.
  EXPECT_EQ(binomial_abort_probability(0.5, 0.505, 10, 0.001), 1.0);
}

TEST(DetectionPower, MonotoneInAttackFraction) {
  const std::size_t m = 2000;
  const double tol = hoeffding_tolerance(m, 1e-6);
  double prev = -1.0;
  for (int i = 0; i <= 20; ++i) {
    BlindingAttackParams a{true, i / 20.0, 0.5, true, true, true};
    const double power = detection_power(0.1, a, m, tol);
    ASSERT_GE(power, prev - 1e-12);
    prev = power;
  }
  EXPECT_NEAR(prev, 1.0, 1e-12);
}

TEST(DetectionPower, MonotoneInSampleSize) {
  BlindingAttackParams a{true, 0.1, 0.5, true, true, true};
  double prev = -1.0;
  for (std::size_t m : {100u, 1000u, 10000u, 100000u, 1000000u}) {
    const double power = detection_power(0.1, a, m, hoeffding_tolerance(m, 1e-6));
    ASSERT_GE(power, prev - 1e-12);
    prev = power;
  }
  EXPECT_GT(prev, 0.999);
}

TEST(DetectionPower, BlindSpotAtOneHalf) {
  for (double p1 : {0.25, 0.5, 1.0}) {
    BlindingAttackParams a{true, p1, 0.5, true, true, true};
    EXPECT_LE(detection_power(0.5, a, 10000, hoeffding_tolerance(10000, 1e-6)), 1e-6);
  }
}

TEST(Intercept, ResendsFamilyStateOrComplement) {
  const BasisConfig c(16);
  RandomStream rng(3);
  for (int i = 0; i < 500; ++i) {
    PhotonRecord ph;
    ph.prep_index = static_cast<int>(rng.uniform_int(1, 16));
    ph.sent_state = prepare(ph.prep_index, c);
    ph.carrier = ph.sent_state;
    ph.rotation_total = 0.1;
    const EveKnowledge k = intercept_message_photon(ph, 16, c.theta(), rng);
    ASSERT_EQ(ph.attacked_pass, 1);
    ASSERT_EQ(ph.rotation_total, 0.0);
    const PureState eve = prepare(k.basis, c);
    ASSERT_NEAR(overlap_probability(eve, ph.carrier), k.resent_outcome == 0 ? 1.0 : 0.0, 1e-12);
  }
}

TEST(Intercept, EveReadsEncodedBit) {
  PhotonRecord ph;
  ph.has_message_op = true;
  ph.message_op = EncodeOp::U1;
  const EveIntercept got = second_pass_intercept(ph, EveKnowledge{});
  EXPECT_EQ(got.bit, 1);
  EXPECT_TRUE(got.correct);
}

TEST(AttackRun, EmpiricalFrequencyMatchesPrediction) {
  for (double p1 : {0.25, 0.75}) {
    for (double p2 : {0.0, 0.5, 1.0}) {
      ProtocolParams p;
      p.r = 40000;
      p.seed = 13;
      p.physics.link = LinkBudget::from_total_efficiency(1.0);
      p.attack = {true, p1, p2, true, true, true};
      p.abort_on_check_failure = false;
      const ProtocolTranscript t = run_full_protocol(p);
      const double q = predict_attacked_distribution(0.1, p.attack);
      EXPECT_NEAR(t.summary.round1.empirical_p0, q, 5.0 * std::sqrt(q * (1 - q) / p.r) + 1e-12)
          << "p1=" << p1 << " p2=" << p2;
      EXPECT_GT(t.summary.attack.attacked_slots, 0u);
    }
  }
}

TEST(AttackRun, RoundOneOnlyLeavesRoundTwoClean) {
  ProtocolParams p;
  p.r = 5000;
  p.physics.link = LinkBudget::from_total_efficiency(1.0);
  p.attack = {true, 1.0, 0.5, true, false, false};
  p.abort_on_check_failure = false;
  const ProtocolTranscript t = run_full_protocol(p);
  for (const auto& ph : t.return_pass) ASSERT_NE(ph.attacked_pass, 2);
  EXPECT_EQ(t.summary.attack.intercepted_bits, 0u);
  EXPECT_EQ(t.summary.round2->forced_clicks, 0u);
  EXPECT_EQ(t.summary.round1.forced_clicks, p.r);
}
