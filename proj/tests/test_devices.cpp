#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rdiqsdc/devices.hpp"
#include "rdiqsdc/random.hpp"

using namespace rdiqsdc;

namespace {

PhotonRecord photon_at(int x, const BasisConfig& c) {
  PhotonRecord ph;
  ph.prep_index = x;
  ph.sent_state = prepare(x, c);
  ph.carrier = ph.sent_state;
  return ph;
}

double five_sigma(double p, int n) { return 5.0 * std::sqrt(p * (1.0 - p) / n) + 1e-12; }

}  // namespace

TEST(LinkBudget, GainsFollowTheProductForm) {
  LinkBudget link;
  link.distance_km = 10.0;
  link.eta_c = 0.95;
  const double t = std::pow(10.0, -0.2);
  EXPECT_NEAR(link.eta_t(), t, 1e-15);
  EXPECT_NEAR(link.q_ab(), t * 0.95, 1e-15);
  EXPECT_NEAR(link.q_aba(), t * t * 0.95 * 0.95, 1e-15);
}

TEST(LinkBudget, FromTotalEfficiencyIsBare) {
  for (double eta : {0.01, 0.3, 0.7, 1.0}) {
    const LinkBudget link = LinkBudget::from_total_efficiency(eta);
    EXPECT_NEAR(link.q_ab(), eta, 1e-12);
    EXPECT_NEAR(link.q_aba(), eta * eta, 1e-12);
  }
  EXPECT_THROW(LinkBudget::from_total_efficiency(0.0), std::invalid_argument);
  EXPECT_THROW(LinkBudget::from_total_efficiency(1.2), std::invalid_argument);
}

TEST(LinkBudget, ValidateRejectsOutOfRange) {
  LinkBudget link;
  link.eta_c = 1.5;
  EXPECT_THROW(link.validate(), std::invalid_argument);
  link.eta_c = 0.9;
  link.distance_km = -1.0;
  EXPECT_THROW(link.validate(), std::invalid_argument);
  link.distance_km = 5.0;
  EXPECT_NO_THROW(link.validate());
}

TEST(ChannelNoise, UniformModeIsConstant) {
  ChannelNoiseModel noise;
  noise.delta_theta = 0.1;
  noise.family = ChannelNoiseModel::Family::UniformInterval;
  noise.spread = 0.05;
  RandomStream rng(1);
  EXPECT_EQ(noise.sample(rng), 0.1);
  noise.mode = ChannelNoiseModel::Mode::PerPhoton;
  for (int i = 0; i < 1000; ++i) {
    const double d = noise.sample(rng);
    ASSERT_GE(d, 0.05);
    ASSERT_LE(d, 0.15);
  }
}

TEST(StorageLoop, DoubleStoreIsAnError) {
  StorageLoop loop;
  loop.store(PhotonRecord{});
  EXPECT_THROW(loop.store(PhotonRecord{}), std::logic_error);
}

TEST(StorageLoop, InvalidParametersThrow) {
  EXPECT_THROW(StorageLoop(1.1), std::invalid_argument);
  EXPECT_THROW(StorageLoop(0.9, 0), std::invalid_argument);
}

TEST(StorageLoop, PerfectLoopIsIdentityUpToLifetime) {
  const BasisConfig c(16);
  StorageLoop loop(1.0, 11);
  loop.store(photon_at(5, c));
  EXPECT_EQ(loop.eom(), StorageLoop::Eom::On);
  RandomStream rng(3);
  for (int k = 0; k < 11; ++k) loop.advance_trip(rng);
  EXPECT_FALSE(loop.photon_lost());
  EXPECT_EQ(loop.round_trips(), 11);
  const auto exiting = loop.exit_state_before_correction();
  ASSERT_TRUE(exiting.has_value());
  EXPECT_TRUE(exiting->approx_equal(polarization_flip(prepare(5, c))));
  const auto out = loop.read_out();
  ASSERT_TRUE(out.has_value());
  EXPECT_TRUE(out->current_state().approx_equal(prepare(5, c)));
  EXPECT_EQ(loop.eom(), StorageLoop::Eom::Off);
  EXPECT_FALSE(loop.occupied());
}

TEST(StorageLoop, TripBeyondLifetimeLosesPhoton) {
  StorageLoop loop(1.0, 11);
  loop.store(PhotonRecord{});
  RandomStream rng(3);
  for (int k = 0; k < 12; ++k) loop.advance_trip(rng);
  EXPECT_TRUE(loop.photon_lost());
  EXPECT_FALSE(loop.read_out().has_value());
  ASSERT_TRUE(loop.lost_record().has_value());
  EXPECT_EQ(loop.lost_record()->loss, LossSite::Memory);
}

TEST(StorageLoop, ElevenTripsAtNinetyOnePercentTotal) {
  const double per_trip = std::pow(0.91, 1.0 / 11.0);
  const int trials = 40000;
  int survived = 0;
  for (int i = 0; i < trials; ++i) {
    RandomStream rng(17, "loop", static_cast<std::uint64_t>(i));
    const PhotonRecord out = pass_through_memory(PhotonRecord{}, per_trip, 11, 11, rng);
    survived += out.lost() ? 0 : 1;
  }
  EXPECT_NEAR(static_cast<double>(survived) / trials, 0.91, five_sigma(0.91, trials));
}

TEST(StorageLoop, PolarizationFlipSwapsAmplitudes) {
  const PureState s = PureState::from_angles(0.2, 0.0);
  const PureState f = polarization_flip(s);
  EXPECT_NEAR(f.angle(), std::numbers::pi / 2.0 - 0.2, 1e-12);
  EXPECT_TRUE(polarization_flip(f).approx_equal(s));
}

TEST(Transmit, SurvivalMatchesFiberAndCoupling) {
  LinkBudget link;
  link.distance_km = 5.0;
  link.eta_c = 0.9;
  const double expected = link.eta_t() * link.eta_c;
  const int trials = 40000;
  int fiber = 0, coupling = 0, alive = 0;
  for (int i = 0; i < trials; ++i) {
    RandomStream rng(9, "tx", static_cast<std::uint64_t>(i));
    const PhotonRecord out = transmit(PhotonRecord{}, link, ChannelNoiseModel{}, rng);
    if (out.loss == LossSite::Fiber) ++fiber;
    else if (out.loss == LossSite::Coupling) ++coupling;
    else ++alive;
  }
  EXPECT_EQ(fiber + coupling + alive, trials);
  EXPECT_NEAR(static_cast<double>(alive) / trials, expected, five_sigma(expected, trials));
}

TEST(Transmit, AccumulatesRotation) {
  ChannelNoiseModel noise;
  noise.delta_theta = 0.05;
  RandomStream rng(1);
  PhotonRecord ph;
  ph = transmit(ph, LinkBudget::from_total_efficiency(1.0), noise, rng);
  ph = transmit(ph, LinkBudget::from_total_efficiency(1.0), noise, rng);
  EXPECT_NEAR(ph.rotation_total, 0.1, 1e-15);
  EXPECT_EQ(ph.trips, 2);
}

TEST(Detect, BlindedOrDeadDetectorNeverClicks) {
  const BasisConfig c(16);
  const PhotonRecord ph = photon_at(3, c);
  RandomStream rng(4);
  for (int i = 0; i < 1000; ++i) {
    ASSERT_FALSE(detect(ph, Measurement(3, c), DetectorModel{1.0, true, 0.0}, rng).clicked);
    ASSERT_FALSE(detect(ph, Measurement(3, c), DetectorModel{0.0, false, 0.0}, rng).clicked);
  }
}

TEST(Detect, OutcomeFrequencyAndEfficiency) {
  const BasisConfig c(16);
  const PhotonRecord ph = photon_at(3, c);
  const Measurement m(6, c);
  const double p0 = outcome_probability(ph.current_state(), m);
  const int trials = 60000;
  int clicks = 0, zeros = 0;
  RandomStream rng(12);
  for (int i = 0; i < trials; ++i) {
    const DetectionOutcome o = detect(ph, m, DetectorModel{0.8, false, 0.0}, rng);
    clicks += o.clicked ? 1 : 0;
    zeros += o.clicked && o.g == 0 ? 1 : 0;
  }
  EXPECT_NEAR(static_cast<double>(clicks) / trials, 0.8, five_sigma(0.8, trials));
  EXPECT_NEAR(static_cast<double>(zeros) / clicks, p0, five_sigma(p0, clicks));
}
