#include "rdiqsdc/quantum.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rdiqsdc {

namespace {
constexpr double kPi = std::numbers::pi;
}  // namespace

BasisConfig::BasisConfig(int n, double theta) : n_(n), theta_(theta) {
  if (n < 3 || n == 4) {
    throw std::invalid_argument("basis count n must satisfy n >= 3 and n != 4, got " +
                                std::to_string(n));
  }
  if (!(theta > 0.0 && theta < kPi / 2.0)) {
    throw std::invalid_argument("theta must lie in (0, pi/2)");
  }
}

double BasisConfig::phase(int x) const { return 2.0 * kPi * x / n_; }

PureState::PureState(Complex amp0, Complex amp1) {
  const double norm = std::sqrt(std::norm(amp0) + std::norm(amp1));
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw std::invalid_argument("state vector must be nonzero and finite");
  }
  amp0 /= norm;
  amp1 /= norm;
  // Move the phase of amp0 onto amp1.
  const double mag0 = std::abs(amp0);
  if (mag0 > 0.0) {
    const Complex rephase = std::conj(amp0) / mag0;
    amp1 *= rephase;
  }
  amp0_ = Complex(mag0, 0.0);
  amp1_ = amp1;
}

PureState PureState::from_angles(double angle, double phase) {
  return PureState(Complex(std::cos(angle), 0.0), std::polar(std::sin(angle), phase));
}

double PureState::angle() const { return std::atan2(std::abs(amp1_), amp0_.real()); }

double PureState::phase() const { return std::arg(amp1_); }

bool PureState::approx_equal(const PureState& other, double tolerance) const {
  return std::abs(amp0_ - other.amp0_) <= tolerance && std::abs(amp1_ - other.amp1_) <= tolerance;
}

Measurement::Measurement(int index, BasisConfig cfg) : basis_index(index), config(cfg) {
  if (index < 1 || index > cfg.n()) {
    throw std::invalid_argument("measurement index out of range [1, n]");
  }
}

PureState Measurement::projector_state() const { return prepare(basis_index, config); }

PureState prepare(int x, const BasisConfig& config) {
  if (x < 1 || x > config.n()) {
    throw std::invalid_argument("preparation index " + std::to_string(x) +
                                " out of range [1, " + std::to_string(config.n()) + "]");
  }
  return PureState::from_angles(config.theta(), config.phase(x));
}

PureState apply_encode(const PureState& state, EncodeOp op) {
  if (op == EncodeOp::U0) return state;
  return PureState(state.amp0(), -state.amp1());
}

PureState apply_rotation(const PureState& state, ChannelRotation rot) {
  if (rot.delta_theta == 0.0) return state;
  return PureState::from_angles(state.angle() + rot.delta_theta, state.phase());
}

double overlap_probability(const PureState& a, const PureState& b) {
  const Complex inner = std::conj(a.amp0()) * b.amp0() + std::conj(a.amp1()) * b.amp1();
  const double p = std::norm(inner);
  return p > 1.0 ? 1.0 : p;
}

double outcome_probability(const PureState& state, const Measurement& m) {
  return overlap_probability(m.projector_state(), state);
}

int sample_outcome(const PureState& state, const Measurement& m, RandomStream& rng) {
  return rng.uniform() < outcome_probability(state, m) ? 0 : 1;
}

double state_fidelity(const PureState& a, const PureState& b) { return overlap_probability(a, b); }

}  // namespace rdiqsdc
