#pragma once

#include <complex>
#include <numbers>

#include "rdiqsdc/random.hpp"

namespace rdiqsdc {

using Complex = std::complex<double>;

namespace tol {
inline constexpr double kAlgebraic = 1e-12;
inline constexpr double kProbabilitySum = 1e-9;
}  // namespace tol

/// Number of phase settings n and amplitude angle theta of the state family
/// cos(theta)|0> + exp(i 2 pi x / n) sin(theta)|1>.
class BasisConfig {
 public:
  static constexpr double kDefaultTheta = std::numbers::pi / 4.0;

  /// Throws std::invalid_argument unless n >= 3, n != 4 and 0 < theta < pi/2.
  explicit BasisConfig(int n, double theta = kDefaultTheta);

  int n() const { return n_; }
  double theta() const { return theta_; }

  /// Phase 2 pi x / n of setting x.
  double phase(int x) const;

  friend bool operator==(const BasisConfig&, const BasisConfig&) = default;

 private:
  int n_;
  double theta_;
};

/// Normalized single-photon state a0|0> + a1|1>, stored with a0 real and
/// nonnegative (global phase removed).
class PureState {
 public:
  /// Normalizes and canonicalizes. Throws std::invalid_argument on a zero vector.
  PureState(Complex amp0, Complex amp1);

  /// cos(angle)|0> + exp(i phase) sin(angle)|1>.
  static PureState from_angles(double angle, double phase);

  Complex amp0() const { return amp0_; }
  Complex amp1() const { return amp1_; }

  /// Amplitude angle in [0, pi/2] and relative phase of the canonical form.
  double angle() const;
  double phase() const;

  double norm_squared() const { return std::norm(amp0_) + std::norm(amp1_); }

  /// Equality up to global phase within `tolerance` on the canonical amplitudes.
  bool approx_equal(const PureState& other, double tolerance = tol::kAlgebraic) const;

 private:
  PureState() = default;
  Complex amp0_{1.0, 0.0};
  Complex amp1_{0.0, 0.0};
};

enum class EncodeOp { U0, U1 };

/// Projective measurement onto |psi_w> of the configured family.
struct Measurement {
  int basis_index;
  BasisConfig config;

  /// Throws std::invalid_argument for an index outside [1, n].
  Measurement(int basis_index, BasisConfig config);

  PureState projector_state() const;
};

/// Channel-noise rotation of the amplitude angle by delta_theta.
struct ChannelRotation {
  double delta_theta = 0.0;
};

PureState prepare(int x, const BasisConfig& config);

PureState apply_encode(const PureState& state, EncodeOp op);

/// Advances the amplitude angle by rot.delta_theta keeping the relative
/// phase: cos(a)|0> + e^{i phi} sin(a)|1> -> cos(a+d)|0> + e^{i phi} sin(a+d)|1>.
/// The rotation is written as a real SO(2) matrix in the frame of the
/// state's own phase, so compositions add angles exactly.
PureState apply_rotation(const PureState& state, ChannelRotation rot);

/// |<psi_w|state>|^2, the probability of outcome g = 0.
double outcome_probability(const PureState& state, const Measurement& m);

/// |<a|b>|^2.
double overlap_probability(const PureState& a, const PureState& b);

/// Born-rule sample: 0 with probability outcome_probability(state, m).
int sample_outcome(const PureState& state, const Measurement& m, RandomStream& rng);

double state_fidelity(const PureState& a, const PureState& b);

}  // namespace rdiqsdc
