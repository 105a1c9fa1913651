#pragma once

#include <numbers>
#include <optional>
#include <vector>

#include "rdiqsdc/devices.hpp"

namespace rdiqsdc {

class OffsetDistribution;

/// Detection gains of the two transmissions.
struct Gains {
  double q_ab = 1.0;
  double q_aba = 1.0;

  /// Bare total efficiency: Q_AB = eta, Q_ABA = eta^2.
  static Gains from_eta(double eta) { return {eta, eta * eta}; }
  static Gains from_link(const LinkBudget& link) { return {link.q_ab(), link.q_aba()}; }
};

struct CapacityParams {
  double p1 = 0.1;                 // theoretical P(g = 0); round two uses the same value
  double theta = std::numbers::pi / 4.0;
  double delta_theta = 0.0;        // per one-way trip
  Gains gains;

  /// Throws std::invalid_argument for P1 outside [0, 1] or gains outside [0, 1].
  void validate() const;
};

struct ErrorBudget {
  double e_ab = 0.0;
  double e_ab_loss = 0.0;
  double e_aba = 0.0;
  double e_aba_loss = 0.0;

  double total_ab() const { return e_ab + e_ab_loss; }
  double total_aba() const { return e_aba + e_aba_loss; }
};

struct CapacityPoint {
  CapacityParams params;
  ErrorBudget errors;
  double i_ab = 0.0;
  double i_be_bound = 0.0;
  double c_s = 0.0;
  std::optional<double> e_s;
};

struct EfficiencyParams {
  double r_rep_hz = 1e7;
  double p_s = 1.0;
  double p_e = 1e-3;  // entanglement-source efficiency, reported only
  double duty_factor = 0.25;
};

/// -x log2 x - (1 - x) log2 (1 - x), with h(0) = h(1) = 0.
/// Throws std::invalid_argument outside [0, 1].
double binary_entropy(double x);

/// Closed-form error budget with P2 = P1 and a uniform per-trip rotation.
/// At theta = pi/4 (mean cos(2 pi k / n) = 2 P1 - 1):
///   e_AB  = Q_AB  |2 P1 - 1| (1 - sin(2 theta + 2 dtheta)) / 2
///   e_ABA = Q_ABA |2 P1 - 1| (1 - sin(2 theta + 4 dtheta)) / 2
///   e'_AB = (1 - Q_AB) min(P1, 1 - P1),  e'_ABA = (1 - Q_ABA) min(P1, 1 - P1)
ErrorBudget error_budget(const CapacityParams& params);

/// Same quantities from an explicit offset distribution, evaluated per offset
/// with exact overlaps: e = Q |sum_k w_k (p_k - p'_k)|, e' = (1 - Q) sum_k w_k min(p_k, 1 - p_k).
/// This is the expectation of the event-level error counts.
ErrorBudget error_budget_from_offsets(const OffsetDistribution& offsets, double theta, double delta_theta,
                                      const Gains& gains);

/// Expected recorded P(g = 0) of a checking round (1 or 2) including
/// no-click assignments, for the closed-form model.
double expected_check_frequency(const CapacityParams& params, int round);

/// C_S = Q_ABA (1 - h(E_ABA)) - Q_AB h(E_AB). Negative values are kept.
CapacityPoint secrecy_capacity(const CapacityParams& params);

double secrecy_capacity_value(double p1, double delta_theta, const Gains& gains,
                              double theta = std::numbers::pi / 4.0);

struct SolverOptions {
  double tolerance = 1e-6;
  double scan_step = 1e-3;
};

/// Largest eta at which C_S(eta) changes sign, refined by bisection.
/// nullopt when C_S keeps one sign over (0, 1].
std::optional<double> eta_threshold(double p1, double delta_theta, SolverOptions opts = {});

/// Inverts eta_t = eta* / (eta_c eta_m eta_d) for the distance.
/// nullopt when the required fiber transmission exceeds one.
std::optional<double> max_distance(double eta_star, const LinkBudget& link);

/// max_distance for the threshold at (P1, dtheta).
std::optional<double> max_distance(double p1, double delta_theta, const LinkBudget& link,
                                   SolverOptions opts = {});

/// First sign change of C_S(dtheta) at eta = 1 on (0, upper), default 0.3 pi.
/// nullopt when C_S stays positive (noise robust) on the interval.
std::optional<double> delta_theta_threshold(double p1, SolverOptions opts = {},
                                            double upper = 0.3 * std::numbers::pi);

/// Smallest C_S over a dense grid of dtheta in [0, upper] at eta = 1.
double min_capacity_over_noise(double p1, double upper, int samples = 20001);

struct FidelityThreshold {
  double single_trip = 1.0;  // cos^2(dtheta*)
  double round_trip = 1.0;   // cos^2(2 dtheta*)
};

FidelityThreshold fidelity_threshold(double delta_theta_star);

/// E_s = duty R_rep p_s max(C_S, 0).
double practical_efficiency(double c_s, const EfficiencyParams& eff);

enum class SweepAxis { Eta, Distance, DeltaTheta };

struct SweepFixed {
  double p1 = 0.1;
  double theta = std::numbers::pi / 4.0;
  double delta_theta = 0.0;
  double eta = 1.0;       // used unless the axis is Eta or Distance
  LinkBudget link;        // used on the Distance axis
  EfficiencyParams efficiency;
};

struct SweepRow {
  double axis_value = 0.0;
  double eta = 0.0;
  CapacityPoint point;
};

/// One row per grid value, in grid order. Throws std::invalid_argument for a
/// non-monotone grid.
std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& grid, const SweepFixed& fixed,
                            int workers = 1);

}  // namespace rdiqsdc
