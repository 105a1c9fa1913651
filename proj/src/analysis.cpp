#include "rdiqsdc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rdiqsdc/parallel.hpp"
#include "rdiqsdc/protocol.hpp"

namespace rdiqsdc {

namespace {

/// Overlap |<psi_meas| U(d) |psi_prep>|^2 for offset phase phi on the
/// rotated family: c^2 C^2 + s^2 S^2 + 2 c s C S cos(phi).
struct RotatedOverlap {
  double constant;
  double cos_coefficient;

  RotatedOverlap(double theta, double rotation) {
    const double c = std::cos(theta), s = std::sin(theta);
    const double C = std::cos(theta + rotation), S = std::sin(theta + rotation);
    constant = c * c * C * C + s * s * S * S;
    cos_coefficient = 2.0 * c * s * C * S;
  }
  double at(double mean_cos) const { return constant + cos_coefficient * mean_cos; }
};

/// Mean cos(2 pi k / n) implied by the noiseless P(g = 0).
double mean_offset_cosine(double p1, double theta) {
  const RotatedOverlap ideal(theta, 0.0);
  return (p1 - ideal.constant) / ideal.cos_coefficient;
}

template <typename F>
double bisect(F&& f, double lo, double hi, double tolerance) {
  double f_lo = f(lo);
  while (hi - lo > tolerance) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if ((f_mid > 0.0) == (f_lo > 0.0)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

void CapacityParams::validate() const {
  if (!(p1 >= 0.0 && p1 <= 1.0)) throw std::invalid_argument("P1 must lie in [0, 1]");
  if (!(gains.q_ab >= 0.0 && gains.q_ab <= 1.0) || !(gains.q_aba >= 0.0 && gains.q_aba <= 1.0)) {
    throw std::invalid_argument("gains must lie in [0, 1]");
  }
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("binary entropy needs x in [0, 1]");
  auto term = [](double v) { return v <= 0.0 ? 0.0 : -v * std::log(v); };
  return (term(x) + term(1.0 - x)) / std::numbers::ln2;
}

ErrorBudget error_budget(const CapacityParams& params) {
  params.validate();
  const double mean_cos = mean_offset_cosine(params.p1, params.theta);
  const double ideal = params.p1;
  const double after_one = RotatedOverlap(params.theta, params.delta_theta).at(mean_cos);
  const double after_two = RotatedOverlap(params.theta, 2.0 * params.delta_theta).at(mean_cos);
  const double assign = std::min(params.p1, 1.0 - params.p1);

  ErrorBudget e;
  e.e_ab = params.gains.q_ab * std::abs(ideal - after_one);
  e.e_aba = params.gains.q_aba * std::abs(ideal - after_two);
  e.e_ab_loss = (1.0 - params.gains.q_ab) * assign;
  e.e_aba_loss = (1.0 - params.gains.q_aba) * assign;
  return e;
}

ErrorBudget error_budget_from_offsets(const OffsetDistribution& offsets, double theta, double delta_theta,
                                      const Gains& gains) {
  const int n = offsets.n();
  const RotatedOverlap ideal(theta, 0.0), one(theta, delta_theta), two(theta, 2.0 * delta_theta);
  double diff_one = 0.0, diff_two = 0.0, assign = 0.0;
  for (int k = 0; k < n; ++k) {
    const double w = offsets.weights()[static_cast<std::size_t>(k)];
    const double cosine = std::cos(2.0 * std::numbers::pi * k / n);
    const double p = ideal.at(cosine);
    diff_one += w * (p - one.at(cosine));
    diff_two += w * (p - two.at(cosine));
    assign += w * std::min(p, 1.0 - p);
  }
  ErrorBudget e;
  e.e_ab = gains.q_ab * std::abs(diff_one);
  e.e_aba = gains.q_aba * std::abs(diff_two);
  e.e_ab_loss = (1.0 - gains.q_ab) * assign;
  e.e_aba_loss = (1.0 - gains.q_aba) * assign;
  return e;
}

double expected_check_frequency(const CapacityParams& params, int round) {
  if (round != 1 && round != 2) throw std::invalid_argument("round must be 1 or 2");
  const double mean_cos = mean_offset_cosine(params.p1, params.theta);
  const double rotation = round * params.delta_theta;
  const double q = round == 1 ? params.gains.q_ab : params.gains.q_aba;
  const double clicked_p0 = RotatedOverlap(params.theta, rotation).at(mean_cos);
  const double assigned_p0 = params.p1 > 0.5 ? 1.0 : 0.0;
  return q * clicked_p0 + (1.0 - q) * assigned_p0;
}

CapacityPoint secrecy_capacity(const CapacityParams& params) {
  CapacityPoint point;
  point.params = params;
  point.errors = error_budget(params);
  const double e_ab = std::clamp(point.errors.total_ab(), 0.0, 1.0);
  const double e_aba = std::clamp(point.errors.total_aba(), 0.0, 1.0);
  point.i_ab = params.gains.q_aba * (1.0 - binary_entropy(e_aba));
  point.i_be_bound = params.gains.q_ab * binary_entropy(e_ab);
  point.c_s = point.i_ab - point.i_be_bound;
  return point;
}

double secrecy_capacity_value(double p1, double delta_theta, const Gains& gains, double theta) {
  return secrecy_capacity(CapacityParams{p1, theta, delta_theta, gains}).c_s;
}

std::optional<double> eta_threshold(double p1, double delta_theta, SolverOptions opts) {
  auto cs = [&](double eta) { return secrecy_capacity_value(p1, delta_theta, Gains::from_eta(eta)); };
  double upper = 1.0;
  double f_upper = cs(upper);
  for (double eta = 1.0 - opts.scan_step; eta > 0.0; eta -= opts.scan_step) {
    const double f = cs(eta);
    if ((f > 0.0) != (f_upper > 0.0)) return bisect(cs, eta, upper, opts.tolerance);
    upper = eta;
    f_upper = f;
  }
  return std::nullopt;
}

std::optional<double> max_distance(double eta_star, const LinkBudget& link) {
  const double fiber = eta_star / (link.eta_c * link.eta_m * link.eta_d);
  if (!(fiber > 0.0) || fiber > 1.0) return std::nullopt;
  return -(10.0 / link.alpha_db_per_km) * std::log10(fiber);
}

std::optional<double> max_distance(double p1, double delta_theta, const LinkBudget& link, SolverOptions opts) {
  const auto eta = eta_threshold(p1, delta_theta, opts);
  if (!eta) return std::nullopt;
  return max_distance(*eta, link);
}

std::optional<double> delta_theta_threshold(double p1, SolverOptions opts, double upper) {
  auto cs = [&](double d) { return secrecy_capacity_value(p1, d, Gains::from_eta(1.0)); };
  double lower = 0.0;
  double f_lower = cs(lower);
  for (double d = opts.scan_step; d < upper; d += opts.scan_step) {
    const double f = cs(d);
    if ((f > 0.0) != (f_lower > 0.0)) return bisect(cs, lower, d, opts.tolerance);
    lower = d;
    f_lower = f;
  }
  const double f_end = cs(upper);
  if ((f_end > 0.0) != (f_lower > 0.0)) return bisect(cs, lower, upper, opts.tolerance);
  return std::nullopt;
}

double min_capacity_over_noise(double p1, double upper, int samples) {
  double lowest = secrecy_capacity_value(p1, 0.0, Gains::from_eta(1.0));
  for (int i = 1; i < samples; ++i) {
    const double d = upper * i / (samples - 1);
    lowest = std::min(lowest, secrecy_capacity_value(p1, d, Gains::from_eta(1.0)));
  }
  return lowest;
}

FidelityThreshold fidelity_threshold(double delta_theta_star) {
  const double one = std::cos(delta_theta_star);
  const double two = std::cos(2.0 * delta_theta_star);
  return {one * one, two * two};
}

double practical_efficiency(double c_s, const EfficiencyParams& eff) {
  return eff.duty_factor * eff.r_rep_hz * eff.p_s * std::max(c_s, 0.0);
}

std::vector<SweepRow> sweep(SweepAxis axis, const std::vector<double>& grid, const SweepFixed& fixed,
                            int workers) {
  if (grid.size() >= 2) {
    const bool up = grid[1] > grid[0];
    for (std::size_t i = 1; i < grid.size(); ++i) {
      if (up ? !(grid[i] > grid[i - 1]) : !(grid[i] < grid[i - 1])) {
        throw std::invalid_argument("sweep grid must be strictly monotone");
      }
    }
  }
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), workers, [&](std::size_t i) {
    const double v = grid[i];
    CapacityParams params{fixed.p1, fixed.theta, fixed.delta_theta, Gains::from_eta(fixed.eta)};
    double eta = fixed.eta;
    switch (axis) {
      case SweepAxis::Eta:
        eta = v;
        params.gains = Gains::from_eta(v);
        break;
      case SweepAxis::Distance: {
        LinkBudget link = fixed.link;
        link.distance_km = v;
        eta = link.q_ab();
        params.gains = Gains::from_link(link);
        break;
      }
      case SweepAxis::DeltaTheta: params.delta_theta = v; break;
    }
    SweepRow row;
    row.axis_value = v;
    row.eta = eta;
    row.point = secrecy_capacity(params);
    row.point.e_s = practical_efficiency(row.point.c_s, fixed.efficiency);
    rows[i] = row;
  });
  return rows;
}

}  // namespace rdiqsdc
