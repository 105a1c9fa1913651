#include "rdiqsdc/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace rdiqsdc {

void BlindingAttackParams::validate() const {
  if (!(p1 >= 0.0 && p1 <= 1.0) || !(p2 >= 0.0 && p2 <= 1.0)) {
    throw std::invalid_argument("attack probabilities p1, p2 must lie in [0, 1]");
  }
}

bool bases_close(int a, int b, int n) {
  const int diff = ((a - b) % n + n) % n;
  const int circular = std::min(diff, n - diff);
  // 2 pi k / n <= pi / 2  <=>  4 k <= n
  return 4 * circular <= n;
}

int draw_eve_basis(int measuring_index, int n, double p2, RandomStream& rng) {
  const bool want_close = rng.bernoulli(p2);
  std::vector<int> pool;
  pool.reserve(static_cast<std::size_t>(n));
  for (int e = 1; e <= n; ++e) {
    if (bases_close(e, measuring_index, n) == want_close) pool.push_back(e);
  }
  // The close set always contains the measuring index; for n >= 3 the far set
  // is never empty either.
  return pool[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(pool.size()) - 1))];
}

DetectionOutcome blind_and_fake(int eve_basis, int measuring_index, int n) {
  return DetectionOutcome::click(bases_close(eve_basis, measuring_index, n) ? 0 : 1, true);
}

DetectionOutcome blind_and_fake(const PhotonRecord& /*photon*/, int measuring_index, int n,
                                const BlindingAttackParams& params, RandomStream& rng) {
  const int eve = draw_eve_basis(measuring_index, n, params.p2, rng);
  return blind_and_fake(eve, measuring_index, n);
}

EveKnowledge intercept_message_photon(PhotonRecord& photon, int n, double theta, RandomStream& rng) {
  EveKnowledge k;
  k.basis = static_cast<int>(rng.uniform_int(1, n));
  const double phase = 2.0 * std::numbers::pi * k.basis / n;
  const PureState eve_state = PureState::from_angles(theta, phase);
  const double p0 = overlap_probability(eve_state, photon.current_state());
  k.resent_outcome = rng.uniform() < p0 ? 0 : 1;
  k.matched_preparation = k.basis == photon.prep_index && k.resent_outcome == 0;

  photon.carrier = k.resent_outcome == 0
                       ? eve_state
                       : PureState::from_angles(std::numbers::pi / 2.0 - theta, phase + std::numbers::pi);
  photon.rotation_total = 0.0;
  photon.attacked_pass = 1;
  return k;
}

EveIntercept second_pass_intercept(const PhotonRecord& encoded_photon, const EveKnowledge& /*knowledge*/) {
  const int bit = encoded_photon.has_message_op && encoded_photon.message_op == EncodeOp::U1 ? 1 : 0;
  return {bit, true};
}

double predict_attacked_distribution(double p1_target, const BlindingAttackParams& params) {
  return (1.0 - params.p1) * p1_target + params.p1 * params.p2;
}

double literal_attacked_expression(double p1_target, const BlindingAttackParams& params) {
  return (1.0 - params.p1) * p1_target / 2.0 + 0.5 * params.p1 * params.p2;
}

double binomial_abort_probability(double q, double p1_target, std::size_t m, double tolerance) {
  if (m == 0) return 0.0;
  const double md = static_cast<double>(m);
  const double lo = md * (p1_target - tolerance);
  const double hi = md * (p1_target + tolerance);
  if (q <= 0.0) return (0.0 < lo || 0.0 > hi) ? 1.0 : 0.0;
  if (q >= 1.0) return (md < lo || md > hi) ? 1.0 : 0.0;

  const double log_q = std::log(q);
  const double log_1mq = std::log1p(-q);
  const double log_m_fact = std::lgamma(md + 1.0);
  double pass = 0.0;
  const double first = std::max(0.0, std::ceil(lo));
  const double last = std::min(md, std::floor(hi));
  if (last < first) return 1.0;
  const auto k_begin = static_cast<std::size_t>(first);
  const auto k_end = static_cast<std::size_t>(last);
  for (std::size_t k = k_begin; k <= k_end; ++k) {
    const double kd = static_cast<double>(k);
    pass += std::exp(log_m_fact - std::lgamma(kd + 1.0) - std::lgamma(md - kd + 1.0) + kd * log_q +
                     (md - kd) * log_1mq);
  }
  return std::clamp(1.0 - pass, 0.0, 1.0);
}

double detection_power(double p1_target, const BlindingAttackParams& params, std::size_t m,
                       double tolerance) {
  return binomial_abort_probability(predict_attacked_distribution(p1_target, params), p1_target, m,
                                    tolerance);
}

}  // namespace rdiqsdc
