#pragma once

#include <cstddef>

#include "rdiqsdc/photon.hpp"
#include "rdiqsdc/random.hpp"

namespace rdiqsdc {

/// Blinding plus fake-state attack. Eve attacks a slot with probability p1;
/// on an attacked check slot her basis is close to the measuring party's with
/// probability p2, which fixes the forced click.
struct BlindingAttackParams {
  bool enabled = false;
  double p1 = 0.0;
  double p2 = 0.0;
  bool attack_round1 = true;
  bool attack_round2 = true;
  bool intercept_messages = true;

  /// Throws std::invalid_argument unless p1, p2 lie in [0, 1].
  void validate() const;
  bool active() const { return enabled && p1 > 0.0; }
};

/// Closeness predicate: phase angles 2 pi a / n and 2 pi b / n at most pi/2 apart.
bool bases_close(int a, int b, int n);

/// Eve's basis for an attacked check slot: uniform over the indices close to
/// `measuring_index` with probability p2, uniform over the rest otherwise.
int draw_eve_basis(int measuring_index, int n, double p2, RandomStream& rng);

/// Outcome of a blinded detector driven by Eve's trigger pulse: g = 0 when
/// Eve's basis is close to the measuring basis, else g = 1. No Born sampling.
DetectionOutcome blind_and_fake(int eve_basis, int measuring_index, int n);

/// Draws Eve's basis for the slot and returns the forced outcome.
DetectionOutcome blind_and_fake(const PhotonRecord& photon, int measuring_index, int n,
                                const BlindingAttackParams& params, RandomStream& rng);

/// What Eve keeps from an attacked message photon in the first pass.
struct EveKnowledge {
  int basis = 1;               // basis she measured in (uniform over [1, n])
  int resent_outcome = 0;      // 0: resent |psi_basis>, 1: resent its complement
  bool matched_preparation = false;
};

struct EveIntercept {
  int bit = 0;
  bool correct = false;
};

/// First-pass intercept of a message photon: Born measurement in a uniformly
/// drawn basis, then substitution of the carrier by Eve's resent state.
EveKnowledge intercept_message_photon(PhotonRecord& photon, int n, double theta, RandomStream& rng);

/// Second-pass intercept. Eve knows her resent state, and U1 maps it onto an
/// orthogonal state, so the encoded bit is read exactly (bookkept, not
/// re-simulated).
EveIntercept second_pass_intercept(const PhotonRecord& encoded_photon, const EveKnowledge& knowledge);

/// (1 - p1) P1 + p1 p2: the value the attacked round-one frequency converges to.
double predict_attacked_distribution(double p1_target, const BlindingAttackParams& params);

/// Halved form of the same mixture, as it reads with a /(2r) normalization:
/// (1 - p1) P1 / 2 + p1 p2 / 2. Emitted for comparison only.
double literal_attacked_expression(double p1_target, const BlindingAttackParams& params);

/// Probability that a check over m photons aborts, i.e. |X/m - P1| > tolerance
/// with X ~ Binomial(m, predicted attacked frequency).
double detection_power(double p1_target, const BlindingAttackParams& params, std::size_t m,
                       double tolerance);

/// Same with an explicit success probability q.
double binomial_abort_probability(double q, double p1_target, std::size_t m, double tolerance);

struct AttackOutcomeStats {
  double predicted_p0 = 0.0;
  double literal_p0 = 0.0;
  double empirical_p0 = 0.0;
  std::size_t attacked_slots = 0;
  std::size_t intercepted_bits = 0;
  std::size_t eve_correct_bits = 0;
  /// Bits Eve learned per intercepted message photon.
  double eve_information_per_bit() const {
    return intercepted_bits == 0 ? 0.0 : static_cast<double>(eve_correct_bits) / intercepted_bits;
  }
};

}  // namespace rdiqsdc
