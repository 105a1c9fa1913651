#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "rdiqsdc/adversary.hpp"
#include "rdiqsdc/devices.hpp"
#include "rdiqsdc/photon.hpp"
#include "rdiqsdc/quantum.hpp"

namespace rdiqsdc {

/// Raised when announcements or inputs do not fit the protocol state.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// How the measuring party picks its basis relative to the preparation index.
struct BasisPolicy {
  enum class Mode { Uniform, TargetP1 };
  Mode mode = Mode::TargetP1;
  double target_p0 = 0.1;

  static BasisPolicy uniform() { return {Mode::Uniform, 0.5}; }
  static BasisPolicy target(double p0) { return {Mode::TargetP1, p0}; }
};

/// Distribution of the offset (prep - meas) mod n.
class OffsetDistribution {
 public:
  /// Resolves a policy for the given basis configuration. In target mode the
  /// weight is split between the two cos^2(pi k / n) levels bracketing the
  /// target, spread evenly over the offsets sharing each level.
  /// Throws std::invalid_argument if the target is not reachable for this n.
  static OffsetDistribution from_policy(const BasisPolicy& policy, const BasisConfig& config);

  explicit OffsetDistribution(std::vector<double> weights);

  int n() const { return static_cast<int>(weights_.size()); }
  const std::vector<double>& weights() const { return weights_; }

  /// sum_k w_k |<psi_{x-k}|psi_x>|^2 for amplitude angle theta.
  double expected_p0(double theta) const;

  int sample(RandomStream& rng) const;

 private:
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

/// Noiseless overlap |<psi_meas|psi_prep>|^2 for the configured family.
double ideal_p0(int prep_index, int meas_index, const BasisConfig& config);

/// Hoeffding deviation bound sqrt(ln(2/eps) / (2m)).
double hoeffding_tolerance(std::size_t m, double epsilon);

enum class Verdict { Pass, Abort };

struct SecurityCheckReport {
  int round = 1;
  std::size_t m = 0;
  double theoretical_p0 = 0.0;
  double empirical_p0 = 0.0;
  double deviation = 0.0;
  double tolerance = 0.0;
  Verdict verdict = Verdict::Pass;
  std::size_t clicks = 0;
  std::size_t forced_clicks = 0;
  std::size_t assigned = 0;
};

/// Running sum with a standard error of the mean.
struct Accumulator {
  double sum = 0.0;
  double sum_sq = 0.0;
  std::size_t count = 0;

  void add(double x) {
    sum += x;
    sum_sq += x * x;
    ++count;
  }
  double mean() const { return count == 0 ? 0.0 : sum / static_cast<double>(count); }
  double standard_error() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    return std::sqrt(var / n);
  }
};

/// Per-photon event counts of one checking round, in the error-fraction
/// convention of the capacity model:
///   gain         click indicator
///   p0           recorded outcome g = 0 (after no-click assignment)
///   state_error  click * (theoretical p0 - 1[g = 0])
///   loss_error   no-click * min(p0, 1 - p0)
struct RoundStatistics {
  Accumulator gain;
  Accumulator p0;
  Accumulator state_error;
  Accumulator loss_error;

  double gain_value() const { return gain.mean(); }
  double state_error_value() const { return std::abs(state_error.mean()); }
  double loss_error_value() const { return loss_error.mean(); }
  double total_error() const { return state_error_value() + loss_error_value(); }
  double total_error_stderr() const { return state_error.standard_error() + loss_error.standard_error(); }
};

/// Where the round-two measuring party takes its basis index from.
enum class Round2Basis {
  Policy,   // drawn from the basis policy relative to d_i; realizes P2 = P1
  Matched,  // the photon's own preparation index, read through the permutation
  Literal,  // b_i in original S2 order, measured against S2' position i
};

struct MemoryConfig {
  double per_trip_efficiency = 1.0;
  int trips_per_stage = 0;
  int max_round_trips = 11;

  /// per_trip_efficiency ^ trips_per_stage.
  double stage_efficiency() const;
};

struct PhysicsConfig {
  LinkBudget link;
  ChannelNoiseModel noise;
  MemoryConfig memory;
  double dark_count_probability = 0.0;

  /// Link budget the simulation realizes: eta_m taken from the memory model.
  LinkBudget effective_link() const;
};

struct ProtocolParams {
  std::size_t r = 1000;
  BasisConfig basis{16};
  BasisPolicy policy = BasisPolicy::target(0.1);
  Round2Basis round2_basis = Round2Basis::Policy;
  PhysicsConfig physics;
  BlindingAttackParams attack;
  double epsilon = 1e-6;
  std::optional<double> tolerance_override;
  bool abort_on_check_failure = true;
  std::vector<std::uint8_t> message;  // empty: random payload of length r
  std::uint64_t seed = 1;
  int workers = 1;

  double tolerance(std::size_t m) const;
};

/// Sequence bookkeeping. Positions refer to Alice's emission order (0..3r-1)
/// for the first pass and to Bob's outgoing order (0..2r-1) for the return.
struct SequenceLedger {
  int n = 0;
  std::vector<int> x;                  // preparation index of every emitted photon
  std::vector<std::uint32_t> s1_positions, s2_positions, s3_positions;
  std::vector<int> x1, x2, x3;         // a_i, b_i, c_i
  std::vector<int> y1;                 // Bob's round-one measurement indices w_m

  // Filled by step four.
  std::vector<std::uint32_t> outgoing;  // outgoing slot j carries combined index outgoing[j]
                                        // (< r: S2[k], otherwise S3[k - r])
  std::vector<std::uint32_t> s2_prime_positions, s3_prime_positions;
  std::vector<std::uint32_t> s2_prime_source;  // S2 index of each S2' photon
  std::vector<std::uint32_t> s3_prime_source;  // S3 index of each S3' photon
  std::vector<int> x4;                         // d_i

  // Filled by step five.
  std::vector<int> round2_measurement;  // Alice's basis index per S2' photon

  std::size_t r() const { return x1.size(); }
};

/// Classical data put on the public channel. Contains positions, basis
/// indices and outcomes only.
struct PublicAnnouncements {
  std::vector<std::uint32_t> s1_positions;
  std::vector<int> y1;
  std::vector<int> round1_outcomes;
  std::vector<std::uint32_t> s3_positions;
  std::vector<std::uint32_t> s2_prime_positions;
  std::vector<std::uint32_t> s2_original_order;
  std::vector<int> round2_outcomes;
  std::vector<std::uint32_t> s3_prime_original_positions;
};

enum class BitStatus { Ok, Lost, Flipped };

struct MessageFrame {
  std::vector<std::uint8_t> payload;
  std::vector<int> decoded;  // 0/1, or -1 for lost
  std::vector<BitStatus> status;

  std::size_t count(BitStatus s) const;
};

struct Preparation {
  SequenceLedger ledger;
  std::vector<PhotonRecord> photons;  // emission order
};

/// Step 1: 3r photons, uniform preparation indices, random split into
/// S1/S2/S3, Alice's secret U0/U1 on S3, Bob's round-one indices from the policy.
Preparation step1_prepare(std::size_t r, const BasisConfig& config, const OffsetDistribution& policy,
                          std::uint64_t seed, int workers = 1);

/// Step 2 (and the return pass): channel, interposed attack, memory.
void channel_pass(std::vector<PhotonRecord>& photons, const std::vector<std::uint32_t>& positions,
                  const PhysicsConfig& physics, std::uint64_t seed, std::string_view purpose, int workers);

/// Step 3. Bob measures every S1 photon with w_m; no-clicks are assigned per
/// photon (p0 <= 0.5 -> g = 1, else g = 0).
SecurityCheckReport step3_first_check(SequenceLedger& ledger, std::vector<PhotonRecord>& photons,
                                      const ProtocolParams& params, RoundStatistics* stats = nullptr);

/// Step 4. Encodes `message` on S3 and shuffles S2 and S3 uniformly into a
/// 2r outgoing stream. Returns the outgoing photons.
std::vector<PhotonRecord> step4_encode_and_shuffle(SequenceLedger& ledger,
                                                   const std::vector<PhotonRecord>& photons,
                                                   const std::vector<std::uint8_t>& message,
                                                   std::uint64_t seed);

/// Step 5. Alice measures each S2' photon.
SecurityCheckReport step5_second_check(SequenceLedger& ledger, std::vector<PhotonRecord>& outgoing,
                                       const ProtocolParams& params, const OffsetDistribution& policy,
                                       RoundStatistics* stats = nullptr);

/// Step 6. Measures each surviving S3 photon against the exact state Alice
/// sent; g = 0 -> bit 0, g = 1 -> bit 1.
MessageFrame step6_decode(const SequenceLedger& ledger, std::vector<PhotonRecord>& outgoing,
                          const std::vector<std::uint8_t>& payload, const ProtocolParams& params);

/// Inverse of a permutation given as a vector of images.
std::vector<std::uint32_t> invert_permutation(const std::vector<std::uint32_t>& perm);

struct LossAccounting {
  std::size_t none = 0, fiber = 0, coupling = 0, memory = 0, detector = 0;
  std::size_t total() const { return none + fiber + coupling + memory + detector; }
};

struct TranscriptSummary {
  bool completed = false;            // all six steps ran
  std::optional<int> aborted_round;  // first failing check, if any
  SecurityCheckReport round1;
  std::optional<SecurityCheckReport> round2;
  RoundStatistics stats1;
  RoundStatistics stats2;
  MessageFrame frame;
  LossAccounting losses;
  AttackOutcomeStats attack;

  double q_ab() const { return stats1.gain_value(); }
  double q_aba() const { return stats2.gain_value(); }
  double e_ab() const { return stats1.state_error_value(); }
  double e_ab_loss() const { return stats1.loss_error_value(); }
  double e_aba() const { return stats2.state_error_value(); }
  double e_aba_loss() const { return stats2.loss_error_value(); }
  double total_e_ab() const { return stats1.total_error(); }
  double total_e_aba() const { return stats2.total_error(); }
};

struct ProtocolTranscript {
  ProtocolParams params;
  SequenceLedger ledger;
  PublicAnnouncements announcements;
  std::vector<PhotonRecord> first_pass;  // emission order, 3r records
  std::vector<PhotonRecord> return_pass; // outgoing order, 2r records
  TranscriptSummary summary;
};

/// Runs all six steps. Deterministic per seed and independent of `workers`.
/// A failed check ends the run with a report unless abort_on_check_failure is off.
ProtocolTranscript run_full_protocol(const ProtocolParams& params);

}  // namespace rdiqsdc
