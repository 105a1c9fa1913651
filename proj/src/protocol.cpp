#include "rdiqsdc/protocol.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

#include "rdiqsdc/parallel.hpp"

namespace rdiqsdc {

namespace {

int wrap_index(int value, int n) { return ((value - 1) % n + n) % n + 1; }

/// Fisher-Yates over [0, count) with an explicit stream so the order is the
/// same on every standard library.
std::vector<std::uint32_t> random_permutation(std::size_t count, RandomStream& rng) {
  std::vector<std::uint32_t> perm(count);
  std::iota(perm.begin(), perm.end(), 0U);
  for (std::size_t i = count; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

// Overlaps that equal 1/2 analytically land on either side of it in floating point.
int assigned_outcome(double p0) { return p0 <= 0.5 + tol::kAlgebraic ? 1 : 0; }

struct CheckEvent {
  double p0 = 0.0;
  int recorded_g = 1;
  bool clicked = false;
  bool forced = false;
};

SecurityCheckReport summarize_check(int round, const std::vector<CheckEvent>& events, double tolerance,
                                    RoundStatistics* stats) {
  SecurityCheckReport report;
  report.round = round;
  report.m = events.size();
  double sum_p0 = 0.0;
  std::size_t g0 = 0;
  RoundStatistics local;
  for (const auto& e : events) {
    sum_p0 += e.p0;
    if (e.recorded_g == 0) ++g0;
    if (e.clicked) ++report.clicks;
    if (e.forced) ++report.forced_clicks;
    if (!e.clicked) ++report.assigned;
    local.gain.add(e.clicked ? 1.0 : 0.0);
    local.p0.add(e.recorded_g == 0 ? 1.0 : 0.0);
    local.state_error.add(e.clicked ? e.p0 - (e.recorded_g == 0 ? 1.0 : 0.0) : 0.0);
    local.loss_error.add(e.clicked ? 0.0 : std::min(e.p0, 1.0 - e.p0));
  }
  const double m = static_cast<double>(std::max<std::size_t>(report.m, 1));
  report.theoretical_p0 = sum_p0 / m;
  report.empirical_p0 = static_cast<double>(g0) / m;
  report.deviation = std::abs(report.empirical_p0 - report.theoretical_p0);
  report.tolerance = tolerance;
  report.verdict = report.deviation <= tolerance ? Verdict::Pass : Verdict::Abort;
  if (stats) *stats = local;
  return report;
}

}  // namespace

OffsetDistribution::OffsetDistribution(std::vector<double> weights) : weights_(std::move(weights)) {
  if (weights_.empty()) throw std::invalid_argument("offset distribution needs at least one weight");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("offset weights must be nonnegative");
    total += w;
  }
  if (std::abs(total - 1.0) > tol::kProbabilitySum) {
    throw std::invalid_argument("offset weights must sum to 1");
  }
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

OffsetDistribution OffsetDistribution::from_policy(const BasisPolicy& policy, const BasisConfig& config) {
  const int n = config.n();
  if (policy.mode == BasisPolicy::Mode::Uniform) {
    return OffsetDistribution(std::vector<double>(static_cast<std::size_t>(n), 1.0 / n));
  }
  const double target = policy.target_p0;
  // Offsets k and n - k share one level; levels decrease with k on [0, n/2].
  const int top = n / 2;
  std::vector<double> level(static_cast<std::size_t>(top) + 1);
  for (int k = 0; k <= top; ++k) level[static_cast<std::size_t>(k)] = ideal_p0(1 + k, 1, config);

  if (!(target <= level.front() + tol::kAlgebraic) || !(target >= level.back() - tol::kAlgebraic)) {
    throw std::invalid_argument("target P(g=0) = " + std::to_string(target) +
                                " is not reachable with n = " + std::to_string(n));
  }
  std::vector<double> weights(static_cast<std::size_t>(n), 0.0);
  auto put = [&](int k, double mass) {
    if (mass <= 0.0) return;
    if (k == 0 || 2 * k == n) {
      weights[static_cast<std::size_t>(k)] += mass;
    } else {
      weights[static_cast<std::size_t>(k)] += mass / 2.0;
      weights[static_cast<std::size_t>(n - k)] += mass / 2.0;
    }
  };
  int k = 0;
  while (k < top && level[static_cast<std::size_t>(k + 1)] > target) ++k;
  if (k == top) {
    put(top, 1.0);
  } else {
    const double hi = level[static_cast<std::size_t>(k)];
    const double lo = level[static_cast<std::size_t>(k + 1)];
    const double lambda = std::clamp((target - lo) / (hi - lo), 0.0, 1.0);
    put(k, lambda);
    put(k + 1, 1.0 - lambda);
  }
  return OffsetDistribution(std::move(weights));
}

double OffsetDistribution::expected_p0(double theta) const {
  const double c2 = std::cos(theta) * std::cos(theta);
  const double s2 = std::sin(theta) * std::sin(theta);
  double total = 0.0;
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    const double phi = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(weights_.size());
    total += weights_[k] * std::norm(Complex(c2, 0.0) + std::polar(s2, phi));
  }
  return total;
}

int OffsetDistribution::sample(RandomStream& rng) const {
  const double u = rng.uniform() * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  const auto k = static_cast<int>(std::distance(cumulative_.begin(), it));
  return std::min(k, n() - 1);
}

double ideal_p0(int prep_index, int meas_index, const BasisConfig& config) {
  return overlap_probability(prepare(meas_index, config), prepare(prep_index, config));
}

double hoeffding_tolerance(std::size_t m, double epsilon) {
  if (m == 0) return 1.0;
  return std::sqrt(std::log(2.0 / epsilon) / (2.0 * static_cast<double>(m)));
}

double MemoryConfig::stage_efficiency() const { return std::pow(per_trip_efficiency, trips_per_stage); }

LinkBudget PhysicsConfig::effective_link() const {
  LinkBudget l = link;
  l.eta_m = memory.stage_efficiency();
  return l;
}

double ProtocolParams::tolerance(std::size_t m) const {
  return tolerance_override ? *tolerance_override : hoeffding_tolerance(m, epsilon);
}

std::size_t MessageFrame::count(BitStatus s) const {
  return static_cast<std::size_t>(std::count(status.begin(), status.end(), s));
}

std::vector<std::uint32_t> invert_permutation(const std::vector<std::uint32_t>& perm) {
  std::vector<std::uint32_t> inv(perm.size());
  for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<std::uint32_t>(i);
  return inv;
}

Preparation step1_prepare(std::size_t r, const BasisConfig& config, const OffsetDistribution& policy,
                          std::uint64_t seed, int workers) {
  if (r == 0) throw std::invalid_argument("r must be at least 1");
  if (policy.n() != config.n()) throw std::invalid_argument("policy and basis disagree on n");
  const std::size_t total = 3 * r;
  const int n = config.n();

  Preparation prep;
  SequenceLedger& ledger = prep.ledger;
  ledger.n = n;
  ledger.x.resize(total);
  prep.photons.resize(total);

  parallel_for(total, workers, [&](std::size_t i) {
    RandomStream rng(seed, "prep", i);
    ledger.x[i] = static_cast<int>(rng.uniform_int(1, n));
  });

  RandomStream split(seed, "partition");
  const auto perm = random_permutation(total, split);
  ledger.s1_positions.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(r));
  ledger.s2_positions.assign(perm.begin() + static_cast<std::ptrdiff_t>(r),
                             perm.begin() + static_cast<std::ptrdiff_t>(2 * r));
  ledger.s3_positions.assign(perm.begin() + static_cast<std::ptrdiff_t>(2 * r), perm.end());
  std::sort(ledger.s1_positions.begin(), ledger.s1_positions.end());
  std::sort(ledger.s2_positions.begin(), ledger.s2_positions.end());
  std::sort(ledger.s3_positions.begin(), ledger.s3_positions.end());

  std::vector<SequenceTag> tags(total);
  for (auto p : ledger.s1_positions) tags[p] = SequenceTag::S1;
  for (auto p : ledger.s2_positions) tags[p] = SequenceTag::S2;
  for (auto p : ledger.s3_positions) tags[p] = SequenceTag::S3;

  parallel_for(total, workers, [&](std::size_t i) {
    PhotonRecord& ph = prep.photons[i];
    ph.id = static_cast<std::uint32_t>(i);
    ph.tag = tags[i];
    ph.prep_index = ledger.x[i];
    if (ph.tag == SequenceTag::S3) {
      RandomStream rng(seed, "secret-op", i);
      ph.secret_op = rng.bernoulli(0.5) ? EncodeOp::U1 : EncodeOp::U0;
    }
    ph.sent_state = apply_encode(prepare(ph.prep_index, config), ph.secret_op);
    ph.carrier = ph.sent_state;
  });

  auto gather = [&](const std::vector<std::uint32_t>& pos) {
    std::vector<int> out(pos.size());
    for (std::size_t k = 0; k < pos.size(); ++k) out[k] = ledger.x[pos[k]];
    return out;
  };
  ledger.x1 = gather(ledger.s1_positions);
  ledger.x2 = gather(ledger.s2_positions);
  ledger.x3 = gather(ledger.s3_positions);

  ledger.y1.resize(r);
  parallel_for(r, workers, [&](std::size_t k) {
    RandomStream rng(seed, "round1-basis", k);
    ledger.y1[k] = wrap_index(ledger.x1[k] - policy.sample(rng), n);
  });
  return prep;
}

void channel_pass(std::vector<PhotonRecord>& photons, const std::vector<std::uint32_t>& positions,
                  const PhysicsConfig& physics, std::uint64_t seed, std::string_view purpose, int workers) {
  const int pass = purpose == "return" ? 2 : 1;
  const Party receiver = pass == 1 ? Party::Bob : Party::Alice;
  parallel_for(positions.size(), workers, [&](std::size_t k) {
    const std::uint32_t p = positions[k];
    PhotonRecord& ph = photons[p];
    if (ph.attacked_pass == pass) return;  // Eve delivers this slot herself
    RandomStream rng(seed, purpose, p);
    ph = transmit(std::move(ph), physics.link, physics.noise, rng);
    ph = pass_through_memory(std::move(ph), physics.memory.per_trip_efficiency,
                             physics.memory.trips_per_stage, physics.memory.max_round_trips, rng);
    if (ph.lost() && ph.loss_party == Party::None) ph.loss_party = receiver;
  });
}

SecurityCheckReport step3_first_check(SequenceLedger& ledger, std::vector<PhotonRecord>& photons,
                                      const ProtocolParams& params, RoundStatistics* stats) {
  const std::size_t r = ledger.s1_positions.size();
  if (ledger.y1.size() != r || ledger.x1.size() != r) {
    throw ProtocolViolation("round-one announcement lengths do not match S1");
  }
  const BasisConfig& config = params.basis;
  DetectorModel det{params.physics.link.eta_d, false, params.physics.dark_count_probability};
  std::vector<CheckEvent> events(r);

  parallel_for(r, params.workers, [&](std::size_t k) {
    const std::uint32_t p = ledger.s1_positions[k];
    if (p >= photons.size()) throw ProtocolViolation("announced S1 position out of range");
    PhotonRecord& ph = photons[p];
    const int w = ledger.y1[k];
    const double p0 = ideal_p0(ledger.x1[k], w, config);
    ph.measurement_index = w;
    ph.theoretical_p0 = p0;
    if (ph.attacked_pass == 1) {
      RandomStream eve(params.seed, "eve-round1", p);
      ph.outcome = blind_and_fake(ph, w, config.n(), params.attack, eve);
    } else if (!ph.lost()) {
      RandomStream rng(params.seed, "detect-round1", p);
      ph.outcome = detect(ph, Measurement(w, config), det, rng);
      if (!ph.outcome.clicked) {
        ph.loss = LossSite::Detector;
        ph.loss_party = Party::Bob;
      }
    }
    if (ph.outcome.clicked) ph.detected_by = Party::Bob;
    events[k] = {p0, ph.outcome.clicked ? ph.outcome.g : assigned_outcome(p0), ph.outcome.clicked,
                 ph.outcome.forced};
  });
  return summarize_check(1, events, params.tolerance(r), stats);
}

std::vector<PhotonRecord> step4_encode_and_shuffle(SequenceLedger& ledger,
                                                   const std::vector<PhotonRecord>& photons,
                                                   const std::vector<std::uint8_t>& message,
                                                   std::uint64_t seed) {
  const std::size_t r = ledger.s3_positions.size();
  if (message.size() != r) {
    throw ProtocolViolation("message length " + std::to_string(message.size()) + " does not match r = " +
                            std::to_string(r));
  }
  RandomStream rng(seed, "shuffle");
  ledger.outgoing = random_permutation(2 * r, rng);
  ledger.s2_prime_positions.clear();
  ledger.s3_prime_positions.clear();
  ledger.s2_prime_source.clear();
  ledger.s3_prime_source.clear();
  ledger.x4.clear();

  std::vector<PhotonRecord> out(2 * r);
  for (std::size_t j = 0; j < 2 * r; ++j) {
    const std::uint32_t c = ledger.outgoing[j];
    if (c < r) {
      out[j] = photons[ledger.s2_positions[c]];
      ledger.s2_prime_positions.push_back(static_cast<std::uint32_t>(j));
      ledger.s2_prime_source.push_back(c);
      ledger.x4.push_back(ledger.x2[c]);
    } else {
      const std::uint32_t k = c - static_cast<std::uint32_t>(r);
      PhotonRecord ph = photons[ledger.s3_positions[k]];
      if (!ph.lost()) {
        ph.has_message_op = true;
        ph.message_op = message[k] ? EncodeOp::U1 : EncodeOp::U0;
      }
      out[j] = std::move(ph);
      ledger.s3_prime_positions.push_back(static_cast<std::uint32_t>(j));
      ledger.s3_prime_source.push_back(k);
    }
  }
  return out;
}

SecurityCheckReport step5_second_check(SequenceLedger& ledger, std::vector<PhotonRecord>& outgoing,
                                       const ProtocolParams& params, const OffsetDistribution& policy,
                                       RoundStatistics* stats) {
  const std::size_t r = ledger.s2_prime_positions.size();
  if (ledger.x4.size() != r || ledger.x2.size() != r || ledger.s2_prime_source.size() != r) {
    throw ProtocolViolation("round-two announcement lengths do not match S2'");
  }
  const BasisConfig& config = params.basis;
  const int n = config.n();
  DetectorModel det{params.physics.link.eta_d, false, params.physics.dark_count_probability};
  ledger.round2_measurement.assign(r, 0);
  std::vector<CheckEvent> events(r);

  parallel_for(r, params.workers, [&](std::size_t i) {
    const std::uint32_t j = ledger.s2_prime_positions[i];
    if (j >= outgoing.size()) throw ProtocolViolation("announced S2' position out of range");
    PhotonRecord& ph = outgoing[j];
    const int d = ledger.x4[i];
    int w = d;
    switch (params.round2_basis) {
      case Round2Basis::Policy: {
        RandomStream rng(params.seed, "round2-basis", i);
        w = wrap_index(d - policy.sample(rng), n);
        break;
      }
      case Round2Basis::Matched: w = d; break;
      case Round2Basis::Literal: w = ledger.x2[i]; break;
    }
    ledger.round2_measurement[i] = w;
    const double p0 = ideal_p0(d, w, config);
    ph.measurement_index = w;
    ph.theoretical_p0 = p0;
    if (ph.attacked_pass == 2) {
      RandomStream eve(params.seed, "eve-round2", j);
      ph.outcome = blind_and_fake(ph, w, n, params.attack, eve);
    } else if (!ph.lost()) {
      RandomStream rng(params.seed, "detect-round2", j);
      ph.outcome = detect(ph, Measurement(w, config), det, rng);
      if (!ph.outcome.clicked) {
        ph.loss = LossSite::Detector;
        ph.loss_party = Party::Alice;
      }
    }
    if (ph.outcome.clicked) ph.detected_by = Party::Alice;
    events[i] = {p0, ph.outcome.clicked ? ph.outcome.g : assigned_outcome(p0), ph.outcome.clicked,
                 ph.outcome.forced};
  });
  return summarize_check(2, events, params.tolerance(r), stats);
}

MessageFrame step6_decode(const SequenceLedger& ledger, std::vector<PhotonRecord>& outgoing,
                          const std::vector<std::uint8_t>& payload, const ProtocolParams& params) {
  const std::size_t r = ledger.s3_prime_positions.size();
  if (payload.size() != r || ledger.s3_prime_source.size() != r) {
    throw ProtocolViolation("S3' announcement does not match the payload length");
  }
  MessageFrame frame;
  frame.payload = payload;
  frame.decoded.assign(r, -1);
  frame.status.assign(r, BitStatus::Lost);
  const double eta_d = params.physics.link.eta_d;

  parallel_for(r, params.workers, [&](std::size_t i) {
    const std::uint32_t j = ledger.s3_prime_positions[i];
    const std::uint32_t k = ledger.s3_prime_source[i];
    PhotonRecord& ph = outgoing[j];
    if (ph.lost()) return;
    RandomStream rng(params.seed, "decode", j);
    const double u_click = rng.uniform();
    const double u_outcome = rng.uniform();
    if (!(u_click < eta_d)) {
      ph.loss = LossSite::Detector;
      ph.loss_party = Party::Alice;
      return;
    }
    const double p0 = overlap_probability(ph.sent_state, ph.current_state());
    const int g = u_outcome < p0 ? 0 : 1;
    ph.theoretical_p0 = p0;
    ph.outcome = DetectionOutcome::click(g);
    ph.detected_by = Party::Alice;
    frame.decoded[k] = g;
    frame.status[k] = g == payload[k] ? BitStatus::Ok : BitStatus::Flipped;
  });
  return frame;
}

namespace {

void account_losses(const std::vector<PhotonRecord>& records, LossAccounting& acc) {
  for (const auto& ph : records) {
    switch (ph.loss) {
      case LossSite::None: ++acc.none; break;
      case LossSite::Fiber: ++acc.fiber; break;
      case LossSite::Coupling: ++acc.coupling; break;
      case LossSite::Memory: ++acc.memory; break;
      case LossSite::Detector: ++acc.detector; break;
    }
  }
}

std::vector<int> outcomes_of(const std::vector<PhotonRecord>& records, const std::vector<std::uint32_t>& pos) {
  std::vector<int> out;
  out.reserve(pos.size());
  for (auto p : pos) out.push_back(records[p].outcome.clicked ? records[p].outcome.g : -1);
  return out;
}

}  // namespace

ProtocolTranscript run_full_protocol(const ProtocolParams& params) {
  params.physics.link.validate();
  params.attack.validate();
  const OffsetDistribution policy = OffsetDistribution::from_policy(params.policy, params.basis);
  const std::size_t r = params.r;
  const int n = params.basis.n();
  const int workers = std::max(params.workers, 1);

  ProtocolTranscript t;
  t.params = params;
  t.params.physics.link = params.physics.effective_link();
  PhysicsConfig physics = params.physics;

  Preparation prep = step1_prepare(r, params.basis, policy, params.seed, workers);
  t.ledger = std::move(prep.ledger);
  t.first_pass = std::move(prep.photons);
  SequenceLedger& ledger = t.ledger;
  auto& summary = t.summary;

  std::vector<std::uint8_t> message = params.message;
  if (message.empty()) {
    message.resize(r);
    for (std::size_t k = 0; k < r; ++k) {
      RandomStream rng(params.seed, "message", k);
      message[k] = rng.bernoulli(0.5) ? 1 : 0;
    }
  }
  if (message.size() != r) throw ProtocolViolation("message length does not match r");

  // First pass: Eve takes over S1 slots (blinding Bob) and message slots.
  std::unordered_map<std::uint32_t, EveKnowledge> eve_knowledge;
  if (params.attack.active()) {
    if (params.attack.attack_round1) {
      for (auto p : ledger.s1_positions) {
        RandomStream rng(params.seed, "eve-select-1", p);
        if (rng.bernoulli(params.attack.p1)) t.first_pass[p].attacked_pass = 1;
      }
    }
    if (params.attack.intercept_messages) {
      for (auto p : ledger.s3_positions) {
        RandomStream rng(params.seed, "eve-select-1", p);
        if (rng.bernoulli(params.attack.p1)) {
          RandomStream meas(params.seed, "eve-intercept", p);
          eve_knowledge[p] = intercept_message_photon(t.first_pass[p], n, params.basis.theta(), meas);
        }
      }
    }
  }

  std::vector<std::uint32_t> all(3 * r);
  std::iota(all.begin(), all.end(), 0U);
  channel_pass(t.first_pass, all, physics, params.seed, "outbound", workers);

  PublicAnnouncements& ann = t.announcements;
  ann.s1_positions = ledger.s1_positions;
  ann.y1 = ledger.y1;

  ProtocolParams run_params = params;
  run_params.workers = workers;
  summary.round1 = step3_first_check(ledger, t.first_pass, run_params, &summary.stats1);
  ann.round1_outcomes = outcomes_of(t.first_pass, ledger.s1_positions);

  summary.attack.predicted_p0 = predict_attacked_distribution(summary.round1.theoretical_p0, params.attack);
  summary.attack.literal_p0 = literal_attacked_expression(summary.round1.theoretical_p0, params.attack);
  summary.attack.empirical_p0 = summary.round1.empirical_p0;

  auto finish = [&] {
    account_losses(t.return_pass.empty() ? t.first_pass : t.return_pass, summary.losses);
    if (!t.return_pass.empty()) {
      // S1 photons never enter the return pass.
      std::vector<PhotonRecord> s1;
      s1.reserve(r);
      for (auto p : ledger.s1_positions) s1.push_back(t.first_pass[p]);
      account_losses(s1, summary.losses);
    }
    for (const auto& ph : t.first_pass) summary.attack.attacked_slots += ph.attacked() ? 1 : 0;
    for (const auto& ph : t.return_pass) summary.attack.attacked_slots += ph.attacked_pass == 2 ? 1 : 0;
  };

  if (summary.round1.verdict == Verdict::Abort) {
    summary.aborted_round = 1;
    if (params.abort_on_check_failure) {
      finish();
      return t;
    }
  }

  ann.s3_positions = ledger.s3_positions;
  t.return_pass = step4_encode_and_shuffle(ledger, t.first_pass, message, params.seed);

  if (params.attack.active() && params.attack.attack_round2) {
    for (auto j : ledger.s2_prime_positions) {
      RandomStream rng(params.seed, "eve-select-2", j);
      if (rng.bernoulli(params.attack.p1)) t.return_pass[j].attacked_pass = 2;
    }
  }
  std::vector<std::uint32_t> back(2 * r);
  std::iota(back.begin(), back.end(), 0U);
  channel_pass(t.return_pass, back, physics, params.seed, "return", workers);

  for (auto j : ledger.s3_prime_positions) {
    const auto& ph = t.return_pass[j];
    if (ph.attacked_pass != 1) continue;
    auto it = eve_knowledge.find(ph.id);
    if (it == eve_knowledge.end()) continue;
    const EveIntercept got = second_pass_intercept(ph, it->second);
    ++summary.attack.intercepted_bits;
    const int truth = ph.has_message_op && ph.message_op == EncodeOp::U1 ? 1 : 0;
    if (got.bit == truth) ++summary.attack.eve_correct_bits;
  }

  ann.s2_prime_positions = ledger.s2_prime_positions;
  summary.round2 = step5_second_check(ledger, t.return_pass, run_params, policy, &summary.stats2);
  ann.s2_original_order = ledger.s2_prime_source;
  ann.round2_outcomes = outcomes_of(t.return_pass, ledger.s2_prime_positions);

  if (summary.round2->verdict == Verdict::Abort) {
    if (!summary.aborted_round) summary.aborted_round = 2;
    if (params.abort_on_check_failure) {
      finish();
      return t;
    }
  }

  ann.s3_prime_original_positions = ledger.s3_prime_source;
  summary.frame = step6_decode(ledger, t.return_pass, message, run_params);
  summary.completed = true;
  finish();
  return t;
}

}  // namespace rdiqsdc
