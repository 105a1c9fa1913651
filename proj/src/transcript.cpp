#include "rdiqsdc/transcript.hpp"

#include <ostream>

#include <json.hpp>

namespace rdiqsdc {

namespace {

using nlohmann::json;

json photon_json(const PhotonRecord& ph, int pass, std::size_t slot) {
  json j;
  j["record"] = "photon";
  j["pass"] = pass;
  j["slot"] = slot;
  j["id"] = ph.id;
  j["seq"] = std::string(to_string(ph.tag));
  j["prep"] = ph.prep_index;
  j["meas"] = ph.measurement_index;
  j["secret_op"] = ph.secret_op == EncodeOp::U1 ? 1 : 0;
  j["message_op"] = ph.has_message_op ? json(ph.message_op == EncodeOp::U1 ? 1 : 0) : json(nullptr);
  j["rotation"] = ph.rotation_total;
  j["trips"] = ph.trips;
  j["loss"] = std::string(to_string(ph.loss));
  j["loss_party"] = std::string(to_string(ph.loss_party));
  j["attacked"] = ph.attacked_pass;
  j["clicked"] = ph.outcome.clicked;
  j["g"] = ph.outcome.g;
  j["forced"] = ph.outcome.forced;
  j["detected_by"] = std::string(to_string(ph.detected_by));
  j["p0_theory"] = ph.theoretical_p0;
  return j;
}

json report_json(const SecurityCheckReport& r) {
  return json{{"round", r.round},
              {"m", r.m},
              {"theoretical_p0", r.theoretical_p0},
              {"empirical_p0", r.empirical_p0},
              {"deviation", r.deviation},
              {"tolerance", r.tolerance},
              {"verdict", r.verdict == Verdict::Pass ? "pass" : "abort"},
              {"clicks", r.clicks},
              {"forced_clicks", r.forced_clicks},
              {"assigned", r.assigned}};
}

json announcements_object(const PublicAnnouncements& a) {
  return json{{"record", "announcements"},
              {"s1_positions", a.s1_positions},
              {"y1", a.y1},
              {"round1_outcomes", a.round1_outcomes},
              {"s3_positions", a.s3_positions},
              {"s2_prime_positions", a.s2_prime_positions},
              {"s2_original_order", a.s2_original_order},
              {"round2_outcomes", a.round2_outcomes},
              {"s3_prime_original_positions", a.s3_prime_original_positions}};
}

json summary_object(const ProtocolTranscript& t) {
  const auto& s = t.summary;
  json j;
  j["record"] = "summary";
  j["completed"] = s.completed;
  j["aborted_round"] = s.aborted_round ? json(*s.aborted_round) : json(nullptr);
  j["round1"] = report_json(s.round1);
  j["round2"] = s.round2 ? report_json(*s.round2) : json(nullptr);
  j["q_ab"] = s.q_ab();
  j["q_aba"] = s.q_aba();
  j["e_ab"] = s.e_ab();
  j["e_ab_loss"] = s.e_ab_loss();
  j["e_aba"] = s.e_aba();
  j["e_aba_loss"] = s.e_aba_loss();
  j["bits_ok"] = s.frame.count(BitStatus::Ok);
  j["bits_lost"] = s.frame.count(BitStatus::Lost);
  j["bits_flipped"] = s.frame.count(BitStatus::Flipped);
  j["losses"] = json{{"none", s.losses.none},
                     {"fiber", s.losses.fiber},
                     {"coupling", s.losses.coupling},
                     {"memory", s.losses.memory},
                     {"detector", s.losses.detector}};
  j["attack"] = json{{"predicted_p0", s.attack.predicted_p0},
                     {"literal_p0", s.attack.literal_p0},
                     {"empirical_p0", s.attack.empirical_p0},
                     {"attacked_slots", s.attack.attacked_slots},
                     {"intercepted_bits", s.attack.intercepted_bits},
                     {"eve_correct_bits", s.attack.eve_correct_bits}};
  return j;
}

json header_object(const ProtocolTranscript& t) {
  const auto& p = t.params;
  const auto& link = p.physics.link;
  return json{{"record", "header"},
              {"schema", kTranscriptSchema},
              {"r", p.r},
              {"n", p.basis.n()},
              {"theta", p.basis.theta()},
              {"policy", p.policy.mode == BasisPolicy::Mode::Uniform ? "uniform" : "target-p1"},
              {"p1", p.policy.target_p0},
              {"seed", p.seed},
              {"epsilon", p.epsilon},
              {"distance_km", link.distance_km},
              {"alpha", link.alpha_db_per_km},
              {"eta_c", link.eta_c},
              {"eta_m", link.eta_m},
              {"eta_d", link.eta_d},
              {"delta_theta", p.physics.noise.delta_theta},
              {"attack", json{{"enabled", p.attack.enabled}, {"p1", p.attack.p1}, {"p2", p.attack.p2}}}};
}

}  // namespace

void write_photon_records(std::ostream& out, const ProtocolTranscript& t) {
  for (std::size_t i = 0; i < t.first_pass.size(); ++i) out << photon_json(t.first_pass[i], 1, i).dump() << '\n';
  for (std::size_t i = 0; i < t.return_pass.size(); ++i) out << photon_json(t.return_pass[i], 2, i).dump() << '\n';
}

void write_transcript_jsonl(std::ostream& out, const ProtocolTranscript& t) {
  out << header_object(t).dump() << '\n';
  write_photon_records(out, t);
  out << announcements_object(t.announcements).dump() << '\n';
  out << summary_object(t).dump() << '\n';
}

std::string announcements_json(const PublicAnnouncements& announcements) {
  return announcements_object(announcements).dump();
}

std::string summary_json(const ProtocolTranscript& transcript) { return summary_object(transcript).dump(); }

}  // namespace rdiqsdc
