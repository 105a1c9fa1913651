#include "rdiqsdc/photon.hpp"

#include <numbers>

namespace rdiqsdc {

PureState PhotonRecord::current_state() const {
  const double flip = (has_message_op && message_op == EncodeOp::U1) ? std::numbers::pi : 0.0;
  return PureState::from_angles(carrier.angle() + rotation_total, carrier.phase() + flip);
}

std::string_view to_string(SequenceTag tag) {
  switch (tag) {
    case SequenceTag::S1: return "S1";
    case SequenceTag::S2: return "S2";
    case SequenceTag::S3: return "S3";
  }
  return "?";
}

std::string_view to_string(LossSite site) {
  switch (site) {
    case LossSite::None: return "none";
    case LossSite::Fiber: return "fiber";
    case LossSite::Coupling: return "coupling";
    case LossSite::Memory: return "memory";
    case LossSite::Detector: return "detector";
  }
  return "?";
}

std::string_view to_string(Party party) {
  switch (party) {
    case Party::None: return "none";
    case Party::Alice: return "alice";
    case Party::Bob: return "bob";
  }
  return "?";
}

}  // namespace rdiqsdc
