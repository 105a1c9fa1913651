#pragma once

#include <cstdint>
#include <string_view>

#include "rdiqsdc/quantum.hpp"

namespace rdiqsdc {

enum class SequenceTag : std::uint8_t { S1, S2, S3 };

enum class Party : std::uint8_t { None, Alice, Bob };

/// Where a photon disappeared. Sites are mutually exclusive.
enum class LossSite : std::uint8_t { None, Fiber, Coupling, Memory, Detector };

struct DetectionOutcome {
  bool clicked = false;
  int g = -1;           // 0 or 1 on click, -1 otherwise
  bool forced = false;  // outcome set by a fake pulse on a blinded detector

  static DetectionOutcome no_click() { return {}; }
  static DetectionOutcome click(int g, bool forced = false) { return {true, g, forced}; }
};

/// Life history of one photon.
struct PhotonRecord {
  std::uint32_t id = 0;
  SequenceTag tag = SequenceTag::S1;
  int prep_index = 1;

  /// State as it left Alice: preparation plus her secret op on S3.
  PureState sent_state = PureState::from_angles(0.0, 0.0);
  EncodeOp secret_op = EncodeOp::U0;

  bool has_message_op = false;
  EncodeOp message_op = EncodeOp::U0;

  /// State that is physically travelling before channel noise and Bob's
  /// encoding; equals sent_state unless an attacker substituted it.
  PureState carrier = PureState::from_angles(0.0, 0.0);
  double rotation_total = 0.0;
  int trips = 0;

  LossSite loss = LossSite::None;
  Party loss_party = Party::None;

  /// Pass in which Eve took over the slot: 0 never, 1 first pass, 2 return pass.
  int attacked_pass = 0;

  int measurement_index = 0;
  double theoretical_p0 = 0.0;
  DetectionOutcome outcome;
  Party detected_by = Party::None;

  bool lost() const { return loss != LossSite::None; }
  bool attacked() const { return attacked_pass != 0; }

  /// Current state: carrier with accumulated rotation and Bob's phase flip.
  /// The rotation is kept as a running total so successive channel passes
  /// add angles even past the canonical range [0, pi/2].
  PureState current_state() const;
};

std::string_view to_string(SequenceTag tag);
std::string_view to_string(LossSite site);
std::string_view to_string(Party party);

}  // namespace rdiqsdc
