#pragma once

#include <iosfwd>
#include <string>

#include "rdiqsdc/protocol.hpp"

namespace rdiqsdc {

inline constexpr const char* kTranscriptSchema = "rdiqsdc-transcript/1";

/// One JSON object per line:
///   {"record":"header", ...}         run parameters
///   {"record":"photon", ...}         one per first-pass and return-pass slot
///   {"record":"announcements", ...}  everything sent on the public channel
///   {"record":"summary", ...}        check reports, gains, errors, losses
void write_transcript_jsonl(std::ostream& out, const ProtocolTranscript& transcript);

/// Photon lines only, in emission order then outgoing order.
void write_photon_records(std::ostream& out, const ProtocolTranscript& transcript);

std::string announcements_json(const PublicAnnouncements& announcements);
std::string summary_json(const ProtocolTranscript& transcript);

}  // namespace rdiqsdc
