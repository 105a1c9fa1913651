#pragma once

#include <optional>

#include "rdiqsdc/photon.hpp"
#include "rdiqsdc/random.hpp"

namespace rdiqsdc {

/// Efficiency parameters of one link and the detection gains derived from them.
struct LinkBudget {
  double distance_km = 0.0;  // one-way
  double alpha_db_per_km = 0.2;
  double eta_c = 0.95;
  double eta_m = 1.0;
  double eta_d = 1.0;

  /// Fiber transmission 10^(-alpha L / 10).
  double eta_t() const;
  /// eta_t eta_c eta_m eta_d.
  double q_ab() const;
  /// eta_t^2 eta_c^2 eta_m^2 eta_d.
  double q_aba() const;

  /// Link whose one-way gain equals eta: ideal coupling, memory and detector,
  /// fiber length chosen so that eta_t = eta.
  static LinkBudget from_total_efficiency(double eta, double alpha_db_per_km = 0.2);

  /// Throws std::invalid_argument on out-of-range efficiencies or distance.
  void validate() const;
};

/// Per-trip amplitude-angle noise.
struct ChannelNoiseModel {
  enum class Mode { Uniform, PerPhoton };
  enum class Family { Constant, UniformInterval };

  Mode mode = Mode::Uniform;
  double delta_theta = 0.0;
  Family family = Family::Constant;
  double spread = 0.0;  // half-width for UniformInterval

  /// Uniform mode and the Constant family never touch the stream.
  double sample(RandomStream& rng) const;
};

struct DetectorModel {
  double eta_d = 1.0;
  bool blinded = false;
  double dark_count_probability = 0.0;
};

/// All-optical storage loop: the EOM gates circulation, the loop flips H/V on
/// exit and a half-wave plate after readout restores it.
class StorageLoop {
 public:
  enum class Eom { Off, On };

  StorageLoop(double per_trip_efficiency = 1.0, int max_round_trips = 11);

  /// Throws std::logic_error if the loop already holds a photon.
  void store(PhotonRecord photon);

  /// One circulation. The photon survives with per_trip_efficiency; a trip
  /// past max_round_trips always loses it.
  void advance_trip(RandomStream& rng);

  /// Empties the loop. Returns nullopt when empty or when the photon was lost
  /// (the caller keeps the record via lost_record()).
  std::optional<PhotonRecord> read_out();

  /// State leaving the loop before the corrector plate (H and V swapped).
  std::optional<PureState> exit_state_before_correction() const;

  bool occupied() const { return slot_.has_value(); }
  bool photon_lost() const { return lost_; }
  int round_trips() const { return trips_; }
  Eom eom() const { return eom_; }
  double per_trip_efficiency() const { return per_trip_efficiency_; }
  int max_round_trips() const { return max_round_trips_; }

  /// Record of the photon lost in the most recent occupancy, if any.
  const std::optional<PhotonRecord>& lost_record() const { return lost_record_; }

 private:
  double per_trip_efficiency_;
  int max_round_trips_;
  Eom eom_ = Eom::Off;
  std::optional<PhotonRecord> slot_;
  std::optional<PhotonRecord> lost_record_;
  int trips_ = 0;
  bool lost_ = false;
};

/// H <-> V swap performed by the loop on exit.
PureState polarization_flip(const PureState& state);

/// Channel pass: rotation, then fiber loss, then coupling loss.
PhotonRecord transmit(PhotonRecord photon, const LinkBudget& link, const ChannelNoiseModel& noise,
                      RandomStream& rng);

/// Runs the photon through a fresh storage loop for `trips` circulations.
/// Marks the record as lost in memory when it does not come back.
PhotonRecord pass_through_memory(PhotonRecord photon, double per_trip_efficiency, int trips,
                                 int max_round_trips, RandomStream& rng);

/// Single-photon detection. A blinded detector ignores single photons.
DetectionOutcome detect(const PhotonRecord& photon, const Measurement& m, const DetectorModel& det,
                        RandomStream& rng);

}  // namespace rdiqsdc
