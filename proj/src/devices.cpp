#include "rdiqsdc/devices.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace rdiqsdc {

double LinkBudget::eta_t() const { return std::pow(10.0, -alpha_db_per_km * distance_km / 10.0); }

double LinkBudget::q_ab() const { return eta_t() * eta_c * eta_m * eta_d; }

double LinkBudget::q_aba() const {
  const double t = eta_t() * eta_c * eta_m;
  return t * t * eta_d;
}

LinkBudget LinkBudget::from_total_efficiency(double eta, double alpha_db_per_km) {
  if (!(eta > 0.0 && eta <= 1.0)) {
    throw std::invalid_argument("total efficiency must lie in (0, 1]");
  }
  if (!(alpha_db_per_km > 0.0)) {
    throw std::invalid_argument("attenuation must be positive");
  }
  LinkBudget link;
  link.alpha_db_per_km = alpha_db_per_km;
  link.eta_c = link.eta_m = link.eta_d = 1.0;
  link.distance_km = eta == 1.0 ? 0.0 : -10.0 * std::log10(eta) / alpha_db_per_km;
  return link;
}

void LinkBudget::validate() const {
  auto unit = [](double v, const char* name) {
    if (!(v >= 0.0 && v <= 1.0)) throw std::invalid_argument(std::string(name) + " must lie in [0, 1]");
  };
  unit(eta_c, "eta_c");
  unit(eta_m, "eta_m");
  unit(eta_d, "eta_d");
  if (!(distance_km >= 0.0) || !std::isfinite(distance_km)) {
    throw std::invalid_argument("distance must be finite and nonnegative");
  }
  if (!(alpha_db_per_km >= 0.0)) throw std::invalid_argument("alpha must be nonnegative");
}

double ChannelNoiseModel::sample(RandomStream& rng) const {
  if (mode == Mode::Uniform || family == Family::Constant) return delta_theta;
  return delta_theta + spread * (2.0 * rng.uniform() - 1.0);
}

PureState polarization_flip(const PureState& state) { return PureState(state.amp1(), state.amp0()); }

StorageLoop::StorageLoop(double per_trip_efficiency, int max_round_trips)
    : per_trip_efficiency_(per_trip_efficiency), max_round_trips_(max_round_trips) {
  if (!(per_trip_efficiency >= 0.0 && per_trip_efficiency <= 1.0)) {
    throw std::invalid_argument("per-trip efficiency must lie in [0, 1]");
  }
  if (max_round_trips < 1) throw std::invalid_argument("loop lifetime must be at least one trip");
}

void StorageLoop::store(PhotonRecord photon) {
  if (slot_) throw std::logic_error("storage loop already occupied");
  slot_ = std::move(photon);
  lost_record_.reset();
  lost_ = false;
  trips_ = 0;
  // Enters with the EOM off, which switches on behind it to trap the photon.
  eom_ = Eom::On;
}

void StorageLoop::advance_trip(RandomStream& rng) {
  if (!slot_) return;
  ++trips_;
  const bool survives = trips_ <= max_round_trips_ && rng.bernoulli(per_trip_efficiency_);
  if (!survives) {
    slot_->loss = LossSite::Memory;
    lost_record_ = std::move(slot_);
    slot_.reset();
    lost_ = true;
    eom_ = Eom::Off;
  }
}

std::optional<PureState> StorageLoop::exit_state_before_correction() const {
  if (!slot_) return std::nullopt;
  return polarization_flip(slot_->current_state());
}

std::optional<PhotonRecord> StorageLoop::read_out() {
  eom_ = Eom::Off;
  if (!slot_) return std::nullopt;
  PhotonRecord out = std::move(*slot_);
  slot_.reset();
  // Exit flips H/V, the half-wave plate after readout flips it back.
  out.carrier = polarization_flip(polarization_flip(out.carrier));
  return out;
}

PhotonRecord transmit(PhotonRecord photon, const LinkBudget& link, const ChannelNoiseModel& noise,
                      RandomStream& rng) {
  if (photon.lost() || photon.outcome.clicked) return photon;
  photon.rotation_total += noise.sample(rng);
  ++photon.trips;
  if (!rng.bernoulli(link.eta_t())) {
    photon.loss = LossSite::Fiber;
  } else if (!rng.bernoulli(link.eta_c)) {
    photon.loss = LossSite::Coupling;
  }
  return photon;
}

PhotonRecord pass_through_memory(PhotonRecord photon, double per_trip_efficiency, int trips,
                                 int max_round_trips, RandomStream& rng) {
  if (photon.lost()) return photon;
  if (trips == 0 && per_trip_efficiency == 1.0) return photon;
  StorageLoop loop(per_trip_efficiency, max_round_trips);
  loop.store(std::move(photon));
  for (int k = 0; k < trips && loop.occupied(); ++k) loop.advance_trip(rng);
  if (auto out = loop.read_out()) return std::move(*out);
  return *loop.lost_record();
}

DetectionOutcome detect(const PhotonRecord& photon, const Measurement& m, const DetectorModel& det,
                        RandomStream& rng) {
  const double u_click = rng.uniform();
  const double u_outcome = rng.uniform();
  if (!det.blinded && u_click < det.eta_d) {
    return DetectionOutcome::click(u_outcome < outcome_probability(photon.current_state(), m) ? 0 : 1);
  }
  if (det.dark_count_probability > 0.0 && rng.bernoulli(det.dark_count_probability)) {
    return DetectionOutcome::click(rng.bernoulli(0.5) ? 0 : 1);
  }
  return DetectionOutcome::no_click();
}

}  // namespace rdiqsdc
