#include "rdiqsdc/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "rdiqsdc/parallel.hpp"

namespace rdiqsdc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double plain_number(const std::string& text) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("not a number: '" + text + "'");
  return v;
}

bool parse_bool(const std::string& text) {
  const std::string t = lower(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError("not a boolean: '" + text + "'");
}

long long parse_integer(const std::string& text) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not an integer: '" + text + "'");
  }
  if (used != text.size()) throw ConfigError("not an integer: '" + text + "'");
  return v;
}

std::uint64_t parse_u64(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw ConfigError("not an unsigned integer: '" + text + "'");
  }
  if (used != text.size() || text.find('-') != std::string::npos) {
    throw ConfigError("not an unsigned integer: '" + text + "'");
  }
  return v;
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

struct KeySpec {
  const char* key;
  const char* default_value;
  Setter set;
};

const std::vector<KeySpec>& key_table() {
  static const std::vector<KeySpec> table = {
      {"protocol.r", "1000",
       [](RunConfig& c, const std::string& v) {
         const auto r = parse_integer(v);
         if (r < 1) throw ConfigError("protocol.r must be at least 1");
         c.protocol.r = static_cast<std::size_t>(r);
       }},
      {"protocol.n", "16",
       [](RunConfig& c, const std::string& v) {
         try {
           c.protocol.basis = BasisConfig(static_cast<int>(parse_integer(v)), c.protocol.basis.theta());
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"protocol.theta", "pi/4",
       [](RunConfig& c, const std::string& v) {
         try {
           c.protocol.basis = BasisConfig(c.protocol.basis.n(), parse_number(v));
         } catch (const std::invalid_argument& e) {
           throw ConfigError(e.what());
         }
       }},
      {"protocol.policy", "target-p1",
       [](RunConfig& c, const std::string& v) {
         if (v == "uniform") {
           c.protocol.policy.mode = BasisPolicy::Mode::Uniform;
         } else if (v == "target-p1") {
           c.protocol.policy.mode = BasisPolicy::Mode::TargetP1;
         } else {
           throw ConfigError("protocol.policy must be uniform or target-p1");
         }
       }},
      {"protocol.p1", "0.1", [](RunConfig& c, const std::string& v) { c.protocol.policy.target_p0 = parse_number(v); }},
      {"protocol.round2_basis", "policy",
       [](RunConfig& c, const std::string& v) {
         if (v == "policy") c.protocol.round2_basis = Round2Basis::Policy;
         else if (v == "matched") c.protocol.round2_basis = Round2Basis::Matched;
         else if (v == "literal") c.protocol.round2_basis = Round2Basis::Literal;
         else throw ConfigError("protocol.round2_basis must be policy, matched or literal");
       }},
      {"protocol.epsilon", "1e-6",
       [](RunConfig& c, const std::string& v) {
         const double e = parse_number(v);
         if (!(e > 0.0 && e < 1.0)) throw ConfigError("protocol.epsilon must lie in (0, 1)");
         c.protocol.epsilon = e;
       }},
      {"protocol.tolerance", "auto",
       [](RunConfig& c, const std::string& v) {
         if (v == "auto") {
           c.protocol.tolerance_override.reset();
         } else {
           c.protocol.tolerance_override = parse_number(v);
         }
       }},
      {"protocol.abort_on_check_failure", "true",
       [](RunConfig& c, const std::string& v) { c.protocol.abort_on_check_failure = parse_bool(v); }},
      {"protocol.message", "random",
       [](RunConfig& c, const std::string& v) {
         if (v == "random") {
           c.message_source = MessageSource::Random;
         } else if (v == "zeros") {
           c.message_source = MessageSource::Zeros;
         } else if (v == "ones") {
           c.message_source = MessageSource::Ones;
         } else if (!v.empty() && v.find_first_not_of("01") == std::string::npos) {
           c.message_source = MessageSource::Explicit;
           c.message_bits = v;
         } else {
           throw ConfigError("protocol.message must be random, zeros, ones or a 0/1 string");
         }
       }},
      {"protocol.seed", "1", [](RunConfig& c, const std::string& v) { c.protocol.seed = parse_u64(v); }},
      {"physics.distance_km", "0",
       [](RunConfig& c, const std::string& v) { c.protocol.physics.link.distance_km = parse_number(v); }},
      {"physics.eta", "none",
       [](RunConfig& c, const std::string& v) {
         if (v == "none") c.bare_eta.reset();
         else c.bare_eta = parse_number(v);
       }},
      {"physics.alpha", "0.2",
       [](RunConfig& c, const std::string& v) { c.protocol.physics.link.alpha_db_per_km = parse_number(v); }},
      {"physics.eta_c", "0.95", [](RunConfig& c, const std::string& v) { c.protocol.physics.link.eta_c = parse_number(v); }},
      {"physics.eta_m", "1", [](RunConfig& c, const std::string& v) { c.protocol.physics.link.eta_m = parse_number(v); }},
      {"physics.eta_d", "1", [](RunConfig& c, const std::string& v) { c.protocol.physics.link.eta_d = parse_number(v); }},
      {"physics.delta_theta", "0",
       [](RunConfig& c, const std::string& v) { c.protocol.physics.noise.delta_theta = parse_number(v); }},
      {"physics.noise_mode", "uniform",
       [](RunConfig& c, const std::string& v) {
         if (v == "uniform") c.protocol.physics.noise.mode = ChannelNoiseModel::Mode::Uniform;
         else if (v == "per-photon") c.protocol.physics.noise.mode = ChannelNoiseModel::Mode::PerPhoton;
         else throw ConfigError("physics.noise_mode must be uniform or per-photon");
       }},
      {"physics.noise_family", "constant",
       [](RunConfig& c, const std::string& v) {
         if (v == "constant") c.protocol.physics.noise.family = ChannelNoiseModel::Family::Constant;
         else if (v == "uniform-interval") c.protocol.physics.noise.family = ChannelNoiseModel::Family::UniformInterval;
         else throw ConfigError("physics.noise_family must be constant or uniform-interval");
       }},
      {"physics.noise_spread", "0",
       [](RunConfig& c, const std::string& v) { c.protocol.physics.noise.spread = parse_number(v); }},
      {"physics.dark_count", "0",
       [](RunConfig& c, const std::string& v) { c.protocol.physics.dark_count_probability = parse_number(v); }},
      {"memory.per_trip_efficiency", "1",
       [](RunConfig& c, const std::string& v) { c.protocol.physics.memory.per_trip_efficiency = parse_number(v); }},
      {"memory.trips_per_stage", "0",
       [](RunConfig& c, const std::string& v) {
         const auto k = parse_integer(v);
         if (k < 0) throw ConfigError("memory.trips_per_stage must be nonnegative");
         c.protocol.physics.memory.trips_per_stage = static_cast<int>(k);
       }},
      {"memory.max_round_trips", "11",
       [](RunConfig& c, const std::string& v) {
         const auto k = parse_integer(v);
         if (k < 1) throw ConfigError("memory.max_round_trips must be at least 1");
         c.protocol.physics.memory.max_round_trips = static_cast<int>(k);
       }},
      {"adversary.enabled", "false", [](RunConfig& c, const std::string& v) { c.protocol.attack.enabled = parse_bool(v); }},
      {"adversary.p1", "0", [](RunConfig& c, const std::string& v) { c.protocol.attack.p1 = parse_number(v); }},
      {"adversary.p2", "0", [](RunConfig& c, const std::string& v) { c.protocol.attack.p2 = parse_number(v); }},
      {"adversary.round1", "true", [](RunConfig& c, const std::string& v) { c.protocol.attack.attack_round1 = parse_bool(v); }},
      {"adversary.round2", "true", [](RunConfig& c, const std::string& v) { c.protocol.attack.attack_round2 = parse_bool(v); }},
      {"adversary.intercept_messages", "true",
       [](RunConfig& c, const std::string& v) { c.protocol.attack.intercept_messages = parse_bool(v); }},
      {"adversary.p1_grid", "0,0.25,0.5,0.75,1",
       [](RunConfig& c, const std::string& v) { c.attack_scan.p1_grid = parse_grid(v); }},
      {"adversary.p2_grid", "0,0.25,0.5,0.75,1",
       [](RunConfig& c, const std::string& v) { c.attack_scan.p2_grid = parse_grid(v); }},
      {"adversary.trials", "0",
       [](RunConfig& c, const std::string& v) {
         const auto t = parse_integer(v);
         if (t < 0) throw ConfigError("adversary.trials must be nonnegative");
         c.attack_scan.trials = static_cast<std::size_t>(t);
       }},
      {"analysis.axis", "eta",
       [](RunConfig& c, const std::string& v) {
         if (v == "eta") c.analysis.axis = SweepAxis::Eta;
         else if (v == "L" || v == "distance") c.analysis.axis = SweepAxis::Distance;
         else if (v == "delta_theta") c.analysis.axis = SweepAxis::DeltaTheta;
         else throw ConfigError("analysis.axis must be eta, L or delta_theta");
       }},
      {"analysis.grid", "default",
       [](RunConfig& c, const std::string& v) {
         if (v == "default") c.analysis.grid.clear();
         else c.analysis.grid = parse_grid(v);
       }},
      {"analysis.p1_values", "0.001,0.1,0.2,0.3,0.4,0.5",
       [](RunConfig& c, const std::string& v) { c.analysis.p1_values = parse_grid(v); }},
      {"analysis.delta_theta_values", "0,pi/400,pi/40",
       [](RunConfig& c, const std::string& v) { c.analysis.delta_theta_values = parse_grid(v); }},
      {"analysis.r_rep", "1e7", [](RunConfig& c, const std::string& v) { c.analysis.efficiency.r_rep_hz = parse_number(v); }},
      {"analysis.p_s", "1", [](RunConfig& c, const std::string& v) { c.analysis.efficiency.p_s = parse_number(v); }},
      {"analysis.p_e", "1e-3", [](RunConfig& c, const std::string& v) { c.analysis.efficiency.p_e = parse_number(v); }},
      {"analysis.solver_tol", "1e-6",
       [](RunConfig& c, const std::string& v) {
         const double t = parse_number(v);
         if (!(t > 0.0)) throw ConfigError("analysis.solver_tol must be positive");
         c.analysis.solver.tolerance = t;
       }},
      {"output.dir", "out", [](RunConfig& c, const std::string& v) { c.output.dir = v; }},
      {"output.format", "csv",
       [](RunConfig& c, const std::string& v) {
         if (v == "csv") c.output.separator = ',';
         else if (v == "tsv") c.output.separator = '\t';
         else throw ConfigError("output.format must be csv or tsv");
       }},
      {"output.gnuplot", "false", [](RunConfig& c, const std::string& v) { c.output.gnuplot = parse_bool(v); }},
      {"output.transcript", "true", [](RunConfig& c, const std::string& v) { c.output.transcript = parse_bool(v); }},
      {"run.workers", "0",
       [](RunConfig& c, const std::string& v) {
         const auto w = parse_integer(v);
         if (w < 0) throw ConfigError("run.workers must be nonnegative (0: machine parallelism)");
         c.protocol.workers = w == 0 ? default_workers() : static_cast<int>(w);
       }},
  };
  return table;
}

RunConfig defaults() {
  RunConfig c;
  std::map<std::string, std::string> all;
  for (const auto& spec : key_table()) all[spec.key] = spec.default_value;
  apply_settings(c, all);
  return c;
}

}  // namespace

double parse_number(const std::string& raw) {
  std::string text = lower(trim(raw));
  text.erase(std::remove(text.begin(), text.end(), ' '), text.end());
  const auto pos = text.find("pi");
  if (pos == std::string::npos) return plain_number(text);

  std::string before = text.substr(0, pos);
  std::string after = text.substr(pos + 2);
  double factor = 1.0;
  if (!before.empty()) {
    if (before.back() == '*') before.pop_back();
    if (before == "-") factor = -1.0;
    else if (!before.empty()) factor = plain_number(before);
  }
  double divisor = 1.0;
  if (!after.empty()) {
    if (after.front() != '/') throw ConfigError("cannot parse '" + raw + "'");
    divisor = plain_number(after.substr(1));
    if (divisor == 0.0) throw ConfigError("division by zero in '" + raw + "'");
  }
  return factor * std::numbers::pi / divisor;
}

std::vector<double> parse_grid(const std::string& raw) {
  const std::string text = trim(raw);
  if (text.empty()) return {};
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw ConfigError("range grid needs start:stop:step, got '" + raw + "'");
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double step = parse_number(parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("range grid needs start <= stop and step > 0");
    std::vector<double> out;
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5));
    for (std::size_t i = 0; i <= count; ++i) out.push_back(start + step * static_cast<double>(i));
    return out;
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item));
  return out;
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(number) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(number) + ": empty key");
    if (!out.emplace(key, value).second) {
      throw ConfigError("line " + std::to_string(number) + ": duplicate key '" + key + "'");
    }
  }
  return out;
}

void apply_settings(RunConfig& config, const std::map<std::string, std::string>& settings) {
  const auto& table = key_table();
  for (const auto& [key, value] : settings) {
    if (std::none_of(table.begin(), table.end(), [&](const KeySpec& s) { return key == s.key; })) {
      throw ConfigError("unknown configuration key '" + key + "'");
    }
  }
  // Table order, so protocol.n is applied before protocol.theta and so on.
  for (const auto& spec : table) {
    const auto it = settings.find(spec.key);
    if (it == settings.end()) continue;
    try {
      spec.set(config, it->second);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(spec.key) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides) {
  RunConfig config = defaults();
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    apply_settings(config, parse_config_text(buf.str()));
  }
  apply_settings(config, overrides);
  config.validate();
  return config;
}

std::vector<std::pair<std::string, std::string>> documented_defaults() {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& spec : key_table()) out.emplace_back(spec.key, spec.default_value);
  return out;
}

ProtocolParams RunConfig::resolved_protocol() const {
  ProtocolParams p = protocol;
  auto& mem = p.physics.memory;
  if (bare_eta) {
    const double alpha = p.physics.link.alpha_db_per_km;
    p.physics.link = LinkBudget::from_total_efficiency(*bare_eta, alpha);
  } else if (p.physics.link.eta_m < 1.0 && mem.trips_per_stage == 0) {
    // The simulation realizes memory loss through the storage loop only.
    mem.trips_per_stage = 1;
    mem.per_trip_efficiency = p.physics.link.eta_m;
  }
  switch (message_source) {
    case MessageSource::Random: p.message.clear(); break;
    case MessageSource::Zeros: p.message.assign(p.r, 0); break;
    case MessageSource::Ones: p.message.assign(p.r, 1); break;
    case MessageSource::Explicit:
      p.message.clear();
      for (char ch : message_bits) p.message.push_back(ch == '1' ? 1 : 0);
      break;
  }
  return p;
}

void RunConfig::validate() const {
  try {
    ProtocolParams p = resolved_protocol();
    p.physics.link.validate();
    p.attack.validate();
    OffsetDistribution::from_policy(p.policy, p.basis);
    const auto& mem = protocol.physics.memory;
    if (protocol.physics.link.eta_m < 1.0 && (mem.trips_per_stage > 0 || mem.per_trip_efficiency < 1.0)) {
      throw ConfigError("set either physics.eta_m or the memory.* keys, not both");
    }
    if (!(mem.per_trip_efficiency >= 0.0 && mem.per_trip_efficiency <= 1.0)) {
      throw ConfigError("memory.per_trip_efficiency must lie in [0, 1]");
    }
    if (mem.trips_per_stage > mem.max_round_trips) {
      throw ConfigError("memory.trips_per_stage exceeds memory.max_round_trips");
    }
    if (!(p.physics.dark_count_probability >= 0.0 && p.physics.dark_count_probability <= 1.0)) {
      throw ConfigError("physics.dark_count must lie in [0, 1]");
    }
    if (p.tolerance_override && !(*p.tolerance_override >= 0.0)) {
      throw ConfigError("protocol.tolerance must be nonnegative");
    }
    if (!p.message.empty() && p.message.size() != p.r) {
      throw ConfigError("protocol.message has " + std::to_string(p.message.size()) + " bits but protocol.r = " +
                        std::to_string(p.r));
    }
    for (double v : analysis.p1_values) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("analysis.p1_values must lie in [0, 1]");
    }
    for (double v : attack_scan.p1_grid) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("adversary.p1_grid must lie in [0, 1]");
    }
    for (double v : attack_scan.p2_grid) {
      if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("adversary.p2_grid must lie in [0, 1]");
    }
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace rdiqsdc
