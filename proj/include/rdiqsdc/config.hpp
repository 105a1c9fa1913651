#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rdiqsdc/analysis.hpp"
#include "rdiqsdc/protocol.hpp"

namespace rdiqsdc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class MessageSource { Random, Zeros, Ones, Explicit };

struct AnalysisBlock {
  SweepAxis axis = SweepAxis::Eta;
  std::vector<double> grid;  // empty: axis default
  std::vector<double> p1_values{0.001, 0.1, 0.2, 0.3, 0.4, 0.5};
  std::vector<double> delta_theta_values;  // empty: {0, pi/400, pi/40}
  EfficiencyParams efficiency;
  SolverOptions solver;
};

struct AttackScanBlock {
  std::vector<double> p1_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::vector<double> p2_grid{0.0, 0.25, 0.5, 0.75, 1.0};
  std::size_t trials = 0;  // repeated runs per grid point for the empirical abort rate
};

struct OutputBlock {
  std::string dir = "out";
  char separator = ',';
  bool gnuplot = false;
  bool transcript = true;
};

struct RunConfig {
  ProtocolParams protocol;
  MessageSource message_source = MessageSource::Random;
  std::string message_bits;
  std::optional<double> bare_eta;  // physics.eta
  AnalysisBlock analysis;
  AttackScanBlock attack_scan;
  OutputBlock output;

  /// Protocol parameters with the message materialized.
  ProtocolParams resolved_protocol() const;

  /// Throws ConfigError on inconsistent values.
  void validate() const;
};

/// Parses `key = value` lines; `#` starts a comment. Throws ConfigError on
/// malformed lines or duplicate keys.
std::map<std::string, std::string> parse_config_text(const std::string& text);

/// Applies settings on top of `config`. Unknown keys are rejected.
void apply_settings(RunConfig& config, const std::map<std::string, std::string>& settings);

/// Defaults, then the file, then `overrides`.
RunConfig load_config(const std::string& path, const std::map<std::string, std::string>& overrides = {});

/// Every recognized key with its default value, in documentation order.
std::vector<std::pair<std::string, std::string>> documented_defaults();

/// Number with optional pi factor: "0.25", "pi", "pi/40", "3*pi/4", "0.3pi".
double parse_number(const std::string& text);

/// "a,b,c" or "start:stop:step" (inclusive of stop within half a step).
std::vector<double> parse_grid(const std::string& text);

}  // namespace rdiqsdc
