#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "rdiqsdc/acceptance.hpp"
#include "rdiqsdc/config.hpp"

namespace rdiqsdc {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitVerificationFailure = 3;

/// Environment variable naming the default config file.
inline constexpr const char* kConfigEnv = "RDIQSDC_CONFIG";

/// Grid used when analysis.grid is empty.
std::vector<double> default_grid(SweepAxis axis);

/// Delimited tables, one header line. Deterministic for a given config.
std::string sweep_table(const RunConfig& config);
std::string threshold_table(const RunConfig& config);
std::string noise_threshold_table(const RunConfig& config);
std::string attack_scan_table(const RunConfig& config);

/// Each command writes its files under config.output.dir and a short report
/// to `out`. Returns a process exit code.
int cmd_simulate(const RunConfig& config, std::ostream& out);
int cmd_sweep(const RunConfig& config, std::ostream& out);
int cmd_threshold(const RunConfig& config, std::ostream& out);
int cmd_attack_scan(const RunConfig& config, std::ostream& out);
int cmd_verify(const AcceptanceOptions& options, std::ostream& out);

/// Full command line front end.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rdiqsdc
