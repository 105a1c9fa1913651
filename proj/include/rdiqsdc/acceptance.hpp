#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

namespace rdiqsdc {

/// One compared quantity. `source` says where the expected value comes from:
/// quoted (published figure), oracle (independent high-precision evaluation),
/// closed-form, monte-carlo, exact.
struct AcceptanceCheck {
  std::string label;
  std::string expected;
  std::string obtained;
  std::string tolerance;
  std::string source;
  bool pass = false;
};

struct CriterionReport {
  int number = 0;
  std::string title;
  std::vector<AcceptanceCheck> checks;
  std::vector<std::string> notes;

  bool pass() const;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240601;
  int workers = 1;
  std::size_t oracle_r = 1'000'000;
  std::size_t attack_r = 100'000;
  std::size_t abort_trials = 2000;
  std::size_t undetectable_trials = 500;
  std::size_t shuffle_seeds = 100;
  std::size_t property_operations = 100'000;
  std::set<int> only;  // empty: every criterion
};

inline constexpr int kCriterionCount = 10;

CriterionReport run_criterion(int number, const AcceptanceOptions& options);

/// Runs the selected criteria in order, handing each report to `on_done` as
/// soon as it is available.
std::vector<CriterionReport> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionReport&)>& on_done = {});

/// Check lines, notes, then "criterion N: PASS|FAIL  title".
void print_report(std::ostream& out, const CriterionReport& report);

}  // namespace rdiqsdc
