#include <cstdlib>
#include <iostream>
#include <string>

#include "rdiqsdc/acceptance.hpp"
#include "rdiqsdc/parallel.hpp"

// Usage: acceptance_suite [criterion...]
int main(int argc, char** argv) {
  rdiqsdc::AcceptanceOptions options;
  options.workers = rdiqsdc::default_workers();
  for (int i = 1; i < argc; ++i) options.only.insert(std::stoi(argv[i]));

  int failed = 0;
  rdiqsdc::run_acceptance(options, [&](const rdiqsdc::CriterionReport& report) {
    rdiqsdc::print_report(std::cout, report);
    std::cout.flush();
    if (!report.pass()) ++failed;
  });
  std::cout << (failed == 0 ? "all acceptance criteria passed" : std::to_string(failed) + " criteria failed")
            << '\n';
  return failed == 0 ? EXIT_SUCCESS : EXIT_FAILURE;
}
