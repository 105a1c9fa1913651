#include <iostream>

#include "rdiqsdc/commands.hpp"

int main(int argc, char** argv) { return rdiqsdc::run_cli(argc, argv, std::cout, std::cerr); }
