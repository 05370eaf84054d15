// Null rejection rates for the nine kernel detectors at m = 200, M = 10 m, alpha = 0.05.
// Calibrating the nine critical values from the limit laws takes a few minutes on one core.
//
//   demo_size_table [reps=200] [workers=0]

#include <cstdlib>
#include <iostream>

#include "ucpd/harness.hpp"

using namespace ucpd;

int main(int argc, char** argv) {
  TableConfig cfg;
  cfg.scenario.reps = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 200;
  cfg.scenario.seed = 2024;
  cfg.workers = argc > 2 ? static_cast<unsigned>(std::strtoul(argv[2], nullptr, 10)) : 0;
  write_text_table(std::cout, run_table(cfg));
}
