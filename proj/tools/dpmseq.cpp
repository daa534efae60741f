#include "dpmseq/cli/run.hpp"

#include <iostream>

int main(int argc, char** argv) {
  return dpmseq::cli::run(argc, argv, std::cout, std::cerr);
}
