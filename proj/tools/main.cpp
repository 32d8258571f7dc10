#include <iostream>

#include "driftscope/cli.hpp"

int main(int argc, char** argv) { return driftscope::cli::run(argc, argv, std::cout, std::cerr); }
