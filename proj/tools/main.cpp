#include <iostream>

#include "expdyn/cli.hpp"

int main(int argc, char** argv) { return expdyn::cli::run(argc, argv, std::cout, std::cerr); }
