#include <iostream>

#include "maxent_cli/cli.hpp"

int main(int argc, char** argv) { return maxent::cli::run(argc, argv, std::cout, std::cerr); }
