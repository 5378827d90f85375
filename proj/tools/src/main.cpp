#include <iostream>

#include "pnplab/cli/commands.hpp"

int main(int argc, char** argv) { return pnp::cli::run_cli(argc, argv, std::cout, std::cerr); }
