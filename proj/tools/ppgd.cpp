#include <iostream>

#include "ppgd/cli.hpp"

int main(int argc, char** argv) { return ppgd::cli::run_cli(argc, argv, std::cout, std::cerr); }
