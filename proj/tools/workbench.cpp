#include <iostream>

#include "cocycle/cli.hpp"

int main(int argc, char** argv) { return cocycle::cli::run_cli(argc, argv, std::cout, std::cerr); }
