#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return apex::cli::run_cli(argc, argv, std::cout, std::cerr); }
