#include <iostream>

#include "grs/cli.hpp"

int main(int argc, char** argv) { return grs::cli::run_cli(argc, argv, std::cout, std::cerr); }
