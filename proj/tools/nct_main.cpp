#include <iostream>

#include "nct/cli.hpp"

int main(int argc, char** argv) { return nct::run_cli(argc, argv, std::cout, std::cerr); }
