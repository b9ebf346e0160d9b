#include <iostream>

#include "rlmc/cli.hpp"

int main(int argc, char** argv) { return rlmc::cli::run(argc, argv, std::cout, std::cerr); }
