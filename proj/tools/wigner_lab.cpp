#include <iostream>

#include "wigner/cli.hpp"

int main(int argc, char** argv) { return wigner::cli::parse_and_dispatch(argc, argv, std::cout, std::cerr); }
