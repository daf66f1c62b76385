#include <iostream>

#include "pnreach/cli.hpp"

int main(int argc, char** argv) { return pnreach::cli::run(argc, argv, std::cout, std::cerr); }
