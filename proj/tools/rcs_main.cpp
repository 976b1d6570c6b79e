#include <iostream>

#include "rcs/cli.hpp"

int main(int argc, char** argv) { return rcs::cli::run(argc, argv, std::cout, std::cerr); }
