#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return landlab::cli::run(argc, argv, std::cout, std::cerr); }
