#include <iostream>

#include "gridreconf/cli.hpp"

int main(int argc, char** argv) { return gridreconf::cli::run(argc, argv, std::cout, std::cerr); }
