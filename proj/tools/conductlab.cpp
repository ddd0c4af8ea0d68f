#include <iostream>

#include "conduct/cli.hpp"

int main(int argc, char** argv) { return conduct::cli::run(argc, argv, std::cout, std::cerr); }
