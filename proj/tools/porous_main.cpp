#include <iostream>

#include "porous/cli.hpp"

int main(int argc, char** argv) { return porous::run_cli(argc, argv, std::cout, std::cerr); }
