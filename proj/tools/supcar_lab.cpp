#include <iostream>

#include "supcar/cli.hpp"

int main(int argc, char** argv) { return supcar::run_cli(argc, argv, std::cout, std::cerr); }
