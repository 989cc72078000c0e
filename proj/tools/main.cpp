#include <iostream>

#include "aht/cli.hpp"

int main(int argc, char** argv) { return aht::run_cli(argc, argv, std::cout, std::cerr); }
