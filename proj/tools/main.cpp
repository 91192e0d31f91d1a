#include "phonox/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return phonox::run_cli(argc, argv, std::cout, std::cerr); }
