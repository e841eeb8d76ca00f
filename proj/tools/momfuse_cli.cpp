#include <iostream>

#include "momfuse/cli.hpp"

int main(int argc, char** argv) { return momfuse::run_cli(argc, argv, std::cout, std::cerr); }
