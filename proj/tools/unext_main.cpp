#include "unext/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return unext::run_cli(argc, argv, std::cout, std::cerr); }
