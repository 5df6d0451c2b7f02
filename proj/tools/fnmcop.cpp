#include <iostream>

#include "fnmcop/cli.hpp"

int main(int argc, char** argv) { return fnmcop::run_cli(argc, argv, std::cout, std::cerr); }
