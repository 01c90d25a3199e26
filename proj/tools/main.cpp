#include "l1ksvd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return l1ksvd::run_cli(argc, argv, std::cout, std::cerr); }
