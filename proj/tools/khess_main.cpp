#include <iostream>

#include "khess/cli.hpp"

int main(int argc, char** argv) { return khess::run_cli(argc, argv, std::cout, std::cerr); }
