#include <iostream>

#include "subflow/cli.hpp"

int main(int argc, char** argv) { return subflow::run_cli(argc, argv, std::cout, std::cerr); }
