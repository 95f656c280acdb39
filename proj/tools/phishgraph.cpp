#include <iostream>

#include "phishgraph/cli.hpp"

int main(int argc, char** argv) { return phishgraph::run_cli(argc, argv, std::cout, std::cerr); }
