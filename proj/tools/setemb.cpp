#include <iostream>

#include "setemb/cli.hpp"

int main(int argc, char** argv) { return setemb::run_cli(argc, argv, std::cout, std::cerr); }
