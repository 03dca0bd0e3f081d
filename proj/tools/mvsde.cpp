#include "mvsde/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mvsde::run_cli(argc, argv, std::cout, std::cerr); }
