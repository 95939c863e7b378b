#include <iostream>

#include "ppsync/commands.hpp"

int main(int argc, char** argv) { return ppsync::run_cli(argc, argv, std::cout, std::cerr); }
