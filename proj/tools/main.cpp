#include <iostream>

#include "snse/commands.hpp"

int main(int argc, char** argv) { return snse::run_cli(argc, argv, std::cout, std::cerr); }
