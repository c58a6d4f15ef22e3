#include <iostream>

#include "laseruav/cli.hpp"

int main(int argc, char** argv) { return laseruav::run_cli(argc, argv, std::cout, std::cerr); }
