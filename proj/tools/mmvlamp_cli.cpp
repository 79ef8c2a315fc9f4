#include <iostream>

#include "mmvlamp/cli.hpp"

int main(int argc, char** argv) { return mmv::cli_main(argc, argv, std::cout, std::cerr); }
