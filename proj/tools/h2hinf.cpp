#include <iostream>

#include "h2hinf/cli.hpp"

int main(int argc, char** argv) { return h2hinf::cli_main(argc, argv, std::cout, std::cerr); }
