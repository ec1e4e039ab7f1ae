#include "pcaptopo/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return pcaptopo::cli_main(argc, argv, std::cout, std::cerr); }
