#include <iostream>

#include "proxama/cli.hpp"

int main(int argc, char** argv) { return proxama::cli::run(argc, argv, std::cout, std::cerr); }
