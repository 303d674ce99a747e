#include <iostream>

#include "gsaw/cli.hpp"

int main(int argc, char** argv) { return gsaw::cli::run(argc, argv, std::cout, std::cerr); }
