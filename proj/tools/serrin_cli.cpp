#include <iostream>

#include "serrin/cli.hpp"

int main(int argc, char** argv) { return serrin::cli::run(argc, argv, std::cout, std::cerr); }
