#include <iostream>

#include "atn/cli.hpp"

int main(int argc, char** argv) { return atn::run(argc, argv, std::cout, std::cerr); }
