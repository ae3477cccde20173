#include <iostream>

#include "holderlab/cli.hpp"

int main(int argc, char** argv) { return holderlab::main_entry(argc, argv, std::cout, std::cerr); }
