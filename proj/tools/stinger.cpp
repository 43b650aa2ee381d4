#include <iostream>

#include "stinger/cli.hpp"

int main(int argc, char** argv) { return stinger::cli_dispatch(argc, argv, std::cout, std::cerr); }
