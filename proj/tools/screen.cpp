#include <iostream>

#include "screening/cli.hpp"

int main(int argc, char** argv) { return screening::run_cli(argc, argv, std::cout, std::cerr); }
