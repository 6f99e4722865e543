#include <iostream>

#include "realeig/cli/app.hpp"

int main(int argc, char** argv) { return realeig::run_cli(argc, argv, std::cout, std::cerr); }
