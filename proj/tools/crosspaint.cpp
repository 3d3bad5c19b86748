#include <iostream>

#include "crosspaint/cli.hpp"

int main(int argc, char** argv) { return crosspaint::RunCli(argc, argv, std::cout, std::cerr); }
