#include <iostream>

#include "resdet/cli.hpp"

int main(int argc, char** argv) { return resdet::run_cli(argc, argv, std::cout, std::cerr); }
