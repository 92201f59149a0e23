#include <iostream>

#include "wcons/cli.hpp"

int main(int argc, char** argv) { return wcons::cli_dispatch(argc, argv, std::cout, std::cerr); }
