#include "gaugelab/cli.hpp"

#include <iostream>

int main(int argc, char **argv) { return gaugelab::run(argc, argv, std::cout, std::cerr); }
