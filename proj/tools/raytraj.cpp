#include <iostream>

#include "raytraj/cli.hpp"

int main(int argc, char** argv) { return raytraj::cli::run(argc, argv, std::cout, std::cerr); }
