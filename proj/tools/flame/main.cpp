#include <iostream>

#include "flame/commands.hpp"

int main(int argc, char** argv) { return flame::cli::run(argc, argv, std::cout, std::cerr); }
