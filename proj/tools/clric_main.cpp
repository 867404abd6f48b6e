#include <iostream>

#include "clric/cli/app.hpp"

int main(int argc, char** argv) { return clric::cli::run(argc, argv, std::cout, std::cerr); }
