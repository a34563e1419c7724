#include <iostream>

#include "app.hpp"

int main(int argc, char** argv) { return styleforge::cli::run_subcommand(argc, argv, std::cout, std::cerr); }
