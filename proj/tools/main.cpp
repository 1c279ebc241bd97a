/// \file main.cpp
/// \brief Entry point of the oscillab command-line tool.

#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    return oscillab::cli::run_main(args);
}
