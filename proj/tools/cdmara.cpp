#include <iostream>
#include <string>
#include <vector>

#include "cdmara/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return cdmara::cli::run(args, std::cout, std::cerr);
}
