#include <iostream>

#include "admg/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return admg::cli::run(args, std::cout, std::cerr);
}
