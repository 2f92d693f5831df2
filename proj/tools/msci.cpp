#include <iostream>
#include <string>
#include <vector>

#include "msci/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return msci::cli::run(args, std::cout, std::cerr);
}
