#include <iostream>
#include <string>
#include <vector>

#include "wirefit/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wirefit::cli::run(args, std::cout, std::cerr);
}
