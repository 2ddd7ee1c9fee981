#include <iostream>
#include <vector>

#include "microadam/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return microadam::cli::run_cli(args, std::cout, std::cerr);
}
