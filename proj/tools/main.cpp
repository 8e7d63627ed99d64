#include <iostream>
#include <string>
#include <vector>

#include "crowncount/cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return crowncount::cli_main(args, std::cout, std::cerr);
}
