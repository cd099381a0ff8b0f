#include <iostream>

#include "origami/cli.hpp"

int main(int argc, char** argv) {
    return origami::run_cli(argc, argv, std::cout, std::cerr);
}
