#include <iostream>

#include "oligoshare/cli.hpp"

int main(int argc, char** argv) {
    return oligoshare::cli::run(argc, argv, std::cout, std::cerr);
}
