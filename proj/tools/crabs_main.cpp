#include "crabs/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    return crabs::cli::main(argc, argv, std::cout, std::cerr);
}
