// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "satmoe/cli.hpp"

int main(int argc, char** argv) { return satmoe::cli::run(argc, argv, std::cin, std::cout, std::cerr); }
