// SPDX-License-Identifier: Apache-2.0
#include <iostream>

#include "mhp/cli.hpp"

int main(int argc, char** argv) {
    return mhp::cli_main({argv + 1, argv + argc}, std::cout, std::cerr);
}
