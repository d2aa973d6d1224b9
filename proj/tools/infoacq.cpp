#include <iostream>

#include "infoacq/cli/commands.hpp"

int main(int argc, char** argv) {
    return infoacq::cli::run_cli(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
