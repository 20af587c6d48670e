#include <iostream>

#include <ethics_triage/cli.hpp>

int main(int argc, char** argv) {
    return ethics_triage::cli::cli_dispatch(argc, argv, std::cin, std::cout, std::cerr);
}
