#include <vector>

#include "wbplab/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return wbplab::run_cli(args);
}
