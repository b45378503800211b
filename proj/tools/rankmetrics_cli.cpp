#include <string>
#include <vector>

#include "rankmetrics/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return rankmetrics::cli::run_cli(std::move(args));
}
