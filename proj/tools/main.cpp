#include <string>
#include <vector>

#include "cmchain/cli.hpp"

int main(int argc, char** argv) {
    return cmchain::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
