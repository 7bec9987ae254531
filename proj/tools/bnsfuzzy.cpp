#include <string>
#include <vector>

#include "bnsfuzzy/cli/app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return bnsfuzzy::cli::run(args);
}
