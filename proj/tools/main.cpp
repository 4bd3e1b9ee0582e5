#include <iostream>
#include <string>
#include <vector>

#include "dprime_app.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return dprime::app::run(std::move(args), std::cout, std::cerr);
}
