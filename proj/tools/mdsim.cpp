#include <iostream>
#include <string>
#include <vector>

#include "mdisp/cli.hpp"

int main(int argc, char** argv)
{
    std::vector<std::string> args(argv + 1, argv + argc);
    return mdisp::run_cli(args, std::cout, std::cerr);
}
