#include <iostream>
#include <string>
#include <vector>

#include <gmeans/cli.hpp>

int main(int argc, char** argv)
{
    const std::vector<std::string> args(argv + 1, argv + argc);
    return gmeans::cli::main_entry(args, std::cout, std::cerr);
}
