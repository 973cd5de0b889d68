#include <iostream>

#include "irae/cli.hpp"

int main(int argc, char** argv)
{
    return irae::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
