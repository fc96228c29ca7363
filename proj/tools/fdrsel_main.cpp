#include "fdrsel/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return fdrsel::run_cli(argc, argv, std::cout, std::cerr);
}
