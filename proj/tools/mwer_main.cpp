#include "mwer/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return mwer::run_cli(argc, argv, std::cout, std::cerr);
}
