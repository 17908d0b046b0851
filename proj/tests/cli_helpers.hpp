#pragma once

#include "mwer/cli.hpp"

#include <sstream>
#include <string>
#include <vector>

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliRun run(std::vector<std::string> args)
{
    args.insert(args.begin(), "mwer");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = mwer::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}
