#pragma once

#include "crabs/cli.hpp"

#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

namespace crabs::testing {

struct CliRun {
    int code = 0;
    std::string out;
    std::string err;
};

inline CliRun run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "crabs");
    std::vector<char*> argv;
    for (auto& a : args) {
        argv.push_back(a.data());
    }
    std::ostringstream out;
    std::ostringstream err;
    CliRun r;
    r.code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
    r.out = out.str();
    r.err = err.str();
    return r;
}

// A fresh empty directory under the system temp directory.
inline std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "crabs-tests" / name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace crabs::testing
