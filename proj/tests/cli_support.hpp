#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace coclust::test {

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRun {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the CLI binary with the given arguments, capturing both streams in
/// files under scratch.
inline CliRun run_cli(const std::filesystem::path& scratch,
                      std::initializer_list<std::string> args) {
    std::filesystem::create_directories(scratch);
    const auto out = scratch / "stdout.txt", err = scratch / "stderr.txt";
    std::string cmd = "'" COCLUST_CLI_PATH "'";
    for (const auto& a : args)
        cmd += " '" + a + "'";
    cmd += " >'" + out.string() + "' 2>'" + err.string() + "'";
    const int status = std::system(cmd.c_str());
    CliRun r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

/// Every regular file in a directory, by name, with its bytes.
inline std::map<std::string, std::string> directory_contents(const std::filesystem::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(dir))
        if (e.is_regular_file())
            files[e.path().filename().string()] = slurp(e.path());
    return files;
}

} // namespace coclust::test
