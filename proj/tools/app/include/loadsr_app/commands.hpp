#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "loadsr/error.hpp"
#include "loadsr_app/config.hpp"

namespace loadsr::app {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_data = 3,
    exit_search = 4,
};

int exit_code_for(ErrorKind kind);

// Config file first, then `key=value` overrides in order.
KeyValueConfig load_config(const std::optional<std::filesystem::path>& file, const std::vector<std::string>& overrides);

struct GenerateOptions {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides;
    std::filesystem::path out; // CSV; sidecar written to <out>.json
};

struct FitOptions {
    std::filesystem::path data;
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides;
    std::filesystem::path out_dir;
    std::optional<std::string> policy;
    std::optional<std::uint64_t> seed;
    bool baselines = true;
    bool verbose = false;
};

struct BenchmarkOptions {
    std::optional<std::filesystem::path> config;
    std::vector<std::string> overrides;
    std::filesystem::path out_dir;
    bool verbose = false;
};

struct EvalOptions {
    std::string expression;
    std::filesystem::path data;
    std::vector<std::string> features { "V" };
    std::string target = "P";
    std::optional<std::string> rows; // "a:b", half-open, either end may be empty
    std::vector<std::string> operators;
};

// Each command reports results on `out`, errors on `err`, and returns an exit code.
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err);
int cmd_benchmark(const BenchmarkOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err);

} // namespace loadsr::app
