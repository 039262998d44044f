#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "loadsr/baselines.hpp"
#include "loadsr/data.hpp"
#include "loadsr/search.hpp"
#include "loadsr_app/config.hpp"

namespace loadsr::app {

// Built-in synthetic tasks: sin, zip, erl, erl_noisy, exp_load, ratio.
std::vector<std::string> builtin_tasks();
std::vector<std::string> default_suite_tasks(); // the five-task suite

Dataset make_task(const std::string& name, std::uint64_t seed);
std::pair<Dataset, Dataset> task_split(const std::string& name, std::uint64_t seed);

struct Summary {
    std::size_t count = 0;
    std::size_t failures = 0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

// Median and quartiles by linear interpolation between order statistics.
// Non-finite values are treated as +inf (failed runs rank last).
Summary summarize(std::span<const double> values);
double quantile_sorted(std::span<const double> sorted, double q);

struct RunKey {
    std::string task;
    std::uint64_t seed = 0;
    std::size_t depth = 5;
    PolicyMode policy = PolicyMode::RiskSeeking;
    double epsilon = 0.5;

    auto operator<=>(const RunKey&) const = default;
};

struct CellResult {
    RunKey key;
    double test_rmse = 0.0;  // +inf on failure
    double train_rmse = 0.0;
    std::string expression;
    std::string error;
    double seconds = 0.0;
};

struct BaselineCell {
    std::string task;
    std::uint64_t seed = 0;
    std::string model;       // zip, poly2, poly3
    double test_rmse = 0.0;  // +inf on failure
    std::string error;
};

struct SuiteSpec {
    std::vector<std::string> tasks = default_suite_tasks();
    std::vector<std::uint64_t> seeds { 0, 1, 2, 3, 4, 5, 6, 7, 8, 9 };
    std::vector<double> epsilons { 0.3, 0.5, 0.7 };
    bool include_standard = true;
    std::vector<std::size_t> depths { 3, 5, 7 };
    bool baselines = true;
    SearchConfig base;        // depth/epsilon/policy are overridden per cell
    std::size_t threads = 1;  // cells run in parallel; each search is single-threaded
};

SuiteSpec read_suite_spec(const KeyValueConfig& kv);

struct SuiteReport {
    SuiteSpec spec;
    std::vector<CellResult> cells; // sorted by key
    std::vector<BaselineCell> baseline_cells;

    [[nodiscard]] const CellResult* find(const RunKey& key) const;
    // Test rmse over seeds for one task and setting.
    [[nodiscard]] std::vector<double> values(const std::string& task, std::size_t depth, PolicyMode policy,
                                             double epsilon) const;
    // Pooled over every task in the spec.
    [[nodiscard]] std::vector<double> pooled(std::size_t depth, PolicyMode policy, double epsilon) const;
    [[nodiscard]] std::vector<double> baseline_values(const std::string& task, const std::string& model) const;
};

using ProgressFn = std::function<void(const CellResult&)>;

CellResult run_cell(const RunKey& key, const SearchConfig& base);
SuiteReport run_suite(const SuiteSpec& spec, const ProgressFn& progress = {});

// Aligned text tables: policy comparison (epsilons + standard), depth comparison, engine vs baselines.
std::string format_report_text(const SuiteReport& report);
// Long format: table,task,setting,median,q1,q3,count,failures
std::string format_report_csv(const SuiteReport& report);
std::string format_cells_csv(const SuiteReport& report);

} // namespace loadsr::app
