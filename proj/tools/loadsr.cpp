#include <iostream>

#include <CLI11.hpp>

#include "loadsr_app/commands.hpp"

using namespace loadsr::app;

int main(int argc, char** argv)
{
    CLI::App app { "Symbolic regression of load models" };
    app.require_subcommand(1);
    int code = exit_ok;

    GenerateOptions gen;
    std::string gen_config;
    auto* generate = app.add_subcommand("generate", "Write a synthetic voltage/power trajectory as CSV");
    generate->add_option("-c,--config", gen_config, "Trajectory config file")->check(CLI::ExistingFile);
    generate->add_option("-o,--out", gen.out, "Output CSV path")->required();
    generate->add_option("--set", gen.overrides, "Override a config key (key=value)");
    generate->callback([&] {
        if (!gen_config.empty()) {
            gen.config = gen_config;
        }
        code = cmd_generate(gen, std::cout, std::cerr);
    });

    FitOptions fit;
    std::string fit_config;
    std::string policy;
    std::uint64_t seed = 0;
    bool no_baselines = false;
    auto* fit_cmd = app.add_subcommand("fit", "Search for an expression fitting a CSV dataset");
    fit_cmd->add_option("data", fit.data, "Input CSV")->required()->check(CLI::ExistingFile);
    fit_cmd->add_option("-c,--config", fit_config, "Search/data config file")->check(CLI::ExistingFile);
    fit_cmd->add_option("-o,--out", fit.out_dir, "Output directory")->required();
    auto* policy_opt = fit_cmd->add_option("--policy", policy, "risk_seeking (alias risk) or standard")->check(CLI::IsMember({ "risk", "risk_seeking", "standard" }));
    auto* seed_opt = fit_cmd->add_option("--seed", seed, "Run seed");
    fit_cmd->add_option("--set", fit.overrides, "Override a config key (key=value)");
    fit_cmd->add_flag("--no-baselines", no_baselines, "Skip ZIP/polynomial baseline fits");
    fit_cmd->add_flag("-v,--verbose", fit.verbose);
    fit_cmd->callback([&] {
        if (!fit_config.empty()) {
            fit.config = fit_config;
        }
        if (*policy_opt) {
            fit.policy = policy;
        }
        if (*seed_opt) {
            fit.seed = seed;
        }
        fit.baselines = !no_baselines;
        code = cmd_fit(fit, std::cout, std::cerr);
    });

    BenchmarkOptions bench;
    std::string bench_config;
    auto* bench_cmd = app.add_subcommand("benchmark", "Run the policy/depth/baseline comparison suite");
    bench_cmd->add_option("-c,--config", bench_config, "Suite config file")->check(CLI::ExistingFile);
    bench_cmd->add_option("-o,--out", bench.out_dir, "Output directory")->required();
    bench_cmd->add_option("--set", bench.overrides, "Override a config key (key=value)");
    bench_cmd->add_flag("-v,--verbose", bench.verbose);
    bench_cmd->callback([&] {
        if (!bench_config.empty()) {
            bench.config = bench_config;
        }
        code = cmd_benchmark(bench, std::cout, std::cerr);
    });

    EvalOptions eval;
    std::string rows;
    auto* eval_cmd = app.add_subcommand("eval", "Score a rendered expression on a CSV dataset");
    eval_cmd->add_option("expression", eval.expression, "Expression text")->required();
    eval_cmd->add_option("data", eval.data, "Input CSV")->required()->check(CLI::ExistingFile);
    eval_cmd->add_option("--features", eval.features, "Feature columns, in variable order")->delimiter(',');
    eval_cmd->add_option("--target", eval.target, "Target column");
    auto* rows_opt = eval_cmd->add_option("--rows", rows, "Row range a:b (half-open)");
    eval_cmd->add_option("--operators", eval.operators, "Operator library")->delimiter(',');
    eval_cmd->callback([&] {
        if (*rows_opt) {
            eval.rows = rows;
        }
        code = cmd_eval(eval, std::cout, std::cerr);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : exit_config;
    }
    return code;
}
