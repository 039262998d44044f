#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "loadsr/error.hpp"
#include "loadsr/random.hpp"
#include "loadsr_app/commands.hpp"
#include "loadsr_app/config.hpp"
#include "loadsr_app/manifest.hpp"
#include "loadsr_app/suite.hpp"
#include "oracles/brute_force.hpp"

using namespace loadsr;
using namespace loadsr::app;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name)
{
    auto dir = fs::temp_directory_path() / "loadsr_app_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p)
{
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t count_lines(const std::string& text) { return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')); }

const std::vector<std::string> quick_search {
    "depth=1", "actor_iterations=3", "batch_size=4", "critic_iterations=10", "finetune_iterations=10", "pool_capacity=2",
};

} // namespace

TEST_SUITE("app")
{
    TEST_CASE("key-value config")
    {
        auto kv = KeyValueConfig::from_string("# comment\ndepth = 3\n epsilon=0.25 # trailing\n\noperators = identity, sin, add\n");
        auto c = read_search_config(kv);
        CHECK(c.depth == 3);
        CHECK(c.epsilon == 0.25);
        CHECK(c.operators == std::vector<std::string> { "identity", "sin", "add" });
        CHECK_NOTHROW(kv.check_consumed());

        auto extra = KeyValueConfig::from_string("depth = 3\ncolour = red\n");
        read_search_config(extra);
        CHECK_THROWS_AS(extra.check_consumed(), Error);

        CHECK_THROWS_AS(KeyValueConfig::from_string("depth 3\n"), Error);
        CHECK_THROWS_AS(read_search_config(KeyValueConfig::from_string("depth = three\n")), Error);
        CHECK_THROWS_AS(read_search_config(KeyValueConfig::from_string("policy = greedy\n")), Error);
        CHECK_THROWS_AS(read_search_config(KeyValueConfig::from_string("epsilon = 0\n")), Error);
        CHECK(read_search_config(KeyValueConfig::from_string("policy = risk\n")).policy == PolicyMode::RiskSeeking);

        auto base = KeyValueConfig::from_string("depth = 3\nseed = 1\n");
        base.merge(KeyValueConfig::from_string("seed = 9\n"));
        CHECK(read_search_config(base).seed == 9);

        auto t = read_trajectory_config(KeyValueConfig::from_string("kind = erl\nt_p = 2\n"));
        CHECK(t.kind == GeneratorKind::Erl);
        CHECK(t.t_p == 2.0);

        auto d = read_data_options(KeyValueConfig::from_string("features = V, Q\nlags = 1,2\nsplit = shuffled\n"));
        CHECK(d.features.size() == 2);
        CHECK(d.lags == std::vector<std::size_t> { 1, 2 });
        CHECK(d.split == SplitMode::Shuffled);
        CHECK_THROWS_AS(read_data_options(KeyValueConfig::from_string("split = random\n")), Error);
    }

    TEST_CASE("summaries match a sort-based oracle")
    {
        Rng rng(12);
        for (int trial = 0; trial < 200; ++trial) {
            std::size_t n = 1 + rng() % 25;
            std::vector<double> v;
            for (std::size_t i = 0; i < n; ++i) v.push_back(uniform(rng, 0.0, 1.0));
            auto s = summarize(v);
            CHECK(s.median == doctest::Approx(oracle::median(v)).epsilon(1e-14));
            CHECK(s.q1 == doctest::Approx(oracle::sorted_quantile(v, 0.25)).epsilon(1e-14));
            CHECK(s.q3 == doctest::Approx(oracle::sorted_quantile(v, 0.75)).epsilon(1e-14));
            CHECK(s.failures == 0);
        }
        std::vector<double> with_fail { 0.1, std::numeric_limits<double>::infinity(), 0.3, std::nan("") };
        auto s = summarize(with_fail);
        CHECK(s.failures == 2);
        CHECK(std::isinf(s.median));
        std::vector<double> mostly_ok { 0.1, 0.2, std::nan("") };
        CHECK(summarize(mostly_ok).median == 0.2);
    }

    TEST_CASE("builtin tasks")
    {
        for (const auto& name : builtin_tasks()) {
            auto ds = make_task(name, 3);
            CHECK(ds.rows() > 50);
            CHECK(ds.cols() == 1);
            auto again = make_task(name, 3);
            CHECK(again.y == ds.y);
            auto [train, test] = task_split(name, 3);
            CHECK(train.rows() + test.rows() == ds.rows());
        }
        CHECK(default_suite_tasks().size() == 5);
        CHECK_THROWS_AS(make_task("nope", 0), Error);
    }

    TEST_CASE("tiny suite report layout")
    {
        SuiteSpec spec;
        spec.tasks = { "zip" };
        spec.seeds = { 0 };
        spec.epsilons = { 0.3, 0.5, 0.7 };
        spec.depths = { 1 };
        spec.base.depth = 1;
        spec.base.actor_iterations = 2;
        spec.base.batch_size = 4;
        spec.base.critic_iterations = 5;
        spec.base.finetune_iterations = 5;
        std::size_t progress = 0;
        auto report = run_suite(spec, [&](const CellResult&) { ++progress; });
        // three epsilons + standard at depth 1; the depth sweep reuses the eps=0.5 cell
        CHECK(report.cells.size() == 4);
        CHECK(progress == 4);
        CHECK(report.baseline_cells.size() == 3);
        auto text = format_report_text(report);
        CHECK(text.find("Risk eps=0.3") != std::string::npos);
        CHECK(text.find("Risk eps=0.5") != std::string::npos);
        CHECK(text.find("Risk eps=0.7") != std::string::npos);
        CHECK(text.find("Standard") != std::string::npos);
        CHECK(text.find("(all)") == std::string::npos);
        // title, header, rule, one task row
        auto policy_table = text.substr(text.find("Policy comparison"));
        policy_table = policy_table.substr(0, policy_table.find("\n\n"));
        CHECK(count_lines(policy_table + "\n") == 4);
        auto csv = format_report_csv(report);
        CHECK(csv.rfind("table,task,setting,median,q1,q3,count,failures\n", 0) == 0);
        CHECK(csv.find("policy,zip,standard,") != std::string::npos);
        CHECK(csv.find("baseline,zip,poly2,") != std::string::npos);
        CHECK(count_lines(format_cells_csv(report)) == 5);
    }

    TEST_CASE("failed cells count as infinite")
    {
        SuiteSpec spec;
        spec.tasks = { "sin" };
        spec.seeds = { 0 };
        spec.epsilons = { 0.5 };
        spec.include_standard = false;
        spec.depths = {};
        spec.baselines = false;
        spec.base.depth = 1;
        spec.base.actor_iterations = 1;
        spec.base.batch_size = 2;
        spec.base.critic_iterations = 1;
        spec.base.finetune_iterations = 1;
        spec.base.operators = { "identity", "add", "cosh" }; // rejected inside the cell
        auto report = run_suite(spec);
        REQUIRE(report.cells.size() == 1);
        CHECK(std::isinf(report.cells[0].test_rmse));
        CHECK_FALSE(report.cells[0].error.empty());
        CHECK(format_report_text(report).find("1 failed") != std::string::npos);
    }

    TEST_CASE("generate command")
    {
        auto dir = scratch("generate");
        std::ostringstream out, err;
        GenerateOptions opts;
        opts.out = dir / "zip.csv";
        opts.overrides = { "kind=zip", "dt=0.1", "noise_sigma=0.01", "seed=4" };
        REQUIRE(cmd_generate(opts, out, err) == exit_ok);
        auto first = slurp(opts.out);
        CHECK(first.rfind("t,V,P\n", 0) == 0);
        CHECK(count_lines(first) == 102);
        auto sidecar = read_json(dir / "zip.csv.json");
        CHECK(sidecar["generator"]["a_z"] == 0.4);
        CHECK(sidecar["generator"]["seed"] == 4);
        REQUIRE(cmd_generate(opts, out, err) == exit_ok);
        CHECK(slurp(opts.out) == first);

        GenerateOptions bad = opts;
        bad.overrides.push_back("a_z=0.5");
        std::ostringstream err2;
        CHECK(cmd_generate(bad, out, err2) == exit_config);
        CHECK(err2.str().find("a_z + a_i + a_p = 1") != std::string::npos);

        GenerateOptions junk = opts;
        junk.overrides = { "nonsense" };
        CHECK(cmd_generate(junk, out, err) == exit_config);
        junk.overrides = { "colour=red" };
        CHECK(cmd_generate(junk, out, err) == exit_config);
    }

    TEST_CASE("fit and eval commands")
    {
        auto dir = scratch("fit");
        std::ostringstream out, err;
        GenerateOptions gen;
        gen.out = dir / "data.csv";
        gen.overrides = { "dt=0.1" };
        REQUIRE(cmd_generate(gen, out, err) == exit_ok);

        FitOptions fit;
        fit.data = gen.out;
        fit.out_dir = dir / "run";
        fit.overrides = quick_search;
        fit.seed = 11;
        REQUIRE(cmd_fit(fit, out, err) == exit_ok);
        auto m1 = read_json(dir / "run" / "manifest.json");
        CHECK(m1["config"]["policy"] == "risk_seeking");
        CHECK(m1["seed"] == 11);
        CHECK(m1["library"].size() == 13);
        CHECK(m1["data"]["fingerprint"]["rows"] == 101);
        CHECK(m1.contains("timings"));
        CHECK(m1["baselines"].size() == 3);
        auto predictions = slurp(dir / "run" / "predictions.csv");
        CHECK(predictions.rfind("t,y_true,y_pred", 0) == 0);
        CHECK(count_lines(predictions) == 102);

        // rerun into the same directory reproduces everything but the timings
        REQUIRE(cmd_fit(fit, out, err) == exit_ok);
        auto m2 = read_json(dir / "run" / "manifest.json");
        CHECK(without_timings(m1) == without_timings(m2));

        FitOptions standard = fit;
        standard.policy = "standard";
        standard.out_dir = dir / "standard";
        REQUIRE(cmd_fit(standard, out, err) == exit_ok);
        CHECK(read_json(dir / "standard" / "manifest.json")["config"]["policy"] == "standard");

        // the exact rendering evaluates to the recorded training rmse on the training rows
        std::string exact = m1["result"]["expression_exact"];
        EvalOptions ev;
        ev.expression = exact;
        ev.data = gen.out;
        ev.rows = "0:80";
        std::ostringstream eval_out;
        REQUIRE(cmd_eval(ev, eval_out, err) == exit_ok);
        auto text = eval_out.str();
        auto pos = text.find("rmse: ");
        REQUIRE(pos != std::string::npos);
        double rmse = std::stod(text.substr(pos + 6));
        CHECK(std::abs(rmse - m1["result"]["train_rmse"].get<double>()) <= 1e-9);

        FitOptions missing = fit;
        missing.data = dir / "absent.csv";
        CHECK(cmd_fit(missing, out, err) == exit_data);
        FitOptions bad_key = fit;
        bad_key.overrides.push_back("colour=red");
        CHECK(cmd_fit(bad_key, out, err) == exit_config);
        FitOptions bad_feature = fit;
        bad_feature.overrides.push_back("features=Q");
        CHECK(cmd_fit(bad_feature, out, err) == exit_data);
    }

    TEST_CASE("eval command")
    {
        auto dir = scratch("eval");
        {
            std::ofstream f(dir / "ones.csv");
            f << "x,y\n";
            for (int i = 0; i < 10; ++i) f << i << ",1\n";
        }
        std::ostringstream out, err;
        EvalOptions ev;
        ev.expression = "0*((1*x0)) + 1";
        ev.data = dir / "ones.csv";
        ev.features = { "x" };
        ev.target = "y";
        REQUIRE(cmd_eval(ev, out, err) == exit_ok);
        CHECK(out.str().find("rmse: 0\n") != std::string::npos);
        CHECK(out.str().find("rows: 10\n") != std::string::npos);

        ev.rows = "2:5";
        std::ostringstream sub;
        REQUIRE(cmd_eval(ev, sub, err) == exit_ok);
        CHECK(sub.str().find("rows: 3\n") != std::string::npos);
        ev.rows = "7:3";
        CHECK(cmd_eval(ev, sub, err) == exit_data);
        ev.rows = std::nullopt;

        ev.expression = "0*((1*x0) + 1";
        std::ostringstream perr;
        CHECK(cmd_eval(ev, out, perr) == exit_config);
        CHECK(perr.str().find("position 12") != std::string::npos);
    }

    TEST_CASE("benchmark command")
    {
        auto dir = scratch("bench");
        std::ostringstream out, err;
        BenchmarkOptions opts;
        opts.out_dir = dir;
        opts.overrides = { "tasks=ratio", "seeds=1", "epsilons=0.5", "include_standard=false", "depths=1",
                           "baselines=false" };
        opts.overrides.insert(opts.overrides.end(), quick_search.begin(), quick_search.end());
        REQUIRE(cmd_benchmark(opts, out, err) == exit_ok);
        CHECK(fs::exists(dir / "report.txt"));
        CHECK(fs::exists(dir / "report.csv"));
        CHECK(fs::exists(dir / "cells.csv"));
        opts.overrides.push_back("tasks=unknown");
        CHECK(cmd_benchmark(opts, out, err) == exit_config);
    }

    TEST_CASE("exit codes")
    {
        CHECK(exit_code_for(ErrorKind::InvalidConfig) == 2);
        CHECK(exit_code_for(ErrorKind::Parse) == 2);
        CHECK(exit_code_for(ErrorKind::Ingestion) == 3);
        CHECK(exit_code_for(ErrorKind::InvalidLag) == 3);
        CHECK(exit_code_for(ErrorKind::SearchFailed) == 4);
        CHECK(exit_code_for(ErrorKind::FitFailed) == 4);
    }
}
