#include "loadsr_app/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

#include <fmt/core.h>

#include "loadsr/baselines.hpp"
#include "loadsr/data.hpp"
#include "loadsr/expr_parser.hpp"
#include "loadsr/search.hpp"
#include "loadsr_app/manifest.hpp"
#include "loadsr_app/suite.hpp"

namespace loadsr::app {

namespace fs = std::filesystem;

namespace {

template <typename Fn>
int guarded(std::ostream& err, const char* command, Fn&& fn)
{
    try {
        return fn();
    } catch (const Error& e) {
        err << fmt::format("loadsr {}: {} error: {}\n", command, to_string(e.kind()), e.what());
        return exit_code_for(e.kind());
    } catch (const nlohmann::json::exception& e) {
        err << fmt::format("loadsr {}: {}\n", command, e.what());
        return exit_data;
    } catch (const std::exception& e) {
        err << fmt::format("loadsr {}: {}\n", command, e.what());
        return exit_failure;
    }
}

void write_text(const fs::path& path, const std::string& text)
{
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        throw Error(ErrorKind::Ingestion, fmt::format("cannot write '{}'", path.string()));
    }
    f << text;
}

std::pair<std::size_t, std::size_t> parse_rows(const std::string& spec, std::size_t n)
{
    auto colon = spec.find(':');
    if (colon == std::string::npos) {
        throw Error(ErrorKind::InvalidArgument, fmt::format("--rows expects a:b, got '{}'", spec));
    }
    auto bound = [&](std::string_view text, std::size_t fallback) -> std::size_t {
        if (text.empty()) {
            return fallback;
        }
        std::size_t v = 0;
        for (char ch : text) {
            if (ch < '0' || ch > '9') {
                throw Error(ErrorKind::InvalidArgument, fmt::format("--rows bound '{}' is not a row index", text));
            }
            v = v * 10 + static_cast<std::size_t>(ch - '0');
        }
        return v;
    };
    std::string_view sv(spec);
    auto a = bound(sv.substr(0, colon), 0);
    auto b = std::min(bound(sv.substr(colon + 1), n), n);
    if (a >= b) {
        throw Error(ErrorKind::InvalidInput, fmt::format("--rows {} selects no rows of {}", spec, n));
    }
    return { a, b };
}

} // namespace

int exit_code_for(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidLibrary:
    case ErrorKind::InvalidDepth:
    case ErrorKind::InvalidAction:
    case ErrorKind::InvalidConfig:
    case ErrorKind::InvalidArgument:
    case ErrorKind::Parse:
        return exit_config;
    case ErrorKind::InvalidInput:
    case ErrorKind::Ingestion:
    case ErrorKind::InvalidLag:
    case ErrorKind::NumericDomain:
        return exit_data;
    case ErrorKind::EmptyPool:
    case ErrorKind::FitFailed:
    case ErrorKind::SearchFailed:
        return exit_search;
    }
    return exit_failure;
}

KeyValueConfig load_config(const std::optional<fs::path>& file, const std::vector<std::string>& overrides)
{
    KeyValueConfig kv = file ? KeyValueConfig::from_file(*file) : KeyValueConfig {};
    for (const auto& item : overrides) {
        auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            throw Error(ErrorKind::InvalidConfig, fmt::format("override '{}' is not key=value", item));
        }
        kv.merge(KeyValueConfig::from_string(item));
    }
    return kv;
}

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, "generate", [&] {
        auto kv = load_config(options.config, options.overrides);
        auto config = read_trajectory_config(kv);
        kv.check_consumed();
        auto ds = generate(config);

        if (options.out.has_parent_path()) {
            fs::create_directories(options.out.parent_path());
        }
        std::vector<std::string> header { "t", "V", "P" };
        std::vector<std::vector<double>> columns { ds.time, ds.X.column(0), ds.y };
        write_csv(options.out, header, columns);

        json sidecar;
        sidecar["generator"] = to_json(config);
        sidecar["rows"] = ds.rows();
        sidecar["columns"] = header;
        auto sidecar_path = options.out;
        sidecar_path += ".json";
        write_json(sidecar_path, sidecar);
        out << fmt::format("wrote {} rows to {}\n", ds.rows(), options.out.string());
        return static_cast<int>(exit_ok);
    });
}

int cmd_fit(const FitOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, "fit", [&] {
        const auto start = std::chrono::steady_clock::now();
        auto kv = load_config(options.config, options.overrides);
        if (options.policy) {
            kv.set("policy", *options.policy);
        }
        if (options.seed) {
            kv.set("seed", std::to_string(*options.seed));
        }
        auto config = read_search_config(kv);
        auto data_options = read_data_options(kv);
        kv.check_consumed();
        validate(config);

        auto full = load_csv(options.data, data_options.features, data_options.target, data_options.time_column);
        if (!data_options.lags.empty()) {
            full = add_lags(full, data_options.lags, data_options.lag_targets);
        }
        auto order = split_order(full.rows(), data_options.train_fraction, data_options.split, split_seed(config.seed));
        std::span<const std::size_t> rows(order.order);
        auto train = take_rows(full, rows.first(order.train_rows));
        auto test = take_rows(full, rows.subspan(order.train_rows));
        auto evaluated = full;
        if (data_options.normalize) {
            train = standardize(train);
            test = apply_normalization(test, *train.normalization);
            evaluated = apply_normalization(full, *train.normalization);
        }
        const auto load_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

        auto result = run_search(config, train, &test);

        std::vector<BaselineFit> fits;
        json baseline_json = json::array();
        if (options.baselines) {
            auto try_fit = [&](const std::string& name, auto&& fn) {
                try {
                    fits.push_back(fn());
                    baseline_json.push_back(to_json(fits.back()));
                } catch (const Error& e) {
                    baseline_json.push_back({ { "model", name }, { "error", e.what() } });
                }
            };
            if (train.cols() == 1) {
                try_fit("zip", [&] { return fit_zip(train, &test); });
            }
            try_fit("poly2", [&] { return fit_polynomial(train, 2, &test); });
            try_fit("poly3", [&] { return fit_polynomial(train, 3, &test); });
        }

        fs::create_directories(options.out_dir);
        auto tree = result.tree();
        auto prediction = evaluate(tree, evaluated.X);
        std::vector<double> time = full.time;
        if (time.empty()) {
            for (std::size_t i = 0; i < full.rows(); ++i) {
                time.push_back(static_cast<double>(i));
            }
        }
        std::vector<double> is_test(full.rows(), 0.0);
        for (std::size_t k = order.train_rows; k < order.order.size(); ++k) {
            is_test[order.order[k]] = 1.0;
        }
        std::vector<std::string> header { "t", "y_true", "y_pred", "test" };
        std::vector<std::vector<double>> columns { time, full.y, prediction.yhat, is_test };
        write_csv(options.out_dir / "predictions.csv", header, columns);
        write_text(options.out_dir / "expression.txt", result.expression + "\n" + result.expression_exact + "\n");

        const auto total_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        json manifest;
        manifest["config"] = to_json(config);
        manifest["seed"] = config.seed;
        manifest["library"] = result.library->names();
        json data;
        data["path"] = options.data.string();
        data["features"] = data_options.features;
        data["target"] = data_options.target;
        data["lags"] = data_options.lags;
        data["lag_targets"] = data_options.lag_targets;
        data["train_fraction"] = data_options.train_fraction;
        data["split"] = data_options.split == SplitMode::Chronological ? "chronological" : "shuffled";
        data["normalize"] = data_options.normalize;
        data["dropped_rows"] = full.dropped_rows;
        data["fingerprint"] = dataset_json(full, train.rows(), test.rows());
        if (train.normalization) {
            data["normalization"] = { { "mean", train.normalization->mean }, { "scale", train.normalization->scale } };
        }
        manifest["data"] = data;
        manifest["result"] = to_json(result);
        manifest["baselines"] = baseline_json;
        manifest["timings"] = { { "load_seconds", load_seconds },
                                { "search_seconds", result.wall_seconds },
                                { "total_seconds", total_seconds } };
        write_json(options.out_dir / "manifest.json", manifest);

        out << fmt::format("expression: {}\n", result.expression);
        out << fmt::format("train rmse: {:.6g}\n", result.train_rmse);
        if (result.test_rmse) {
            out << fmt::format("test rmse:  {:.6g}\n", *result.test_rmse);
        }
        for (const auto& f : fits) {
            out << fmt::format("baseline {}: test rmse {:.6g}\n", f.name(), f.test_rmse.value_or(std::nan("")));
        }
        if (options.verbose) {
            out << fmt::format("skipped iterations: {}, degenerate samples: {}, {:.2f} s\n", result.skipped_iterations,
                               result.degenerate_samples, result.wall_seconds);
        }
        return static_cast<int>(exit_ok);
    });
}

int cmd_benchmark(const BenchmarkOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, "benchmark", [&] {
        auto kv = load_config(options.config, options.overrides);
        auto spec = read_suite_spec(kv);
        kv.check_consumed();
        validate(spec.base);

        std::size_t done = 0;
        auto report = run_suite(spec, [&](const CellResult& cell) {
            ++done;
            if (options.verbose) {
                out << fmt::format("[{}] {} seed={} L={} {} eps={}: test rmse {:.4g}{}\n", done, cell.key.task,
                                   cell.key.seed, cell.key.depth, to_string(cell.key.policy), cell.key.epsilon,
                                   cell.test_rmse, cell.error.empty() ? "" : " (" + cell.error + ")");
                out.flush();
            }
        });

        fs::create_directories(options.out_dir);
        auto text = format_report_text(report);
        write_text(options.out_dir / "report.txt", text);
        write_text(options.out_dir / "report.csv", format_report_csv(report));
        write_text(options.out_dir / "cells.csv", format_cells_csv(report));
        out << text;
        return static_cast<int>(exit_ok);
    });
}

int cmd_eval(const EvalOptions& options, std::ostream& out, std::ostream& err)
{
    return guarded(err, "eval", [&] {
        auto ds = load_csv(options.data, options.features, options.target);
        std::size_t a = 0;
        std::size_t b = ds.rows();
        if (options.rows) {
            std::tie(a, b) = parse_rows(*options.rows, ds.rows());
        }
        auto names = options.operators.empty() ? SearchConfig::default_operator_names() : options.operators;
        auto library = std::make_shared<const OperatorLibrary>(library_from_names(names, ds.cols()));
        auto tree = parse_expression(options.expression, library);

        std::vector<std::size_t> idx;
        for (std::size_t i = a; i < b; ++i) {
            idx.push_back(i);
        }
        auto subset = take_rows(ds, idx);
        auto prediction = evaluate(tree, subset.X);
        if (prediction.degenerate) {
            throw Error(ErrorKind::NumericDomain, "expression is non-finite on the data");
        }
        double sq = 0.0;
        double ab = 0.0;
        for (std::size_t i = 0; i < subset.rows(); ++i) {
            double e = prediction.yhat[i] - subset.y[i];
            sq += e * e;
            ab += std::abs(e);
        }
        const auto n = static_cast<double>(subset.rows());
        out << fmt::format("rows: {}\nrmse: {}\nmae: {}\n", subset.rows(), std::sqrt(sq / n), ab / n);
        return static_cast<int>(exit_ok);
    });
}

} // namespace loadsr::app
