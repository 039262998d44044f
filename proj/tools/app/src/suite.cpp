#include "loadsr_app/suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <set>

#include <fmt/core.h>

#include "loadsr/error.hpp"
#include "loadsr/parallel.hpp"
#include "loadsr/random.hpp"

namespace loadsr::app {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();
constexpr double suite_train_fraction = 0.8;
constexpr std::size_t function_task_samples = 100;

Dataset function_task(const std::string& name, std::uint64_t seed, double lo, double hi, double (*f)(double))
{
    Rng rng(derive_seed(seed, { 0x7461736bULL }));
    Dataset ds;
    ds.feature_names = { "x" };
    ds.target_name = "y";
    ds.X = Matrix(function_task_samples, 1);
    for (std::size_t i = 0; i < function_task_samples; ++i) {
        double x = uniform(rng, lo, hi);
        ds.X(i, 0) = x;
        ds.y.push_back(f(x));
    }
    (void)name;
    return ds;
}

TrajectoryConfig trajectory_task(GeneratorKind kind, std::uint64_t seed)
{
    TrajectoryConfig c;
    c.kind = kind;
    c.dt = 0.1;
    c.seed = seed;
    if (kind == GeneratorKind::Erl) {
        c.dip = 0.4;
        c.alpha_s = 0.5;
        c.alpha_t = 2.5;
        c.t_p = 1.5;
    }
    return c;
}

std::string setting_label(PolicyMode policy, double epsilon)
{
    return policy == PolicyMode::Standard ? std::string("standard") : fmt::format("eps={}", epsilon);
}

std::string fmt_summary(const Summary& s)
{
    if (s.count == 0) {
        return "-";
    }
    std::string text = std::isfinite(s.median) ? fmt::format("{:.3g}", s.median) : std::string("inf");
    text += fmt::format(" [{:.2g},{:.2g}]", s.q1, s.q3);
    if (s.failures > 0) {
        text += fmt::format(" ({} failed)", s.failures);
    }
    return text;
}

std::string table(const std::string& title, const std::vector<std::string>& header,
                  const std::vector<std::vector<std::string>>& rows)
{
    std::vector<std::size_t> width(header.size(), 0);
    for (std::size_t j = 0; j < header.size(); ++j) {
        width[j] = header[j].size();
        for (const auto& r : rows) {
            width[j] = std::max(width[j], r[j].size());
        }
    }
    std::string out = title + "\n";
    auto line = [&](const std::vector<std::string>& cells) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
            out += j == 0 ? fmt::format("{:<{}}", cells[j], width[j]) : fmt::format(" | {:>{}}", cells[j], width[j]);
        }
        out += "\n";
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width) {
        total += w + 3;
    }
    out += std::string(total - 3, '-') + "\n";
    for (const auto& r : rows) {
        line(r);
    }
    return out;
}

} // namespace

std::vector<std::string> builtin_tasks() { return { "sin", "zip", "erl", "erl_noisy", "exp_load", "ratio" }; }

std::vector<std::string> default_suite_tasks() { return { "sin", "zip", "erl", "exp_load", "ratio" }; }

Dataset make_task(const std::string& name, std::uint64_t seed)
{
    if (name == "sin") {
        return function_task(name, seed, -3.0, 3.0, [](double x) { return std::sin(1.3 * x) + 0.5; });
    }
    if (name == "ratio") {
        return function_task(name, seed, -3.0, 3.0, [](double x) { return x / (1.0 + x * x); });
    }
    if (name == "zip") {
        return generate(trajectory_task(GeneratorKind::Zip, seed));
    }
    if (name == "erl" || name == "erl_noisy") {
        auto c = trajectory_task(GeneratorKind::Erl, seed);
        c.noise_sigma = name == "erl_noisy" ? 0.01 : 0.0;
        return generate(c);
    }
    if (name == "exp_load") {
        // static exponential load P = V^1.6 on a fault trajectory
        auto c = trajectory_task(GeneratorKind::Zip, seed);
        c.dip = 0.5;
        Rng rng(seed);
        auto traj = gen_voltage(c, rng);
        Dataset ds;
        ds.feature_names = { "V" };
        ds.target_name = "P";
        ds.dt = c.dt;
        ds.time = traj.time;
        ds.X = Matrix(traj.voltage.size(), 1);
        for (std::size_t i = 0; i < traj.voltage.size(); ++i) {
            ds.X(i, 0) = traj.voltage[i];
            ds.y.push_back(std::pow(traj.voltage[i], 1.6));
        }
        return ds;
    }
    throw Error(ErrorKind::InvalidConfig, fmt::format("unknown task '{}'", name));
}

std::pair<Dataset, Dataset> task_split(const std::string& name, std::uint64_t seed)
{
    return split(make_task(name, seed), suite_train_fraction, SplitMode::Shuffled, split_seed(seed));
}

double quantile_sorted(std::span<const double> sorted, double q)
{
    if (sorted.empty()) {
        return std::nan("");
    }
    double pos = q * static_cast<double>(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || sorted[lo] == sorted[hi]) {
        return sorted[lo];
    }
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Summary summarize(std::span<const double> values)
{
    Summary s;
    s.count = values.size();
    std::vector<double> v;
    v.reserve(values.size());
    for (double x : values) {
        if (!std::isfinite(x)) {
            ++s.failures;
            v.push_back(inf);
        } else {
            v.push_back(x);
        }
    }
    if (v.empty()) {
        s.median = s.q1 = s.q3 = std::nan("");
        return s;
    }
    std::sort(v.begin(), v.end());
    s.median = quantile_sorted(v, 0.5);
    s.q1 = quantile_sorted(v, 0.25);
    s.q3 = quantile_sorted(v, 0.75);
    return s;
}

SuiteSpec read_suite_spec(const KeyValueConfig& kv)
{
    SuiteSpec spec;
    spec.tasks = kv.get_list("tasks", spec.tasks);
    auto known = builtin_tasks();
    for (const auto& t : spec.tasks) {
        if (std::find(known.begin(), known.end(), t) == known.end()) {
            throw Error(ErrorKind::InvalidConfig, fmt::format("unknown task '{}'", t));
        }
    }
    if (auto list = kv.get("seed_list")) {
        spec.seeds.clear();
        for (auto s : kv.get_size_list("seed_list", {})) {
            spec.seeds.push_back(s);
        }
    } else {
        auto count = kv.get_size("seeds", spec.seeds.size());
        spec.seeds.clear();
        for (std::uint64_t s = 0; s < count; ++s) {
            spec.seeds.push_back(s);
        }
    }
    spec.epsilons = kv.get_double_list("epsilons", spec.epsilons);
    spec.include_standard = kv.get_bool("include_standard", spec.include_standard);
    spec.depths = kv.get_size_list("depths", spec.depths);
    spec.baselines = kv.get_bool("baselines", spec.baselines);
    spec.threads = kv.get_size("suite_threads", spec.threads);
    spec.base = read_search_config(kv);
    if (spec.tasks.empty() || spec.seeds.empty()) {
        throw Error(ErrorKind::InvalidConfig, "suite needs at least one task and one seed");
    }
    return spec;
}

const CellResult* SuiteReport::find(const RunKey& key) const
{
    auto it = std::lower_bound(cells.begin(), cells.end(), key,
                               [](const CellResult& c, const RunKey& k) { return c.key < k; });
    return it != cells.end() && it->key == key ? &*it : nullptr;
}

std::vector<double> SuiteReport::values(const std::string& task, std::size_t depth, PolicyMode policy,
                                        double epsilon) const
{
    std::vector<double> out;
    for (auto seed : spec.seeds) {
        RunKey key { task, seed, depth, policy, policy == PolicyMode::Standard ? 0.0 : epsilon };
        if (const auto* c = find(key)) {
            out.push_back(c->test_rmse);
        }
    }
    return out;
}

std::vector<double> SuiteReport::pooled(std::size_t depth, PolicyMode policy, double epsilon) const
{
    std::vector<double> out;
    for (const auto& task : spec.tasks) {
        auto v = values(task, depth, policy, epsilon);
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

std::vector<double> SuiteReport::baseline_values(const std::string& task, const std::string& model) const
{
    std::vector<double> out;
    for (const auto& b : baseline_cells) {
        if (b.task == task && b.model == model) {
            out.push_back(b.test_rmse);
        }
    }
    return out;
}

CellResult run_cell(const RunKey& key, const SearchConfig& base)
{
    CellResult cell;
    cell.key = key;
    try {
        auto [train, test] = task_split(key.task, key.seed);
        SearchConfig config = base;
        config.depth = key.depth;
        config.policy = key.policy;
        if (key.policy == PolicyMode::RiskSeeking) {
            config.epsilon = key.epsilon;
        }
        config.seed = key.seed;
        config.threads = 1;
        auto result = run_search(config, train, &test);
        cell.test_rmse = result.test_rmse.value_or(inf);
        if (!std::isfinite(cell.test_rmse)) {
            cell.test_rmse = inf;
        }
        cell.train_rmse = result.train_rmse;
        cell.expression = result.expression;
        cell.seconds = result.wall_seconds;
    } catch (const std::exception& e) {
        cell.test_rmse = inf;
        cell.train_rmse = inf;
        cell.error = e.what();
    }
    return cell;
}

SuiteReport run_suite(const SuiteSpec& spec, const ProgressFn& progress)
{
    std::set<RunKey> keys;
    const std::size_t main_depth = spec.base.depth;
    for (const auto& task : spec.tasks) {
        for (auto seed : spec.seeds) {
            for (double eps : spec.epsilons) {
                keys.insert({ task, seed, main_depth, PolicyMode::RiskSeeking, eps });
            }
            if (spec.include_standard) {
                keys.insert({ task, seed, main_depth, PolicyMode::Standard, 0.0 });
            }
            for (auto depth : spec.depths) {
                keys.insert({ task, seed, depth, PolicyMode::RiskSeeking, spec.base.epsilon });
            }
        }
    }

    SuiteReport report;
    report.spec = spec;
    std::vector<RunKey> ordered(keys.begin(), keys.end());
    report.cells.resize(ordered.size());
    std::mutex progress_mutex;
    parallel_for(ordered.size(), spec.threads, [&](std::size_t i) {
        report.cells[i] = run_cell(ordered[i], spec.base);
        if (progress) {
            std::lock_guard lock(progress_mutex);
            progress(report.cells[i]);
        }
    });

    if (spec.baselines) {
        for (const auto& task : spec.tasks) {
            for (auto seed : spec.seeds) {
                auto [train, test] = task_split(task, seed);
                auto add = [&](const std::string& model, auto&& fit) {
                    BaselineCell cell { task, seed, model, inf, {} };
                    try {
                        BaselineFit f = fit();
                        cell.test_rmse = f.test_rmse.value_or(inf);
                    } catch (const std::exception& e) {
                        cell.error = e.what();
                    }
                    report.baseline_cells.push_back(cell);
                };
                add("zip", [&] { return fit_zip(train, &test); });
                add("poly2", [&] { return fit_polynomial(train, 2, &test); });
                add("poly3", [&] { return fit_polynomial(train, 3, &test); });
            }
        }
    }
    return report;
}

std::string format_report_text(const SuiteReport& report)
{
    const auto& spec = report.spec;
    const std::size_t main_depth = spec.base.depth;
    std::string out = fmt::format("Test RMSE: median [q1,q3] over {} seeds\n\n", spec.seeds.size());

    {
        std::vector<std::string> header { "Task" };
        for (double eps : spec.epsilons) {
            header.push_back(fmt::format("Risk eps={}", eps));
        }
        if (spec.include_standard) {
            header.emplace_back("Standard");
        }
        std::vector<std::vector<std::string>> rows;
        auto row_for = [&](const std::string& label, auto&& values_for) {
            std::vector<std::string> row { label };
            for (double eps : spec.epsilons) {
                row.push_back(fmt_summary(summarize(values_for(PolicyMode::RiskSeeking, eps))));
            }
            if (spec.include_standard) {
                row.push_back(fmt_summary(summarize(values_for(PolicyMode::Standard, 0.0))));
            }
            rows.push_back(row);
        };
        for (const auto& task : spec.tasks) {
            row_for(task, [&](PolicyMode p, double e) { return report.values(task, main_depth, p, e); });
        }
        if (spec.tasks.size() > 1) {
            row_for("(all)", [&](PolicyMode p, double e) { return report.pooled(main_depth, p, e); });
        }
        out += table(fmt::format("Policy comparison (L={})", main_depth), header, rows) + "\n";
    }

    if (!spec.depths.empty()) {
        std::vector<std::string> header { "Task" };
        for (auto d : spec.depths) {
            header.push_back(fmt::format("L={}", d));
        }
        std::vector<std::vector<std::string>> rows;
        for (const auto& task : spec.tasks) {
            std::vector<std::string> row { task };
            for (auto d : spec.depths) {
                row.push_back(fmt_summary(summarize(report.values(task, d, PolicyMode::RiskSeeking, spec.base.epsilon))));
            }
            rows.push_back(row);
        }
        if (spec.tasks.size() > 1) {
            std::vector<std::string> all { "(all)" };
            for (auto d : spec.depths) {
                all.push_back(fmt_summary(summarize(report.pooled(d, PolicyMode::RiskSeeking, spec.base.epsilon))));
            }
            rows.push_back(all);
        }
        out += table(fmt::format("Depth comparison (eps={})", spec.base.epsilon), header, rows) + "\n";
    }

    if (spec.baselines) {
        std::vector<std::string> header { "Task", "Engine", "ZIP", "Poly2", "Poly3" };
        std::vector<std::vector<std::string>> rows;
        for (const auto& task : spec.tasks) {
            rows.push_back({
                task,
                fmt_summary(summarize(report.values(task, main_depth, spec.base.policy, spec.base.epsilon))),
                fmt_summary(summarize(report.baseline_values(task, "zip"))),
                fmt_summary(summarize(report.baseline_values(task, "poly2"))),
                fmt_summary(summarize(report.baseline_values(task, "poly3"))),
            });
        }
        out += table("Engine vs baselines", header, rows);
    }
    return out;
}

std::string format_report_csv(const SuiteReport& report)
{
    const auto& spec = report.spec;
    const std::size_t main_depth = spec.base.depth;
    std::string out = "table,task,setting,median,q1,q3,count,failures\n";
    auto emit = [&](const std::string& tab, const std::string& task, const std::string& setting, const Summary& s) {
        out += fmt::format("{},{},{},{},{},{},{},{}\n", tab, task, setting, s.median, s.q1, s.q3, s.count, s.failures);
    };
    std::vector<std::string> tasks = spec.tasks;
    if (tasks.size() > 1) {
        tasks.emplace_back("(all)");
    }
    for (const auto& task : tasks) {
        auto vals = [&](std::size_t d, PolicyMode p, double e) {
            return task == "(all)" ? report.pooled(d, p, e) : report.values(task, d, p, e);
        };
        for (double eps : spec.epsilons) {
            emit("policy", task, setting_label(PolicyMode::RiskSeeking, eps), summarize(vals(main_depth, PolicyMode::RiskSeeking, eps)));
        }
        if (spec.include_standard) {
            emit("policy", task, "standard", summarize(vals(main_depth, PolicyMode::Standard, 0.0)));
        }
        for (auto d : spec.depths) {
            emit("depth", task, fmt::format("L={}", d), summarize(vals(d, PolicyMode::RiskSeeking, spec.base.epsilon)));
        }
    }
    if (spec.baselines) {
        for (const auto& task : spec.tasks) {
            emit("baseline", task, "engine", summarize(report.values(task, main_depth, spec.base.policy, spec.base.epsilon)));
            for (const char* model : { "zip", "poly2", "poly3" }) {
                emit("baseline", task, model, summarize(report.baseline_values(task, model)));
            }
        }
    }
    return out;
}

std::string format_cells_csv(const SuiteReport& report)
{
    std::string out = "task,seed,depth,policy,epsilon,test_rmse,train_rmse,seconds,error\n";
    for (const auto& c : report.cells) {
        std::string error = c.error;
        std::replace(error.begin(), error.end(), ',', ';');
        out += fmt::format("{},{},{},{},{},{},{},{:.3f},{}\n", c.key.task, c.key.seed, c.key.depth, to_string(c.key.policy),
                           c.key.epsilon, c.test_rmse, c.train_rmse, c.seconds, error);
    }
    return out;
}

} // namespace loadsr::app
