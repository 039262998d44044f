#include "loadsr_app/manifest.hpp"

#include <cmath>
#include <fstream>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr::app {

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json to_json(const SearchConfig& c)
{
    return {
        { "depth", c.depth },
        { "epsilon", c.epsilon },
        { "policy", to_string(c.policy) },
        { "update_placement", to_string(c.placement) },
        { "actor_iterations", c.actor_iterations },
        { "critic_iterations", c.critic_iterations },
        { "finetune_iterations", c.finetune_iterations },
        { "batch_size", c.batch_size },
        { "pool_capacity", c.pool_capacity },
        { "actor_learning_rate", c.actor_learning_rate },
        { "critic_learning_rate", c.critic_learning_rate },
        { "entropy_coef", c.entropy_coef },
        { "seed", c.seed },
        { "operators", c.operators },
        { "guard_epsilon", c.guard_epsilon },
    };
}

json to_json(const TrajectoryConfig& c)
{
    json j = {
        { "kind", c.kind == GeneratorKind::Zip ? "zip" : "erl" },
        { "duration", c.duration },
        { "dt", c.dt },
        { "fault_time", c.fault_time },
        { "dip", c.dip },
        { "recovery_tau", c.recovery_tau },
        { "noise_sigma", c.noise_sigma },
        { "seed", c.seed },
        { "p0", c.p0 },
    };
    if (c.kind == GeneratorKind::Zip) {
        j["a_z"] = c.a_z;
        j["a_i"] = c.a_i;
        j["a_p"] = c.a_p;
    } else {
        j["alpha_s"] = c.alpha_s;
        j["alpha_t"] = c.alpha_t;
        j["t_p"] = c.t_p;
    }
    return j;
}

json to_json(const SearchResult& r)
{
    json pool = json::array();
    for (const auto& e : r.pool) {
        pool.push_back({
            { "assignment", e.assignment },
            { "coarse_reward", e.coarse_reward },
            { "iteration", e.iteration },
            { "fine_mse", number_or_null(e.fine_mse) },
            { "diverged", e.diverged },
            { "expression", e.expression },
        });
    }
    return {
        { "expression", r.expression },
        { "expression_exact", r.expression_exact },
        { "depth", r.shape->depth() },
        { "assignment", r.assignment },
        { "coefficients", r.coefficients },
        { "train_mse", number_or_null(r.train_mse) },
        { "train_rmse", number_or_null(r.train_rmse) },
        { "test_rmse", r.test_rmse ? number_or_null(*r.test_rmse) : json(nullptr) },
        { "best_pool_index", r.best_pool_index },
        { "pool", pool },
        { "reward_trace", r.reward_trace },
        { "policy_logits", r.policy_logits },
        { "skipped_iterations", r.skipped_iterations },
        { "degenerate_samples", r.degenerate_samples },
    };
}

json to_json(const BaselineFit& fit)
{
    json j = {
        { "name", fit.name() },
        { "parameters", fit.parameters },
        { "train_rmse", number_or_null(fit.train_rmse) },
        { "test_rmse", fit.test_rmse ? number_or_null(*fit.test_rmse) : json(nullptr) },
    };
    if (fit.kind == BaselineKind::Zip) {
        j["parameter_names"] = { "p0", "a_z", "a_i", "a_p" };
    }
    return j;
}

json dataset_json(const Dataset& full, std::size_t train_rows, std::size_t test_rows)
{
    json j = {
        { "rows", full.rows() },
        { "cols", full.cols() },
        { "features", full.feature_names },
        { "target", full.target_name },
        { "hash", fmt::format("{:016x}", fingerprint(full)) },
        { "dropped_rows", full.dropped_rows },
        { "train_rows", train_rows },
        { "test_rows", test_rows },
    };
    if (full.normalization) {
        j["normalization"] = { { "mean", full.normalization->mean }, { "scale", full.normalization->scale } };
    }
    return j;
}

json without_timings(const json& manifest)
{
    json copy = manifest;
    copy.erase("timings");
    return copy;
}

void write_json(const std::filesystem::path& path, const json& value)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(ErrorKind::Ingestion, fmt::format("cannot write '{}'", path.string()));
    }
    out << value.dump(2) << '\n';
}

json read_json(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw Error(ErrorKind::Ingestion, fmt::format("cannot open '{}'", path.string()));
    }
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Ingestion, fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
    }
}

} // namespace loadsr::app
