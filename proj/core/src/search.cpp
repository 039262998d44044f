#include "loadsr/search.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "loadsr/baselines.hpp"
#include "loadsr/error.hpp"
#include "loadsr/parallel.hpp"
#include "loadsr/random.hpp"

namespace loadsr {

std::vector<std::string> SearchConfig::default_operator_names()
{
    return default_library(1).names();
}

std::string to_string(PolicyMode mode) { return mode == PolicyMode::RiskSeeking ? "risk_seeking" : "standard"; }

std::string to_string(UpdatePlacement placement)
{
    return placement == UpdatePlacement::PerBatch ? "per_batch" : "per_sample";
}

void validate(const SearchConfig& c)
{
    auto fail = [](const std::string& what) { throw Error(ErrorKind::InvalidConfig, what); };
    if (c.depth == 0) fail("depth must be at least 1");
    if (!(c.epsilon > 0.0 && c.epsilon <= 1.0)) fail(fmt::format("epsilon must lie in (0, 1], got {}", c.epsilon));
    if (c.actor_iterations == 0) fail("actor_iterations must be at least 1");
    if (c.critic_iterations == 0) fail("critic_iterations must be at least 1");
    if (c.finetune_iterations == 0) fail("finetune_iterations must be at least 1");
    if (c.batch_size == 0) fail("batch_size must be at least 1");
    if (c.pool_capacity == 0) fail("pool_capacity must be at least 1");
    if (!(c.actor_learning_rate > 0.0)) fail("actor_learning_rate must be positive");
    if (!(c.critic_learning_rate > 0.0)) fail("critic_learning_rate must be positive");
    if (!(c.entropy_coef >= 0.0)) fail("entropy_coef must be non-negative");
    if (!(c.guard_epsilon > 0.0)) fail("guard_epsilon must be positive");
    if (c.threads == 0) fail("threads must be at least 1");
    try {
        library_from_names(c.operators, 1, c.guard_epsilon);
    } catch (const Error& e) {
        fail(e.what());
    }
}

ExpressionTree SearchResult::tree() const
{
    ExpressionTree t(shape, library, assignment);
    t.set_coefficients(coefficients);
    return t;
}

std::vector<double> best_reward_trace(const SearchResult& result) { return result.reward_trace; }

namespace {

struct CriticOutcome {
    TrainReport report;
    std::vector<double> coefficients;
    double reward = 0.0;
};

double score(const TrainReport& report)
{
    if (!std::isfinite(report.final_mse)) {
        return 0.0;
    }
    return reward(std::sqrt(report.final_mse));
}

} // namespace

SearchResult run_search(const SearchConfig& config, const Dataset& train, const Dataset* test, SearchObserver* observer)
{
    validate(config);
    if (train.rows() == 0 || train.cols() == 0) {
        throw Error(ErrorKind::InvalidInput, "training dataset is empty");
    }
    if (test != nullptr && test->rows() > 0 && test->cols() != train.cols()) {
        throw Error(ErrorKind::InvalidInput, "test dataset has a different column count");
    }
    const auto start = std::chrono::steady_clock::now();

    auto library = std::make_shared<const OperatorLibrary>(
        library_from_names(config.operators, train.cols(), config.guard_epsilon));
    auto shape = std::make_shared<const TreeTemplate>(TreeTemplate::build(config.depth, train.cols()));
    Policy policy = new_policy(*shape, *library, config.actor_learning_rate, config.entropy_coef);
    Rng actor_rng(derive_seed(config.seed, { 0 }));
    CandidatePool pool(config.pool_capacity);

    TrainOptions coarse;
    coarse.learning_rate = config.critic_learning_rate;
    coarse.iterations = config.critic_iterations;

    const std::size_t n_batch = config.batch_size;
    std::vector<EvalWorkspace> workspaces(1);
    std::vector<CriticOutcome> outcomes(n_batch);
    std::vector<ScoredAction> scored(n_batch);

    SearchResult result;
    result.shape = shape;
    result.library = library;

    for (std::size_t iter = 0; iter < config.actor_iterations; ++iter) {
        auto batch = sample_batch(policy, n_batch, actor_rng);
        if (observer != nullptr) {
            observer->on_batch_sampled(iter, batch);
        }

        parallel_for(n_batch, config.threads, [&](std::size_t j) {
            EvalWorkspace local;
            auto& ws = config.threads <= 1 ? workspaces[0] : local;
            ExpressionTree tree = assign_operators(shape, library, batch[j].action);
            init_params(tree, derive_seed(config.seed, { 1, iter, j }));
            auto& out = outcomes[j];
            out.report = train_critic(tree, train.X, train.y, coarse, ws);
            out.coefficients.assign(tree.coefficients().begin(), tree.coefficients().end());
            out.reward = score(out.report);
        });

        bool any_valid = false;
        for (std::size_t j = 0; j < n_batch; ++j) {
            const auto& out = outcomes[j];
            scored[j] = { batch[j].action, out.reward };
            if (observer != nullptr) {
                observer->on_critic_trained(iter, j, out.report);
                observer->on_reward(iter, j, out.reward);
            }
            if (out.reward > 0.0) {
                any_valid = true;
                bool changed = pool.insert({ batch[j].action, out.coefficients, out.reward, iter });
                if (observer != nullptr) {
                    observer->on_pool_update(iter, j, changed);
                }
            } else {
                ++result.degenerate_samples;
            }

            if (config.placement == UpdatePlacement::PerSample && any_valid) {
                std::span<const ScoredAction> one(&scored[j], 1);
                double weight = 0.0;
                if (config.policy == PolicyMode::RiskSeeking) {
                    std::vector<double> seen(j + 1);
                    for (std::size_t k = 0; k <= j; ++k) {
                        seen[k] = scored[k].reward;
                    }
                    double threshold = empirical_quantile(seen, config.epsilon);
                    weight = scored[j].reward >= threshold ? scored[j].reward - threshold : 0.0;
                } else {
                    weight = scored[j].reward - policy.baseline().value_or(scored[j].reward);
                }
                policy.ascend(one, std::span<const double>(&weight, 1), static_cast<double>(n_batch));
                if (observer != nullptr) {
                    observer->on_policy_update(iter);
                }
            }
        }

        if (!any_valid) {
            ++result.skipped_iterations;
            fmt::print(stderr, "warning: iteration {} produced only degenerate expressions; policy unchanged\n", iter);
            if (observer != nullptr) {
                observer->on_iteration_skipped(iter);
            }
        } else if (config.placement == UpdatePlacement::PerBatch) {
            if (config.policy == PolicyMode::RiskSeeking) {
                risk_seeking_update(policy, scored, config.epsilon);
            } else {
                standard_update(policy, scored);
            }
            if (observer != nullptr) {
                observer->on_policy_update(iter);
            }
        } else if (config.policy == PolicyMode::Standard) {
            double mean = 0.0;
            for (const auto& s : scored) {
                mean += s.reward;
            }
            mean /= static_cast<double>(n_batch);
            policy.set_baseline(policy.baseline() ? Policy::baseline_decay * *policy.baseline()
                                                        + (1.0 - Policy::baseline_decay) * mean
                                                  : mean);
        }
        result.reward_trace.push_back(pool.empty() ? 0.0 : pool.best().reward);
    }

    if (pool.empty()) {
        throw Error(ErrorKind::SearchFailed, "every sampled expression was degenerate; the candidate pool is empty");
    }

    // fine-tune every pool candidate from its coarse coefficients
    const auto entries = pool.entries();
    result.pool.resize(entries.size());
    std::vector<TrainReport> fine_reports(entries.size());
    const double fine_rate = config.critic_learning_rate / fine_tune_rate_divisor;
    parallel_for(entries.size(), config.threads, [&](std::size_t k) {
        ExpressionTree tree = assign_operators(shape, library, entries[k].assignment);
        tree.set_coefficients(entries[k].coefficients);
        EvalWorkspace ws;
        fine_reports[k] = fine_tune(tree, train.X, train.y, fine_rate, config.finetune_iterations, ws);
        auto& entry = result.pool[k];
        entry.assignment = entries[k].assignment;
        entry.coarse_reward = entries[k].reward;
        entry.iteration = entries[k].iteration;
        entry.fine_mse = fine_reports[k].final_mse;
        entry.diverged = fine_reports[k].diverged;
        entry.coefficients.assign(tree.coefficients().begin(), tree.coefficients().end());
        entry.expression = render(tree);
    });

    std::size_t best = 0;
    for (std::size_t k = 0; k < result.pool.size(); ++k) {
        if (observer != nullptr) {
            observer->on_fine_tuned(k, fine_reports[k]);
        }
        if (result.pool[k].fine_mse < result.pool[best].fine_mse) {
            best = k;
        }
    }

    const auto& chosen = result.pool[best];
    result.best_pool_index = best;
    result.assignment = chosen.assignment;
    result.coefficients = chosen.coefficients;
    result.train_mse = chosen.fine_mse;
    result.train_rmse = std::sqrt(chosen.fine_mse);
    auto tree = result.tree();
    result.expression = render(tree);
    result.expression_exact = render(tree, round_trip_digits);
    if (test != nullptr && test->rows() > 0) {
        auto pred = evaluate(tree, test->X);
        result.test_rmse = pred.degenerate ? std::numeric_limits<double>::infinity() : rmse(pred.yhat, test->y);
    }
    result.policy_logits = policy.all_logits();
    result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return result;
}

} // namespace loadsr
