#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadsr/actor.hpp"
#include "loadsr/critic.hpp"
#include "loadsr/data.hpp"
#include "loadsr/reward_pool.hpp"

namespace loadsr {

enum class PolicyMode { RiskSeeking, Standard };

// PerBatch: one policy step after all N rewards. PerSample: a step after every critic run.
enum class UpdatePlacement { PerBatch, PerSample };

struct SearchConfig {
    std::size_t depth = 5;
    double epsilon = 0.5;
    PolicyMode policy = PolicyMode::RiskSeeking;
    UpdatePlacement placement = UpdatePlacement::PerBatch;
    std::size_t actor_iterations = 200;     // I1
    std::size_t critic_iterations = 100;    // I2
    std::size_t finetune_iterations = 2000; // I3
    std::size_t batch_size = 32;            // N
    std::size_t pool_capacity = 16;         // C
    double actor_learning_rate = 1.0;
    double critic_learning_rate = 0.1;
    double entropy_coef = 0.0;
    std::uint64_t seed = 0;
    std::vector<std::string> operators = default_operator_names();
    double guard_epsilon = default_guard_epsilon;
    std::size_t threads = 1;

    static std::vector<std::string> default_operator_names();
};

// Throws InvalidConfig on any violated constraint.
void validate(const SearchConfig& config);

std::string to_string(PolicyMode mode);
std::string to_string(UpdatePlacement placement);

struct PoolReportEntry {
    OperatorAssignment assignment;
    double coarse_reward = 0.0;
    std::size_t iteration = 0;
    double fine_mse = 0.0;
    bool diverged = false;
    std::vector<double> coefficients; // after fine-tuning
    std::string expression;
};

struct SearchResult {
    std::shared_ptr<const TreeTemplate> shape;
    std::shared_ptr<const OperatorLibrary> library;

    std::string expression;       // 6 significant digits
    std::string expression_exact; // round-trip precision
    OperatorAssignment assignment;
    std::vector<double> coefficients;
    double train_mse = 0.0;
    double train_rmse = 0.0;
    std::optional<double> test_rmse;

    std::vector<PoolReportEntry> pool; // in pool order (coarse reward descending)
    std::size_t best_pool_index = 0;
    std::vector<double> reward_trace;  // running max of pool rewards per outer iteration
    std::vector<std::vector<double>> policy_logits;
    std::size_t skipped_iterations = 0;
    std::size_t degenerate_samples = 0;
    double wall_seconds = 0.0;

    [[nodiscard]] ExpressionTree tree() const;
};

// Hooks for observing the search loop; all callbacks run on the calling thread in sample order.
class SearchObserver {
public:
    virtual ~SearchObserver() = default;
    virtual void on_batch_sampled(std::size_t /*iteration*/, std::span<const SampledAction> /*batch*/) {}
    virtual void on_critic_trained(std::size_t /*iteration*/, std::size_t /*sample*/, const TrainReport& /*report*/) {}
    virtual void on_reward(std::size_t /*iteration*/, std::size_t /*sample*/, double /*reward*/) {}
    virtual void on_pool_update(std::size_t /*iteration*/, std::size_t /*sample*/, bool /*changed*/) {}
    virtual void on_policy_update(std::size_t /*iteration*/) {}
    virtual void on_iteration_skipped(std::size_t /*iteration*/) {}
    virtual void on_fine_tuned(std::size_t /*pool_index*/, const TrainReport& /*report*/) {}
};

SearchResult run_search(const SearchConfig& config, const Dataset& train, const Dataset* test = nullptr,
                        SearchObserver* observer = nullptr);

std::vector<double> best_reward_trace(const SearchResult& result);

} // namespace loadsr
