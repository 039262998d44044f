#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "loadsr/expr_tree.hpp"
#include "loadsr/random.hpp"

namespace loadsr {

struct SampledAction {
    OperatorAssignment action;
    double log_prob = 0.0;
};

struct ScoredAction {
    OperatorAssignment action;
    double reward = 0.0;
};

// Factorized categorical policy: one logit vector per in-order tree position.
class Policy {
public:
    static constexpr double baseline_decay = 0.9;

    Policy(std::vector<std::size_t> choice_counts, double learning_rate, double entropy_coef = 0.0);

    [[nodiscard]] std::size_t positions() const noexcept { return logits_.size(); }
    [[nodiscard]] std::span<const double> logits(std::size_t position) const { return logits_.at(position); }
    void set_logits(std::size_t position, std::span<const double> values);

    [[nodiscard]] std::vector<double> probabilities(std::size_t position) const;
    [[nodiscard]] double log_prob(const OperatorAssignment& action) const;
    [[nodiscard]] double entropy() const;

    [[nodiscard]] double learning_rate() const noexcept { return learning_rate_; }
    [[nodiscard]] double entropy_coef() const noexcept { return entropy_coef_; }

    // EWMA of batch-mean rewards used by the standard update; unset until the first update.
    [[nodiscard]] std::optional<double> baseline() const noexcept { return baseline_; }
    void set_baseline(std::optional<double> b) noexcept { baseline_ = b; }

    // theta += lr * (1/normalizer) * sum_i weight_i * grad log pi(a_i) + lr * entropy_coef * grad H
    void ascend(std::span<const ScoredAction> batch, std::span<const double> weights, double normalizer);

    // d log pi(a) / d logits at one position: onehot(choice) - softmax.
    [[nodiscard]] std::vector<double> log_prob_gradient(std::size_t position, int choice) const;

    [[nodiscard]] const std::vector<std::vector<double>>& all_logits() const noexcept { return logits_; }

private:
    std::vector<std::vector<double>> logits_;
    double learning_rate_;
    double entropy_coef_;
    std::optional<double> baseline_;
};

Policy new_policy(const TreeTemplate& shape, const OperatorLibrary& library, double learning_rate,
                  double entropy_coef = 0.0);

std::vector<SampledAction> sample_batch(const Policy& policy, std::size_t count, Rng& rng);

// REINFORCE with an EWMA baseline; the first call centers on the batch mean.
void standard_update(Policy& policy, std::span<const ScoredAction> batch);

// Risk-seeking gradient: only rewards >= the empirical (1 - epsilon)-quantile contribute,
// weighted by (R - threshold) and averaged over the full batch size.
void risk_seeking_update(Policy& policy, std::span<const ScoredAction> batch, double epsilon);

} // namespace loadsr
