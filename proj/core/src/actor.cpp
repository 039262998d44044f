#include "loadsr/actor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "loadsr/error.hpp"
#include "loadsr/reward_pool.hpp"

namespace loadsr {

namespace {

std::vector<double> softmax(std::span<const double> z)
{
    std::vector<double> p(z.size());
    double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - m);
        sum += p[k];
    }
    for (auto& v : p) {
        v /= sum;
    }
    return p;
}

double log_softmax_at(std::span<const double> z, std::size_t k)
{
    double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (double v : z) {
        sum += std::exp(v - m);
    }
    return z[k] - m - std::log(sum);
}

} // namespace

Policy::Policy(std::vector<std::size_t> choice_counts, double learning_rate, double entropy_coef)
    : learning_rate_(learning_rate), entropy_coef_(entropy_coef)
{
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("policy learning rate must be positive, got {}", learning_rate));
    }
    if (!(entropy_coef >= 0.0)) {
        throw Error(ErrorKind::InvalidConfig, "entropy coefficient must be non-negative");
    }
    logits_.reserve(choice_counts.size());
    for (auto k : choice_counts) {
        if (k == 0) {
            throw Error(ErrorKind::InvalidConfig, "every policy position needs at least one choice");
        }
        logits_.emplace_back(k, 0.0);
    }
}

void Policy::set_logits(std::size_t position, std::span<const double> values)
{
    auto& z = logits_.at(position);
    if (values.size() != z.size()) {
        throw Error(ErrorKind::InvalidArgument, "logit vector has the wrong size");
    }
    z.assign(values.begin(), values.end());
}

std::vector<double> Policy::probabilities(std::size_t position) const { return softmax(logits_.at(position)); }

double Policy::log_prob(const OperatorAssignment& action) const
{
    if (action.size() != logits_.size()) {
        throw Error(ErrorKind::InvalidAction, "action length does not match the policy");
    }
    double lp = 0.0;
    for (std::size_t i = 0; i < action.size(); ++i) {
        const auto& z = logits_[i];
        if (action[i] < 0 || static_cast<std::size_t>(action[i]) >= z.size()) {
            throw Error(ErrorKind::InvalidAction, fmt::format("choice {} out of range at position {}", action[i], i));
        }
        lp += log_softmax_at(z, static_cast<std::size_t>(action[i]));
    }
    return lp;
}

double Policy::entropy() const
{
    double h = 0.0;
    for (const auto& z : logits_) {
        for (double p : softmax(z)) {
            if (p > 0.0) {
                h -= p * std::log(p);
            }
        }
    }
    return h;
}

std::vector<double> Policy::log_prob_gradient(std::size_t position, int choice) const
{
    auto g = softmax(logits_.at(position));
    for (auto& v : g) {
        v = -v;
    }
    g.at(static_cast<std::size_t>(choice)) += 1.0;
    return g;
}

void Policy::ascend(std::span<const ScoredAction> batch, std::span<const double> weights, double normalizer)
{
    const double scale = learning_rate_ / normalizer;
    for (std::size_t pos = 0; pos < logits_.size(); ++pos) {
        auto& z = logits_[pos];
        const auto p = softmax(z);
        std::vector<double> step(z.size(), 0.0);
        for (std::size_t i = 0; i < batch.size(); ++i) {
            const double wi = weights[i];
            if (wi == 0.0) {
                continue;
            }
            const auto choice = static_cast<std::size_t>(batch[i].action[pos]);
            for (std::size_t k = 0; k < z.size(); ++k) {
                step[k] -= wi * p[k];
            }
            step[choice] += wi;
        }
        if (entropy_coef_ > 0.0) {
            // dH/dz_k = -p_k (log p_k + H)
            double h = 0.0;
            for (double pk : p) {
                h -= pk > 0.0 ? pk * std::log(pk) : 0.0;
            }
            for (std::size_t k = 0; k < z.size(); ++k) {
                double dh = p[k] > 0.0 ? -p[k] * (std::log(p[k]) + h) : 0.0;
                z[k] += learning_rate_ * entropy_coef_ * dh;
            }
        }
        for (std::size_t k = 0; k < z.size(); ++k) {
            z[k] += scale * step[k];
        }
    }
}

Policy new_policy(const TreeTemplate& shape, const OperatorLibrary& library, double learning_rate, double entropy_coef)
{
    if (shape.variables() != library.variables()) {
        throw Error(ErrorKind::InvalidConfig, "template and library disagree on the variable count");
    }
    return { shape.choice_counts(library), learning_rate, entropy_coef };
}

std::vector<SampledAction> sample_batch(const Policy& policy, std::size_t count, Rng& rng)
{
    std::vector<std::vector<double>> probs;
    probs.reserve(policy.positions());
    for (std::size_t pos = 0; pos < policy.positions(); ++pos) {
        probs.push_back(policy.probabilities(pos));
    }
    std::vector<SampledAction> out(count);
    for (auto& s : out) {
        s.action.resize(policy.positions());
        for (std::size_t pos = 0; pos < probs.size(); ++pos) {
            const auto& p = probs[pos];
            double u = uniform(rng, 0.0, 1.0);
            std::size_t k = 0;
            double cum = p[0];
            while (u >= cum && k + 1 < p.size()) {
                ++k;
                cum += p[k];
            }
            s.action[pos] = static_cast<int>(k);
        }
        s.log_prob = policy.log_prob(s.action);
    }
    return out;
}

void standard_update(Policy& policy, std::span<const ScoredAction> batch)
{
    if (batch.empty()) {
        throw Error(ErrorKind::InvalidArgument, "policy update needs a nonempty batch");
    }
    double mean = 0.0;
    for (const auto& s : batch) {
        if (!std::isfinite(s.reward)) {
            throw Error(ErrorKind::InvalidArgument, "policy update received a non-finite reward");
        }
        mean += s.reward;
    }
    mean /= static_cast<double>(batch.size());

    const double b = policy.baseline().value_or(mean);
    std::vector<double> weights(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        weights[i] = batch[i].reward - b;
    }
    policy.ascend(batch, weights, static_cast<double>(batch.size()));
    policy.set_baseline(policy.baseline() ? Policy::baseline_decay * b + (1.0 - Policy::baseline_decay) * mean : mean);
}

void risk_seeking_update(Policy& policy, std::span<const ScoredAction> batch, double epsilon)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("epsilon must lie in (0, 1], got {}", epsilon));
    }
    if (batch.empty()) {
        throw Error(ErrorKind::InvalidArgument, "policy update needs a nonempty batch");
    }
    std::vector<double> rewards(batch.size());
    std::transform(batch.begin(), batch.end(), rewards.begin(), [](const ScoredAction& s) { return s.reward; });
    const double threshold = empirical_quantile(rewards, epsilon);

    std::vector<double> weights(batch.size(), 0.0);
    for (std::size_t i = 0; i < batch.size(); ++i) {
        if (rewards[i] >= threshold) {
            weights[i] = rewards[i] - threshold;
        }
    }
    policy.ascend(batch, weights, static_cast<double>(batch.size()));
}

} // namespace loadsr
