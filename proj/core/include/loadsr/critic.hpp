#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "loadsr/expr_tree.hpp"

namespace loadsr {

inline constexpr double default_gradient_clip = 10.0;

struct TrainOptions {
    double learning_rate = 0.1;
    std::size_t iterations = 100;
    double gradient_clip = default_gradient_clip; // <= 0 disables clipping
    // Early stop once the relative improvement stays below tolerance for `patience` consecutive steps.
    std::size_t patience = 0;                     // 0 disables early stopping
    double tolerance = 1e-9;
    bool record_trace = false;
};

struct TrainReport {
    double final_mse = 0.0;     // best-seen; +inf when the tree is degenerate at initialization
    double initial_mse = 0.0;
    std::size_t iterations = 0; // gradient steps taken
    bool diverged = false;
    std::vector<double> loss_trace;
};

// Plain gradient descent on the MSE with gradient-norm clipping. The tree ends at its best-seen
// coefficients; a non-finite loss or gradient stops training and marks the report diverged.
TrainReport train_critic(ExpressionTree& tree, const Matrix& X, std::span<const double> y, const TrainOptions& options,
                         EvalWorkspace& ws);

TrainReport train_critic(ExpressionTree& tree, const Matrix& X, std::span<const double> y, double learning_rate,
                         std::size_t iterations);

inline constexpr double fine_tune_rate_divisor = 10.0;
inline constexpr std::size_t fine_tune_patience = 25;

// Continues from the tree's current coefficients with a smaller rate and early stopping.
TrainReport fine_tune(ExpressionTree& tree, const Matrix& X, std::span<const double> y, double learning_rate,
                      std::size_t iterations, EvalWorkspace& ws);

TrainReport fine_tune(ExpressionTree& tree, const Matrix& X, std::span<const double> y, double learning_rate,
                      std::size_t iterations);

} // namespace loadsr
