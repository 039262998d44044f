#include "loadsr/critic.hpp"

#include <cmath>
#include <limits>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr {

TrainReport train_critic(ExpressionTree& tree, const Matrix& X, std::span<const double> y, const TrainOptions& options,
                         EvalWorkspace& ws)
{
    if (!(options.learning_rate > 0.0)) {
        throw Error(ErrorKind::InvalidConfig, fmt::format("critic learning rate must be positive, got {}", options.learning_rate));
    }
    if (options.iterations == 0) {
        throw Error(ErrorKind::InvalidConfig, "critic iterations must be at least 1");
    }

    TrainReport report;
    const auto count = tree.coefficients().size();
    std::vector<double> w(tree.coefficients().begin(), tree.coefficients().end());
    std::vector<double> best = w;
    std::vector<double> grad(count);

    auto loss = loss_and_gradients(tree, X, y, grad, ws);
    if (!loss) {
        report.diverged = true;
        report.final_mse = std::numeric_limits<double>::infinity();
        report.initial_mse = report.final_mse;
        return report;
    }
    report.initial_mse = *loss;
    double best_loss = *loss;
    double previous = *loss;
    std::size_t flat_steps = 0;
    if (options.record_trace) {
        report.loss_trace.push_back(*loss);
    }

    for (std::size_t step = 0; step < options.iterations; ++step) {
        double scale = options.learning_rate;
        if (options.gradient_clip > 0.0) {
            double norm = 0.0;
            for (double g : grad) {
                norm += g * g;
            }
            norm = std::sqrt(norm);
            if (norm > options.gradient_clip) {
                scale *= options.gradient_clip / norm;
            }
        }
        for (std::size_t j = 0; j < count; ++j) {
            w[j] -= scale * grad[j];
        }
        tree.set_coefficients(w);
        ++report.iterations;

        loss = loss_and_gradients(tree, X, y, grad, ws);
        if (!loss) {
            report.diverged = true;
            break;
        }
        if (options.record_trace) {
            report.loss_trace.push_back(*loss);
        }
        if (*loss < best_loss) {
            best_loss = *loss;
            best = w;
        }
        if (options.patience > 0) {
            double improvement = previous > 0.0 ? (previous - *loss) / previous : 0.0;
            flat_steps = improvement < options.tolerance ? flat_steps + 1 : 0;
            if (flat_steps >= options.patience) {
                break;
            }
        }
        previous = *loss;
    }

    tree.set_coefficients(best);
    report.final_mse = best_loss;
    return report;
}

TrainReport train_critic(ExpressionTree& tree, const Matrix& X, std::span<const double> y, double learning_rate,
                         std::size_t iterations)
{
    EvalWorkspace ws;
    TrainOptions options;
    options.learning_rate = learning_rate;
    options.iterations = iterations;
    return train_critic(tree, X, y, options, ws);
}

TrainReport fine_tune(ExpressionTree& tree, const Matrix& X, std::span<const double> y, double learning_rate,
                      std::size_t iterations, EvalWorkspace& ws)
{
    TrainOptions options;
    options.learning_rate = learning_rate;
    options.iterations = iterations;
    options.patience = fine_tune_patience;
    return train_critic(tree, X, y, options, ws);
}

TrainReport fine_tune(ExpressionTree& tree, const Matrix& X, std::span<const double> y, double learning_rate,
                      std::size_t iterations)
{
    EvalWorkspace ws;
    return fine_tune(tree, X, y, learning_rate, iterations, ws);
}

} // namespace loadsr
