#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>

#include "loadsr/expr_tree.hpp"

// Recursive tree-walk interpreter. It re-derives the layer layout and the in-order
// numbering from the depth alone and evaluates operators by name.
namespace oracle {

inline double naive_unary(const std::string& name, double u, double eps)
{
    if (name == "identity") return u;
    if (name == "sin") return std::sin(u);
    if (name == "cos") return std::cos(u);
    if (name == "tan") return std::tan(u);
    if (name == "tanh") return std::tanh(u);
    if (name == "sigmoid") return 1.0 / (1.0 + std::exp(-u));
    if (name == "exp_clamped") return std::exp(u > 20.0 ? 20.0 : (u < -20.0 ? -20.0 : u));
    if (name == "log_safe") return std::log(std::fabs(u) + eps);
    if (name == "sqrt_safe") return std::sqrt(std::fabs(u));
    if (name == "relu") return u > 0.0 ? u : 0.0;
    throw std::invalid_argument("oracle: unknown unary " + name);
}

inline double naive_binary(const std::string& name, double u, double v, double eps)
{
    if (name == "add") return u + v;
    if (name == "sub") return u - v;
    if (name == "mul") return u * v;
    if (name == "div_safe") {
        double mag = std::fabs(v) < eps ? eps : std::fabs(v);
        return v < 0.0 ? -u / mag : u / mag;
    }
    throw std::invalid_argument("oracle: unknown binary " + name);
}

namespace detail {

struct Walker {
    const loadsr::ExpressionTree& tree;
    std::span<const double> x;
    std::span<const double> w;
    std::size_t depth;
    std::size_t pos = 0;
    std::size_t param = 0;
    double margin = INFINITY;

    // distance of an operator input to the nearest kink, pole or guard switch
    void note_unary(const std::string& name, double u)
    {
        if (name == "relu" || name == "log_safe" || name == "sqrt_safe") margin = std::min(margin, std::fabs(u));
        if (name == "exp_clamped") margin = std::min(margin, 20.0 - std::fabs(u));
        if (name == "tan") margin = std::min(margin, std::fabs(std::cos(u)));
    }

    double walk(std::size_t layer)
    {
        const auto& lib = tree.library();
        const auto& a = tree.assignment();
        double eps = tree.guard_epsilon();
        if (layer > depth) {
            return x[static_cast<std::size_t>(a[pos++])];
        }
        if (layer % 2 == 1) {
            const auto& name = lib.unary(static_cast<std::size_t>(a[pos++])).name;
            std::size_t p = param;
            param += 3;
            double u = walk(layer + 1);
            note_unary(name, w[p + 1] * u);
            return w[p] * naive_unary(name, w[p + 1] * u, eps) + w[p + 2];
        }
        double l = walk(layer + 1);
        const auto& name = lib.binary(static_cast<std::size_t>(a[pos++])).name;
        std::size_t p = param;
        param += 4;
        double r = walk(layer + 1);
        if (name == "div_safe") margin = std::min(margin, std::fabs(w[p + 2] * r));
        return w[p] * naive_binary(name, w[p + 1] * l, w[p + 2] * r, eps) + w[p + 3];
    }
};

} // namespace detail

inline double naive_eval(const loadsr::ExpressionTree& tree, std::span<const double> x)
{
    detail::Walker walker { tree, x, tree.coefficients(), tree.shape().depth() };
    return walker.walk(1);
}

// Smallest distance, over all nodes, between an operator input and a point where the
// operator is non-smooth or guarded.
inline double smoothness_margin(const loadsr::ExpressionTree& tree, std::span<const double> x)
{
    detail::Walker walker { tree, x, tree.coefficients(), tree.shape().depth() };
    walker.walk(1);
    return walker.margin;
}

// Operator/leaf counts by direct enumeration of the layer rule.
struct Counts {
    std::size_t unary = 0;
    std::size_t binary = 0;
    std::size_t leaves = 0;
};

inline Counts enumerate_counts(std::size_t depth)
{
    Counts c;
    std::size_t width = 1;
    for (std::size_t layer = 1; layer <= depth; ++layer) {
        if (layer % 2 == 1) {
            c.unary += width;
        } else {
            c.binary += width;
            width *= 2;
        }
    }
    c.leaves = width;
    return c;
}

} // namespace oracle
