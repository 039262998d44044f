#include "loadsr/operators.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr {

namespace {

struct NameEntry {
    std::string_view name;
    std::string_view token;
    int kind;
};

constexpr std::array unary_names {
    NameEntry { "identity", "", static_cast<int>(UnaryKind::Identity) },
    NameEntry { "sin", "sin", static_cast<int>(UnaryKind::Sin) },
    NameEntry { "cos", "cos", static_cast<int>(UnaryKind::Cos) },
    NameEntry { "tanh", "tanh", static_cast<int>(UnaryKind::Tanh) },
    NameEntry { "sigmoid", "sigmoid", static_cast<int>(UnaryKind::Sigmoid) },
    NameEntry { "exp_clamped", "exp", static_cast<int>(UnaryKind::ExpClamped) },
    NameEntry { "log_safe", "log", static_cast<int>(UnaryKind::LogSafe) },
    NameEntry { "sqrt_safe", "sqrt", static_cast<int>(UnaryKind::SqrtSafe) },
    NameEntry { "relu", "relu", static_cast<int>(UnaryKind::Relu) },
    NameEntry { "tan", "tan", static_cast<int>(UnaryKind::Tan) },
};

constexpr std::array binary_names {
    NameEntry { "add", "+", static_cast<int>(BinaryKind::Add) },
    NameEntry { "sub", "-", static_cast<int>(BinaryKind::Sub) },
    NameEntry { "mul", "*", static_cast<int>(BinaryKind::Mul) },
    NameEntry { "div_safe", "/", static_cast<int>(BinaryKind::DivSafe) },
};

template <std::size_t N>
const NameEntry* find_by_kind(const std::array<NameEntry, N>& table, int kind)
{
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.kind == kind; });
    return it == table.end() ? nullptr : &*it;
}

template <std::size_t N>
const NameEntry* find_by_name(const std::array<NameEntry, N>& table, std::string_view name)
{
    auto it = std::find_if(table.begin(), table.end(), [&](const auto& e) { return e.name == name; });
    return it == table.end() ? nullptr : &*it;
}

double sign_nonneg(double v) noexcept { return v >= 0.0 ? 1.0 : -1.0; }

void require_finite(const OperatorDescriptor& op, double u)
{
    if (!std::isfinite(u)) {
        throw Error(ErrorKind::NumericDomain, fmt::format("non-finite input to operator '{}'", op.name));
    }
}

} // namespace

OperatorLibrary::OperatorLibrary(std::vector<OperatorDescriptor> unary, std::vector<OperatorDescriptor> binary,
                                 std::size_t variables)
    : unary_(std::move(unary)), binary_(std::move(binary)), variables_(variables)
{
    if (variables_ == 0) {
        throw Error(ErrorKind::InvalidLibrary, "operator library needs at least one input variable");
    }
    auto check = [](const std::vector<OperatorDescriptor>& ops, Arity arity, std::string_view required) {
        if (ops.empty()) {
            throw Error(ErrorKind::InvalidLibrary, "operator library has an empty arity class");
        }
        bool found = false;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            if (ops[i].id != static_cast<int>(i) || ops[i].arity != arity) {
                throw Error(ErrorKind::InvalidLibrary, fmt::format("operator '{}' has a non-dense id", ops[i].name));
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (ops[j].name == ops[i].name) {
                    throw Error(ErrorKind::InvalidLibrary, fmt::format("duplicate operator '{}'", ops[i].name));
                }
            }
            found = found || ops[i].name == required;
        }
        if (!found) {
            throw Error(ErrorKind::InvalidLibrary, fmt::format("operator library must contain '{}'", required));
        }
    };
    check(unary_, Arity::Unary, "identity");
    check(binary_, Arity::Binary, "add");
}

std::vector<std::string> OperatorLibrary::names() const
{
    std::vector<std::string> out;
    for (const auto& op : unary_) {
        out.push_back(op.name);
    }
    for (const auto& op : binary_) {
        out.push_back(op.name);
    }
    return out;
}

OperatorDescriptor make_unary(UnaryKind kind, int id, double guard_epsilon)
{
    const auto* entry = find_by_kind(unary_names, static_cast<int>(kind));
    return { id, std::string(entry->name), std::string(entry->token), Arity::Unary, entry->kind, guard_epsilon };
}

OperatorDescriptor make_binary(BinaryKind kind, int id, double guard_epsilon)
{
    const auto* entry = find_by_kind(binary_names, static_cast<int>(kind));
    return { id, std::string(entry->name), std::string(entry->token), Arity::Binary, entry->kind, guard_epsilon };
}

OperatorLibrary default_library(std::size_t variables, double guard_epsilon)
{
    if (variables == 0) {
        throw Error(ErrorKind::InvalidLibrary, "operator library needs at least one input variable");
    }
    std::vector<OperatorDescriptor> unary;
    for (auto kind : { UnaryKind::Identity, UnaryKind::Sin, UnaryKind::Cos, UnaryKind::Tanh, UnaryKind::Sigmoid,
                       UnaryKind::ExpClamped, UnaryKind::LogSafe, UnaryKind::SqrtSafe, UnaryKind::Relu }) {
        unary.push_back(make_unary(kind, static_cast<int>(unary.size()), guard_epsilon));
    }
    std::vector<OperatorDescriptor> binary;
    for (auto kind : { BinaryKind::Add, BinaryKind::Sub, BinaryKind::Mul, BinaryKind::DivSafe }) {
        binary.push_back(make_binary(kind, static_cast<int>(binary.size()), guard_epsilon));
    }
    return { std::move(unary), std::move(binary), variables };
}

OperatorLibrary full_library(std::size_t variables, double guard_epsilon)
{
    std::vector<std::string> names;
    for (const auto& e : unary_names) {
        names.emplace_back(e.name);
    }
    for (const auto& e : binary_names) {
        names.emplace_back(e.name);
    }
    return library_from_names(names, variables, guard_epsilon);
}

OperatorLibrary library_from_names(std::span<const std::string> names, std::size_t variables, double guard_epsilon)
{
    std::vector<OperatorDescriptor> unary;
    std::vector<OperatorDescriptor> binary;
    for (const auto& name : names) {
        if (const auto* u = find_by_name(unary_names, name)) {
            unary.push_back(make_unary(static_cast<UnaryKind>(u->kind), static_cast<int>(unary.size()), guard_epsilon));
        } else if (const auto* b = find_by_name(binary_names, name)) {
            binary.push_back(make_binary(static_cast<BinaryKind>(b->kind), static_cast<int>(binary.size()), guard_epsilon));
        } else {
            throw Error(ErrorKind::InvalidLibrary, fmt::format("unknown operator '{}'", name));
        }
    }
    return { std::move(unary), std::move(binary), variables };
}

namespace kernel {

double unary_value(UnaryKind kind, double u, double eps) noexcept
{
    switch (kind) {
    case UnaryKind::Identity: return u;
    case UnaryKind::Sin: return std::sin(u);
    case UnaryKind::Cos: return std::cos(u);
    case UnaryKind::Tanh: return std::tanh(u);
    case UnaryKind::Sigmoid: return 1.0 / (1.0 + std::exp(-u));
    case UnaryKind::ExpClamped: return std::exp(std::clamp(u, -exp_clamp, exp_clamp));
    case UnaryKind::LogSafe: return std::log(std::abs(u) + eps);
    case UnaryKind::SqrtSafe: return std::sqrt(std::abs(u));
    case UnaryKind::Relu: return u > 0.0 ? u : 0.0;
    case UnaryKind::Tan: return std::tan(u);
    }
    return u;
}

UnaryResult unary(UnaryKind kind, double u, double eps) noexcept
{
    switch (kind) {
    case UnaryKind::Identity: return { u, 1.0 };
    case UnaryKind::Sin: return { std::sin(u), std::cos(u) };
    case UnaryKind::Cos: return { std::cos(u), -std::sin(u) };
    case UnaryKind::Tanh: {
        double t = std::tanh(u);
        return { t, 1.0 - t * t };
    }
    case UnaryKind::Sigmoid: {
        double s = 1.0 / (1.0 + std::exp(-u));
        return { s, s * (1.0 - s) };
    }
    case UnaryKind::ExpClamped: {
        double e = std::exp(std::clamp(u, -exp_clamp, exp_clamp));
        return { e, std::abs(u) <= exp_clamp ? e : 0.0 };
    }
    case UnaryKind::LogSafe: {
        double m = std::abs(u) + eps;
        return { std::log(m), sign_nonneg(u) / m };
    }
    case UnaryKind::SqrtSafe: {
        double r = std::sqrt(std::abs(u));
        // the derivative is unbounded at 0; 0 is used there
        return { r, u == 0.0 ? 0.0 : sign_nonneg(u) / (2.0 * r) };
    }
    case UnaryKind::Relu: return { u > 0.0 ? u : 0.0, u > 0.0 ? 1.0 : 0.0 };
    case UnaryKind::Tan: {
        double t = std::tan(u);
        return { t, 1.0 + t * t };
    }
    }
    return { u, 1.0 };
}

double binary_value(BinaryKind kind, double u, double v, double eps) noexcept
{
    switch (kind) {
    case BinaryKind::Add: return u + v;
    case BinaryKind::Sub: return u - v;
    case BinaryKind::Mul: return u * v;
    case BinaryKind::DivSafe: return u / (sign_nonneg(v) * std::max(std::abs(v), eps));
    }
    return u + v;
}

BinaryResult binary(BinaryKind kind, double u, double v, double eps) noexcept
{
    switch (kind) {
    case BinaryKind::Add: return { u + v, 1.0, 1.0 };
    case BinaryKind::Sub: return { u - v, 1.0, -1.0 };
    case BinaryKind::Mul: return { u * v, v, u };
    case BinaryKind::DivSafe: {
        double den = sign_nonneg(v) * std::max(std::abs(v), eps);
        double q = u / den;
        // inside the guard band the denominator is constant
        double dv = std::abs(v) > eps ? -q / den : 0.0;
        return { q, 1.0 / den, dv };
    }
    }
    return { u + v, 1.0, 1.0 };
}

} // namespace kernel

double apply_unary(const OperatorDescriptor& op, double u)
{
    require_finite(op, u);
    return kernel::unary_value(op.unary_kind(), u, op.guard_epsilon);
}

double apply_binary(const OperatorDescriptor& op, double u, double v)
{
    require_finite(op, u);
    require_finite(op, v);
    return kernel::binary_value(op.binary_kind(), u, v, op.guard_epsilon);
}

double d_unary(const OperatorDescriptor& op, double u)
{
    require_finite(op, u);
    return kernel::unary(op.unary_kind(), u, op.guard_epsilon).deriv;
}

std::pair<double, double> d_binary(const OperatorDescriptor& op, double u, double v)
{
    require_finite(op, u);
    require_finite(op, v);
    auto r = kernel::binary(op.binary_kind(), u, v, op.guard_epsilon);
    return { r.du, r.dv };
}

} // namespace loadsr
