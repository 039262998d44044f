#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace loadsr {

inline constexpr double default_guard_epsilon = 1e-6;
inline constexpr double exp_clamp = 20.0;

enum class Arity { Unary, Binary };

enum class UnaryKind { Identity, Sin, Cos, Tanh, Sigmoid, ExpClamped, LogSafe, SqrtSafe, Relu, Tan };
enum class BinaryKind { Add, Sub, Mul, DivSafe };

struct OperatorDescriptor {
    int id = 0;           // dense within its arity class
    std::string name;     // library / manifest name, e.g. "exp_clamped"
    std::string token;    // rendered token, e.g. "exp"; identity renders as ""
    Arity arity = Arity::Unary;
    int kind = 0;         // UnaryKind or BinaryKind, by arity
    double guard_epsilon = default_guard_epsilon;

    [[nodiscard]] UnaryKind unary_kind() const noexcept { return static_cast<UnaryKind>(kind); }
    [[nodiscard]] BinaryKind binary_kind() const noexcept { return static_cast<BinaryKind>(kind); }
};

// Immutable set of operators the actor chooses from, plus the number of input signals.
class OperatorLibrary {
public:
    OperatorLibrary(std::vector<OperatorDescriptor> unary, std::vector<OperatorDescriptor> binary, std::size_t variables);

    [[nodiscard]] std::span<const OperatorDescriptor> unary() const noexcept { return unary_; }
    [[nodiscard]] std::span<const OperatorDescriptor> binary() const noexcept { return binary_; }
    [[nodiscard]] std::size_t variables() const noexcept { return variables_; }

    [[nodiscard]] const OperatorDescriptor& unary(std::size_t id) const { return unary_.at(id); }
    [[nodiscard]] const OperatorDescriptor& binary(std::size_t id) const { return binary_.at(id); }

    // Ordered names: unary first, then binary.
    [[nodiscard]] std::vector<std::string> names() const;

private:
    std::vector<OperatorDescriptor> unary_;
    std::vector<OperatorDescriptor> binary_;
    std::size_t variables_;
};

OperatorDescriptor make_unary(UnaryKind kind, int id, double guard_epsilon = default_guard_epsilon);
OperatorDescriptor make_binary(BinaryKind kind, int id, double guard_epsilon = default_guard_epsilon);

// identity, sin, cos, tanh, sigmoid, exp_clamped, log_safe, sqrt_safe, relu | add, sub, mul, div_safe
OperatorLibrary default_library(std::size_t variables, double guard_epsilon = default_guard_epsilon);

// Every known operator, including the opt-in `tan`; used to parse rendered expressions.
OperatorLibrary full_library(std::size_t variables, double guard_epsilon = default_guard_epsilon);

// Builds a library from operator names (any order within arity; ids follow the given order).
// Unknown names and missing identity/add are rejected.
OperatorLibrary library_from_names(std::span<const std::string> names, std::size_t variables,
                                   double guard_epsilon = default_guard_epsilon);

// Checked entry points: throw NumericDomain on non-finite input.
double apply_unary(const OperatorDescriptor& op, double u);
double apply_binary(const OperatorDescriptor& op, double u, double v);
double d_unary(const OperatorDescriptor& op, double u);
std::pair<double, double> d_binary(const OperatorDescriptor& op, double u, double v);

// Unchecked kernels used by tree evaluation. The value and derivative are produced together.
namespace kernel {

struct UnaryResult {
    double value;
    double deriv;
};

struct BinaryResult {
    double value;
    double du;
    double dv;
};

UnaryResult unary(UnaryKind kind, double u, double eps) noexcept;
BinaryResult binary(BinaryKind kind, double u, double v, double eps) noexcept;
double unary_value(UnaryKind kind, double u, double eps) noexcept;
double binary_value(BinaryKind kind, double u, double v, double eps) noexcept;

} // namespace kernel

} // namespace loadsr
