#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loadsr/matrix.hpp"
#include "loadsr/operators.hpp"

namespace loadsr {

enum class NodeKind { Unary, Binary, Leaf };

struct TemplateNode {
    NodeKind kind = NodeKind::Leaf;
    int parent = -1;
    int left = -1;  // the only child of a unary node
    int right = -1;
    int layer = 0;  // 1-based operator layer; leaves sit at depth + 1
    int param_offset = -1;
};

inline constexpr std::size_t unary_param_count = 3;  // a*g(b*u) + c
inline constexpr std::size_t binary_param_count = 4; // a*((b*l) o (c*r)) + d

// Fixed tree shape for a given depth. Layers alternate unary/binary starting with a unary root;
// the layer below the last operator layer holds leaves. Nodes are stored in in-order sequence,
// where a unary node precedes its child.
class TreeTemplate {
public:
    static TreeTemplate build(std::size_t depth, std::size_t variables);

    [[nodiscard]] std::size_t depth() const noexcept { return depth_; }
    [[nodiscard]] std::size_t variables() const noexcept { return variables_; }
    [[nodiscard]] std::span<const TemplateNode> nodes() const noexcept { return nodes_; }
    [[nodiscard]] const TemplateNode& node(std::size_t i) const { return nodes_.at(i); }
    [[nodiscard]] std::size_t size() const noexcept { return nodes_.size(); }
    [[nodiscard]] int root() const noexcept { return root_; }

    // Children before parents.
    [[nodiscard]] std::span<const int> postorder() const noexcept { return postorder_; }

    [[nodiscard]] std::size_t unary_count() const noexcept { return n_unary_; }
    [[nodiscard]] std::size_t binary_count() const noexcept { return n_binary_; }
    [[nodiscard]] std::size_t leaf_count() const noexcept { return n_leaf_; }
    [[nodiscard]] std::size_t operator_count() const noexcept { return n_unary_ + n_binary_; }
    [[nodiscard]] std::size_t parameter_count() const noexcept
    {
        return unary_param_count * n_unary_ + binary_param_count * n_binary_;
    }

    // Number of admissible choices at each in-order position for the given library.
    [[nodiscard]] std::vector<std::size_t> choice_counts(const OperatorLibrary& library) const;

private:
    int build_subtree(int layer, int parent);

    std::size_t depth_ = 0;
    std::size_t variables_ = 0;
    std::vector<TemplateNode> nodes_;
    std::vector<int> postorder_;
    int root_ = -1;
    std::size_t n_unary_ = 0;
    std::size_t n_binary_ = 0;
    std::size_t n_leaf_ = 0;
};

// One choice per in-order position: unary id, binary id, or variable index.
using OperatorAssignment = std::vector<int>;

// The trainable critic: template + bound operators + coefficient vector.
class ExpressionTree {
public:
    ExpressionTree(std::shared_ptr<const TreeTemplate> shape, std::shared_ptr<const OperatorLibrary> library,
                   OperatorAssignment assignment);

    [[nodiscard]] const TreeTemplate& shape() const noexcept { return *shape_; }
    [[nodiscard]] const std::shared_ptr<const TreeTemplate>& shape_ptr() const noexcept { return shape_; }
    [[nodiscard]] const OperatorLibrary& library() const noexcept { return *library_; }
    [[nodiscard]] const std::shared_ptr<const OperatorLibrary>& library_ptr() const noexcept { return library_; }
    [[nodiscard]] const OperatorAssignment& assignment() const noexcept { return assignment_; }

    [[nodiscard]] bool initialized() const noexcept { return initialized_; }
    [[nodiscard]] std::span<const double> coefficients() const noexcept { return coefficients_; }
    void set_coefficients(std::span<const double> w);

    // Resolved operator kind (UnaryKind/BinaryKind) or variable index, per in-order position.
    [[nodiscard]] int resolved(std::size_t position) const noexcept { return resolved_[position]; }
    [[nodiscard]] double guard_epsilon() const noexcept { return guard_epsilon_; }

private:
    std::shared_ptr<const TreeTemplate> shape_;
    std::shared_ptr<const OperatorLibrary> library_;
    OperatorAssignment assignment_;
    std::vector<int> resolved_;
    std::vector<double> coefficients_;
    double guard_epsilon_ = default_guard_epsilon;
    bool initialized_ = false;
};

// Binds operators; the result needs init_params (or set_coefficients) before evaluation.
ExpressionTree assign_operators(std::shared_ptr<const TreeTemplate> shape,
                                std::shared_ptr<const OperatorLibrary> library, OperatorAssignment action);

// Multiplicative coefficients ~ U[0.9, 1.1], additive biases ~ U[-0.1, 0.1].
void init_params(ExpressionTree& tree, std::uint64_t seed);

struct Prediction {
    std::vector<double> yhat;
    std::vector<double> node_values; // node-major: node_values[k * n + i]
    bool degenerate = false;
};

// Scratch buffers reused across evaluations of same-shaped trees.
struct EvalWorkspace {
    std::vector<double> value;
    std::vector<double> raw;   // operator output before the outer scale and bias
    std::vector<double> d1;
    std::vector<double> d2;
    std::vector<double> adjoint;
};

Prediction evaluate(const ExpressionTree& tree, const Matrix& X);

// Returns nullopt when the tree is degenerate on X (non-finite intermediate).
std::optional<double> mean_squared_error(const ExpressionTree& tree, const Matrix& X, std::span<const double> y,
                                         EvalWorkspace& ws);

// Writes d(mse)/dw into grad (sized to the coefficient count). nullopt on degenerate evaluation
// or non-finite gradient.
std::optional<double> loss_and_gradients(const ExpressionTree& tree, const Matrix& X, std::span<const double> y,
                                         std::span<double> grad, EvalWorkspace& ws);

struct LossGradient {
    double mse = 0.0;
    std::vector<double> gradient;
};

std::optional<LossGradient> loss_and_gradients(const ExpressionTree& tree, const Matrix& X,
                                               std::span<const double> y);

// Significant digits for coefficients; round_trip_digits prints the shortest exact representation.
inline constexpr int display_digits = 6;
inline constexpr int round_trip_digits = 0;

std::string render(const ExpressionTree& tree, int significant_digits = display_digits);

} // namespace loadsr
