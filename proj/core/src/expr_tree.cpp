#include "loadsr/expr_tree.hpp"

#include <cmath>

#include <fmt/core.h>

#include "loadsr/error.hpp"
#include "loadsr/random.hpp"

namespace loadsr {

// ---------------------------------------------------------------------------
// TreeTemplate

TreeTemplate TreeTemplate::build(std::size_t depth, std::size_t variables)
{
    if (depth == 0) {
        throw Error(ErrorKind::InvalidDepth, "tree depth must be at least 1");
    }
    if (variables == 0) {
        throw Error(ErrorKind::InvalidLibrary, "tree needs at least one input variable");
    }
    TreeTemplate t;
    t.depth_ = depth;
    t.variables_ = variables;
    t.root_ = t.build_subtree(1, -1);

    int offset = 0;
    for (auto& node : t.nodes_) {
        switch (node.kind) {
        case NodeKind::Unary:
            node.param_offset = offset;
            offset += static_cast<int>(unary_param_count);
            ++t.n_unary_;
            break;
        case NodeKind::Binary:
            node.param_offset = offset;
            offset += static_cast<int>(binary_param_count);
            ++t.n_binary_;
            break;
        case NodeKind::Leaf:
            ++t.n_leaf_;
            break;
        }
    }

    // iterative post-order
    std::vector<std::pair<int, bool>> stack { { t.root_, false } };
    while (!stack.empty()) {
        auto [k, expanded] = stack.back();
        stack.pop_back();
        if (expanded) {
            t.postorder_.push_back(k);
            continue;
        }
        stack.emplace_back(k, true);
        const auto& n = t.nodes_[static_cast<std::size_t>(k)];
        if (n.right >= 0) {
            stack.emplace_back(n.right, false);
        }
        if (n.left >= 0) {
            stack.emplace_back(n.left, false);
        }
    }
    return t;
}

int TreeTemplate::build_subtree(int layer, int parent)
{
    if (static_cast<std::size_t>(layer) > depth_) {
        nodes_.push_back({ NodeKind::Leaf, parent, -1, -1, layer, -1 });
        return static_cast<int>(nodes_.size()) - 1;
    }
    if (layer % 2 == 1) {
        nodes_.push_back({ NodeKind::Unary, parent, -1, -1, layer, -1 });
        int self = static_cast<int>(nodes_.size()) - 1;
        int child = build_subtree(layer + 1, self);
        nodes_[static_cast<std::size_t>(self)].left = child;
        return self;
    }
    int left = build_subtree(layer + 1, -1);
    nodes_.push_back({ NodeKind::Binary, parent, left, -1, layer, -1 });
    int self = static_cast<int>(nodes_.size()) - 1;
    nodes_[static_cast<std::size_t>(left)].parent = self;
    int right = build_subtree(layer + 1, self);
    nodes_[static_cast<std::size_t>(self)].right = right;
    return self;
}

std::vector<std::size_t> TreeTemplate::choice_counts(const OperatorLibrary& library) const
{
    std::vector<std::size_t> counts;
    counts.reserve(nodes_.size());
    for (const auto& n : nodes_) {
        switch (n.kind) {
        case NodeKind::Unary: counts.push_back(library.unary().size()); break;
        case NodeKind::Binary: counts.push_back(library.binary().size()); break;
        case NodeKind::Leaf: counts.push_back(library.variables()); break;
        }
    }
    return counts;
}

// ---------------------------------------------------------------------------
// ExpressionTree

ExpressionTree::ExpressionTree(std::shared_ptr<const TreeTemplate> shape, std::shared_ptr<const OperatorLibrary> library,
                               OperatorAssignment assignment)
    : shape_(std::move(shape)), library_(std::move(library)), assignment_(std::move(assignment))
{
    if (!shape_ || !library_) {
        throw Error(ErrorKind::InvalidArgument, "expression tree needs a template and a library");
    }
    if (shape_->variables() != library_->variables()) {
        throw Error(ErrorKind::InvalidAction, "template and library disagree on the variable count");
    }
    if (assignment_.size() != shape_->size()) {
        throw Error(ErrorKind::InvalidAction,
                    fmt::format("action has {} choices, template has {} positions", assignment_.size(), shape_->size()));
    }
    auto counts = shape_->choice_counts(*library_);
    resolved_.resize(assignment_.size());
    for (std::size_t i = 0; i < assignment_.size(); ++i) {
        int choice = assignment_[i];
        if (choice < 0 || static_cast<std::size_t>(choice) >= counts[i]) {
            throw Error(ErrorKind::InvalidAction,
                        fmt::format("choice {} at position {} is outside [0, {})", choice, i, counts[i]));
        }
        switch (shape_->node(i).kind) {
        case NodeKind::Unary: resolved_[i] = library_->unary(static_cast<std::size_t>(choice)).kind; break;
        case NodeKind::Binary: resolved_[i] = library_->binary(static_cast<std::size_t>(choice)).kind; break;
        case NodeKind::Leaf: resolved_[i] = choice; break;
        }
    }
    guard_epsilon_ = library_->unary(0).guard_epsilon;
    coefficients_.assign(shape_->parameter_count(), 0.0);
}

void ExpressionTree::set_coefficients(std::span<const double> w)
{
    if (w.size() != coefficients_.size()) {
        throw Error(ErrorKind::InvalidArgument,
                    fmt::format("expected {} coefficients, got {}", coefficients_.size(), w.size()));
    }
    coefficients_.assign(w.begin(), w.end());
    initialized_ = true;
}

ExpressionTree assign_operators(std::shared_ptr<const TreeTemplate> shape, std::shared_ptr<const OperatorLibrary> library,
                                OperatorAssignment action)
{
    return { std::move(shape), std::move(library), std::move(action) };
}

void init_params(ExpressionTree& tree, std::uint64_t seed)
{
    Rng rng(seed);
    std::vector<double> w(tree.shape().parameter_count());
    for (const auto& node : tree.shape().nodes()) {
        if (node.kind == NodeKind::Leaf) {
            continue;
        }
        auto* p = w.data() + node.param_offset;
        std::size_t count = node.kind == NodeKind::Unary ? unary_param_count : binary_param_count;
        for (std::size_t j = 0; j + 1 < count; ++j) {
            p[j] = uniform(rng, 0.9, 1.1);
        }
        p[count - 1] = uniform(rng, -0.1, 0.1);
    }
    tree.set_coefficients(w);
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

void require_ready(const ExpressionTree& tree, const Matrix& X)
{
    if (!tree.initialized()) {
        throw Error(ErrorKind::InvalidArgument, "expression tree coefficients are not initialized");
    }
    if (X.cols() != tree.shape().variables()) {
        throw Error(ErrorKind::InvalidInput,
                    fmt::format("data has {} columns, tree expects {}", X.cols(), tree.shape().variables()));
    }
}

// Forward sweep. With derivatives, raw/d1/d2 are filled for the backward sweep.
bool forward(const ExpressionTree& tree, const Matrix& X, EvalWorkspace& ws, bool with_derivatives)
{
    const auto& shape = tree.shape();
    const std::size_t n = X.rows();
    const std::size_t m = shape.size();
    const double eps = tree.guard_epsilon();
    const auto w = tree.coefficients();

    ws.value.resize(m * n);
    if (with_derivatives) {
        ws.raw.resize(m * n);
        ws.d1.resize(m * n);
        ws.d2.resize(m * n);
    }

    for (int k : shape.postorder()) {
        const auto& node = shape.node(static_cast<std::size_t>(k));
        const std::size_t base = static_cast<std::size_t>(k) * n;
        double* out = ws.value.data() + base;
        bool finite = true;

        switch (node.kind) {
        case NodeKind::Leaf: {
            auto var = static_cast<std::size_t>(tree.resolved(static_cast<std::size_t>(k)));
            for (std::size_t i = 0; i < n; ++i) {
                out[i] = X(i, var);
            }
            break;
        }
        case NodeKind::Unary: {
            auto kind = static_cast<UnaryKind>(tree.resolved(static_cast<std::size_t>(k)));
            const double* p = w.data() + node.param_offset;
            const double a = p[0], b = p[1], c = p[2];
            const double* u = ws.value.data() + static_cast<std::size_t>(node.left) * n;
            if (with_derivatives) {
                double* raw = ws.raw.data() + base;
                double* d1 = ws.d1.data() + base;
                for (std::size_t i = 0; i < n; ++i) {
                    auto r = kernel::unary(kind, b * u[i], eps);
                    raw[i] = r.value;
                    d1[i] = r.deriv;
                    out[i] = a * r.value + c;
                    finite = finite && std::isfinite(out[i]);
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    out[i] = a * kernel::unary_value(kind, b * u[i], eps) + c;
                    finite = finite && std::isfinite(out[i]);
                }
            }
            break;
        }
        case NodeKind::Binary: {
            auto kind = static_cast<BinaryKind>(tree.resolved(static_cast<std::size_t>(k)));
            const double* p = w.data() + node.param_offset;
            const double a = p[0], b = p[1], c = p[2], d = p[3];
            const double* l = ws.value.data() + static_cast<std::size_t>(node.left) * n;
            const double* r = ws.value.data() + static_cast<std::size_t>(node.right) * n;
            if (with_derivatives) {
                double* raw = ws.raw.data() + base;
                double* d1 = ws.d1.data() + base;
                double* d2 = ws.d2.data() + base;
                for (std::size_t i = 0; i < n; ++i) {
                    auto res = kernel::binary(kind, b * l[i], c * r[i], eps);
                    raw[i] = res.value;
                    d1[i] = res.du;
                    d2[i] = res.dv;
                    out[i] = a * res.value + d;
                    finite = finite && std::isfinite(out[i]);
                }
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    out[i] = a * kernel::binary_value(kind, b * l[i], c * r[i], eps) + d;
                    finite = finite && std::isfinite(out[i]);
                }
            }
            break;
        }
        }
        if (!finite) {
            return false;
        }
    }
    return true;
}

} // namespace

Prediction evaluate(const ExpressionTree& tree, const Matrix& X)
{
    require_ready(tree, X);
    EvalWorkspace ws;
    Prediction out;
    out.degenerate = !forward(tree, X, ws, false);
    if (!out.degenerate) {
        const std::size_t n = X.rows();
        auto root = static_cast<std::size_t>(tree.shape().root());
        out.yhat.assign(ws.value.begin() + static_cast<std::ptrdiff_t>(root * n),
                        ws.value.begin() + static_cast<std::ptrdiff_t>((root + 1) * n));
        out.node_values = std::move(ws.value);
    }
    return out;
}

std::optional<double> mean_squared_error(const ExpressionTree& tree, const Matrix& X, std::span<const double> y,
                                         EvalWorkspace& ws)
{
    require_ready(tree, X);
    if (y.size() != X.rows()) {
        throw Error(ErrorKind::InvalidInput, "target length does not match sample count");
    }
    if (!forward(tree, X, ws, false)) {
        return std::nullopt;
    }
    const std::size_t n = X.rows();
    const double* yhat = ws.value.data() + static_cast<std::size_t>(tree.shape().root()) * n;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double e = yhat[i] - y[i];
        sum += e * e;
    }
    double mse = sum / static_cast<double>(n);
    if (!std::isfinite(mse)) {
        return std::nullopt;
    }
    return mse;
}

std::optional<double> loss_and_gradients(const ExpressionTree& tree, const Matrix& X, std::span<const double> y,
                                         std::span<double> grad, EvalWorkspace& ws)
{
    require_ready(tree, X);
    if (y.size() != X.rows()) {
        throw Error(ErrorKind::InvalidInput, "target length does not match sample count");
    }
    if (grad.size() != tree.coefficients().size()) {
        throw Error(ErrorKind::InvalidArgument, "gradient buffer has the wrong size");
    }
    if (!forward(tree, X, ws, true)) {
        return std::nullopt;
    }

    const auto& shape = tree.shape();
    const std::size_t n = X.rows();
    const auto w = tree.coefficients();
    const auto root = static_cast<std::size_t>(shape.root());
    const double inv_n = 1.0 / static_cast<double>(n);

    ws.adjoint.assign(shape.size() * n, 0.0);
    double sum = 0.0;
    {
        const double* yhat = ws.value.data() + root * n;
        double* adj = ws.adjoint.data() + root * n;
        for (std::size_t i = 0; i < n; ++i) {
            double e = yhat[i] - y[i];
            sum += e * e;
            adj[i] = 2.0 * e * inv_n;
        }
    }
    const double mse = sum * inv_n;
    if (!std::isfinite(mse)) {
        return std::nullopt;
    }

    std::fill(grad.begin(), grad.end(), 0.0);
    const auto order = shape.postorder();
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const auto k = static_cast<std::size_t>(*it);
        const auto& node = shape.node(k);
        if (node.kind == NodeKind::Leaf) {
            continue;
        }
        const std::size_t base = k * n;
        const double* adj = ws.adjoint.data() + base;
        const double* raw = ws.raw.data() + base;
        const double* d1 = ws.d1.data() + base;
        const double* p = w.data() + node.param_offset;
        double* g = grad.data() + node.param_offset;

        if (node.kind == NodeKind::Unary) {
            const double a = p[0], b = p[1];
            const auto child = static_cast<std::size_t>(node.left);
            const double* u = ws.value.data() + child * n;
            double* adj_child = ws.adjoint.data() + child * n;
            const bool propagate = shape.node(child).kind != NodeKind::Leaf;
            double ga = 0.0, gb = 0.0, gc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = adj[i] * a * d1[i];
                ga += adj[i] * raw[i];
                gb += s * u[i];
                gc += adj[i];
                if (propagate) {
                    adj_child[i] = s * b;
                }
            }
            g[0] = ga;
            g[1] = gb;
            g[2] = gc;
        } else {
            const double a = p[0], b = p[1], c = p[2];
            const double* d2 = ws.d2.data() + base;
            const auto lc = static_cast<std::size_t>(node.left);
            const auto rc = static_cast<std::size_t>(node.right);
            const double* l = ws.value.data() + lc * n;
            const double* r = ws.value.data() + rc * n;
            double* adj_l = ws.adjoint.data() + lc * n;
            double* adj_r = ws.adjoint.data() + rc * n;
            const bool propagate = shape.node(lc).kind != NodeKind::Leaf;
            double ga = 0.0, gb = 0.0, gc = 0.0, gd = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double su = adj[i] * a * d1[i];
                const double sv = adj[i] * a * d2[i];
                ga += adj[i] * raw[i];
                gb += su * l[i];
                gc += sv * r[i];
                gd += adj[i];
                if (propagate) {
                    adj_l[i] = su * b;
                    adj_r[i] = sv * c;
                }
            }
            g[0] = ga;
            g[1] = gb;
            g[2] = gc;
            g[3] = gd;
        }
    }
    for (double gi : grad) {
        if (!std::isfinite(gi)) {
            return std::nullopt;
        }
    }
    return mse;
}

std::optional<LossGradient> loss_and_gradients(const ExpressionTree& tree, const Matrix& X, std::span<const double> y)
{
    EvalWorkspace ws;
    LossGradient out;
    out.gradient.resize(tree.coefficients().size());
    auto mse = loss_and_gradients(tree, X, y, out.gradient, ws);
    if (!mse) {
        return std::nullopt;
    }
    out.mse = *mse;
    return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string format_number(double v, int digits)
{
    if (digits == round_trip_digits) {
        return fmt::format("{}", v);
    }
    return fmt::format("{:#.{}g}", v, digits);
}

std::string render_node(const ExpressionTree& tree, int k, int digits);

std::string render_operand(const ExpressionTree& tree, int k, int digits)
{
    const auto& node = tree.shape().node(static_cast<std::size_t>(k));
    if (node.kind == NodeKind::Leaf) {
        return fmt::format("x{}", tree.resolved(static_cast<std::size_t>(k)));
    }
    return "(" + render_node(tree, k, digits) + ")";
}

std::string render_node(const ExpressionTree& tree, int k, int digits)
{
    const auto pos = static_cast<std::size_t>(k);
    const auto& node = tree.shape().node(pos);
    const auto w = tree.coefficients();
    const double* p = w.data() + node.param_offset;
    const auto num = [&](double v) { return format_number(v, digits); };
    const auto choice = static_cast<std::size_t>(tree.assignment()[pos]);

    if (node.kind == NodeKind::Unary) {
        const auto& op = tree.library().unary(choice);
        return fmt::format("{}*({}({}*{})) + {}", num(p[0]), op.token, num(p[1]),
                           render_operand(tree, node.left, digits), num(p[2]));
    }
    const auto& op = tree.library().binary(choice);
    return fmt::format("{}*(({}*{}) {} ({}*{})) + {}", num(p[0]), num(p[1]), render_operand(tree, node.left, digits),
                       op.token, num(p[2]), render_operand(tree, node.right, digits), num(p[3]));
}

} // namespace

std::string render(const ExpressionTree& tree, int significant_digits)
{
    if (!tree.initialized()) {
        throw Error(ErrorKind::InvalidArgument, "expression tree coefficients are not initialized");
    }
    const auto& root = tree.shape().node(static_cast<std::size_t>(tree.shape().root()));
    if (root.kind == NodeKind::Leaf) {
        return fmt::format("x{}", tree.resolved(static_cast<std::size_t>(tree.shape().root())));
    }
    return render_node(tree, tree.shape().root(), significant_digits);
}

} // namespace loadsr
