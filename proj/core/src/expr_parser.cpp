#include "loadsr/expr_parser.hpp"

#include <cctype>
#include <charconv>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "loadsr/error.hpp"

namespace loadsr {

namespace {

struct AstNode {
    NodeKind kind = NodeKind::Leaf;
    std::size_t position = 0;
    std::string token;
    std::size_t token_position = 0;
    int variable = -1;
    std::vector<double> coefficients;
    std::vector<AstNode> children;
};

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    AstNode parse()
    {
        skip_ws();
        AstNode root = (peek() == 'x') ? parse_leaf() : parse_expr();
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input");
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const
    {
        std::string found = pos_ < text_.size() ? fmt::format("'{}'", text_[pos_]) : std::string("end of input");
        throw ParseError(pos_, fmt::format("{} (found {})", what, found));
    }

    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])) != 0) {
            ++pos_;
        }
    }

    [[nodiscard]] char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

    void expect(char c)
    {
        skip_ws();
        if (peek() != c) {
            fail(fmt::format("expected '{}'", c));
        }
        ++pos_;
    }

    double number()
    {
        skip_ws();
        const char* first = text_.data() + pos_;
        const char* last = text_.data() + text_.size();
        if (pos_ < text_.size() && text_[pos_] == '+') {
            ++first;
        }
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, value);
        if (ec != std::errc {} || ptr == first) {
            fail("expected a number");
        }
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        return value;
    }

    AstNode parse_leaf()
    {
        skip_ws();
        AstNode leaf;
        leaf.position = pos_;
        expect('x');
        std::size_t start = pos_;
        int index = 0;
        auto [ptr, ec] = std::from_chars(text_.data() + pos_, text_.data() + text_.size(), index);
        if (ec != std::errc {} || ptr == text_.data() + start || index < 0) {
            fail("expected a variable index after 'x'");
        }
        pos_ = static_cast<std::size_t>(ptr - text_.data());
        leaf.variable = index;
        return leaf;
    }

    AstNode parse_operand()
    {
        skip_ws();
        if (peek() == 'x') {
            return parse_leaf();
        }
        expect('(');
        AstNode inner = parse_expr();
        expect(')');
        return inner;
    }

    // "(" number "*" operand ")"
    std::pair<double, AstNode> scaled_group()
    {
        expect('(');
        double scale = number();
        expect('*');
        AstNode operand = parse_operand();
        expect(')');
        return { scale, std::move(operand) };
    }

    AstNode parse_expr()
    {
        skip_ws();
        AstNode node;
        node.position = pos_;
        double outer = number();
        expect('*');
        expect('(');
        skip_ws();

        if (std::isalpha(static_cast<unsigned char>(peek())) != 0) {
            std::size_t start = pos_;
            node.token_position = start;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) != 0 || text_[pos_] == '_')) {
                ++pos_;
            }
            node.kind = NodeKind::Unary;
            node.token = std::string(text_.substr(start, pos_ - start));
            auto [scale, operand] = scaled_group();
            node.coefficients = { outer, scale };
            node.children.push_back(std::move(operand));
        } else {
            auto [left_scale, left] = scaled_group();
            skip_ws();
            if (peek() == ')') {
                node.kind = NodeKind::Unary;
                node.coefficients = { outer, left_scale };
                node.children.push_back(std::move(left));
            } else {
                char op = peek();
                if (op != '+' && op != '-' && op != '*' && op != '/') {
                    fail("expected a binary operator");
                }
                node.token_position = pos_;
                ++pos_;
                node.kind = NodeKind::Binary;
                node.token = std::string(1, op);
                auto [right_scale, right] = scaled_group();
                node.coefficients = { outer, left_scale, right_scale };
                node.children.push_back(std::move(left));
                node.children.push_back(std::move(right));
            }
        }
        expect(')');
        expect('+');
        node.coefficients.push_back(number());
        return node;
    }

    std::string_view text_;
    std::size_t pos_ = 0;
};

std::size_t layers(const AstNode& node)
{
    std::size_t deepest = 0;
    for (const auto& c : node.children) {
        deepest = std::max(deepest, layers(c));
    }
    return node.kind == NodeKind::Leaf ? 0 : deepest + 1;
}

struct Binder {
    const TreeTemplate& shape;
    const OperatorLibrary& library;
    OperatorAssignment assignment;
    std::vector<double> coefficients;

    void bind(const AstNode& ast, int k)
    {
        const auto pos = static_cast<std::size_t>(k);
        const auto& node = shape.node(pos);
        if (node.kind != ast.kind) {
            throw ParseError(ast.position, "expression does not follow the alternating unary/binary layout");
        }
        switch (node.kind) {
        case NodeKind::Leaf:
            if (static_cast<std::size_t>(ast.variable) >= library.variables()) {
                throw ParseError(ast.position, fmt::format("variable x{} out of range (dataset has {} inputs)",
                                                           ast.variable, library.variables()));
            }
            assignment[pos] = ast.variable;
            return;
        case NodeKind::Unary: {
            assignment[pos] = lookup(library.unary(), ast);
            bind(ast.children[0], node.left);
            break;
        }
        case NodeKind::Binary: {
            assignment[pos] = lookup(library.binary(), ast);
            bind(ast.children[0], node.left);
            bind(ast.children[1], node.right);
            break;
        }
        }
        std::copy(ast.coefficients.begin(), ast.coefficients.end(),
                  coefficients.begin() + node.param_offset);
    }

    static int lookup(std::span<const OperatorDescriptor> ops, const AstNode& ast)
    {
        for (const auto& op : ops) {
            if (op.token == ast.token) {
                return op.id;
            }
        }
        throw ParseError(ast.token_position, fmt::format("unknown operator '{}'", ast.token));
    }
};

} // namespace

ExpressionTree parse_expression(std::string_view text, std::shared_ptr<const OperatorLibrary> library)
{
    if (!library) {
        throw Error(ErrorKind::InvalidArgument, "parse_expression needs an operator library");
    }
    AstNode ast = Parser(text).parse();
    if (ast.kind == NodeKind::Leaf) {
        throw ParseError(0, "a bare variable is not a tree expression");
    }
    auto shape = std::make_shared<const TreeTemplate>(TreeTemplate::build(layers(ast), library->variables()));
    Binder binder { *shape, *library, OperatorAssignment(shape->size(), 0),
                    std::vector<double>(shape->parameter_count(), 0.0) };
    binder.bind(ast, shape->root());
    ExpressionTree tree(shape, std::move(library), std::move(binder.assignment));
    tree.set_coefficients(binder.coefficients);
    return tree;
}

} // namespace loadsr
