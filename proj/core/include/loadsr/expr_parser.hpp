#pragma once

#include <memory>
#include <string_view>

#include "loadsr/expr_tree.hpp"

namespace loadsr {

// Parses the rendered expression grammar back into an expression tree:
//
//   expr    := number "*" "(" inner ")" " + " number
//   inner   := token "(" number "*" operand ")"                                  (unary; identity has no token)
//            | "(" number "*" operand ") " binop " (" number "*" operand ")"    (binary)
//   operand := "x" digits | "(" expr ")"
//
// The tree depth is inferred from the nesting and must follow the alternating layout.
// Operator tokens are resolved against `library`; variable indices must be below library.variables().
// Throws ParseError carrying the offending byte offset.
ExpressionTree parse_expression(std::string_view text, std::shared_ptr<const OperatorLibrary> library);

} // namespace loadsr
