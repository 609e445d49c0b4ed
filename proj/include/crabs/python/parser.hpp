#pragma once

#include "crabs/python/ast.hpp"
#include "crabs/python/lexer.hpp"

#include <string_view>

namespace crabs::python {

// Parses a Python 3 module (up to the 3.11 grammar, including `match`).
// Throws SyntaxError with the offending position.
[[nodiscard]] Module parse_module(std::string_view source);

// Parses a single expression, e.g. the replacement field of an f-string.
// Positions are reported relative to (line, column).
[[nodiscard]] ExprPtr parse_expression(std::string_view source, int line = 1, int column = 0);

} // namespace crabs::python
