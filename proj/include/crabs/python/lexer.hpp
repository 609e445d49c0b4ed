#pragma once

#include "crabs/python/ast.hpp"

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace crabs::python {

enum class TokenKind { name, number, string, op, newline, indent, dedent, end_marker };

struct Token {
    TokenKind kind = TokenKind::end_marker;
    std::string text;
    Position begin;
    Position end;
};

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(Position where, const std::string& message);

    [[nodiscard]] Position where() const noexcept { return where_; }
    [[nodiscard]] const std::string& message() const noexcept { return message_; }

private:
    Position where_;
    std::string message_;
};

// Tokenizes Python 3 source into a flat token stream with NEWLINE/INDENT/DEDENT
// tokens, the way CPython's tokenizer does. Comments, blank lines and line
// continuations are consumed. `first_line` offsets reported line numbers.
[[nodiscard]] std::vector<Token> tokenize(std::string_view source, int first_line = 1, int first_column = 0);

} // namespace crabs::python
