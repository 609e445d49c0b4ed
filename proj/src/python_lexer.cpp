#include "crabs/python/lexer.hpp"

#include <algorithm>
#include <array>
#include <cctype>

namespace crabs::python {

SyntaxError::SyntaxError(Position where, const std::string& message)
    : std::runtime_error("line " + std::to_string(where.line) + ":" + std::to_string(where.column) + ": " +
                         message),
      where_(where),
      message_(message) {}

namespace {

constexpr std::array<std::string_view, 48> kOperators = {
    "**=", "//=", ">>=", "<<=", "...", "!=", "->", ":=", "**", "//", "<<", ">>", "<=", ">=", "==", "+=",
    "-=",  "*=",  "/=",  "%=",  "&=",  "|=", "^=", "@=", "+",  "-",  "*",  "/",  "%",  "@",  "&",  "|",
    "^",   "~",   "<",   ">",   "(",   ")",  "[",  "]",  "{",  "}",  ",",  ":",  ".",  ";",  "=",  "!",
};

bool is_name_start(unsigned char c) {
    return std::isalpha(c) != 0 || c == '_' || c >= 0x80;
}

bool is_name_char(unsigned char c) {
    return std::isalnum(c) != 0 || c == '_' || c >= 0x80;
}

bool is_string_prefix(std::string_view word) {
    if (word.empty() || word.size() > 2) {
        return false;
    }
    std::string lower;
    for (char c : word) {
        lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return lower == "r" || lower == "u" || lower == "b" || lower == "f" || lower == "br" || lower == "rb" ||
           lower == "fr" || lower == "rf";
}

class Lexer {
public:
    Lexer(std::string_view source, int first_line, int first_column)
        : src_(source), line_(first_line), column_offset_(first_column) {}

    std::vector<Token> run() {
        while (true) {
            if (at_line_start_ && depth_ == 0) {
                if (!handle_indentation()) {
                    break;
                }
            }
            if (pos_ >= src_.size()) {
                break;
            }
            const unsigned char c = peek();
            if (c == ' ' || c == '\t' || c == '\f') {
                ++pos_;
                continue;
            }
            if (c == '\r') {
                ++pos_;
                continue;
            }
            if (c == '#') {
                skip_comment();
                continue;
            }
            if (c == '\\') {
                line_continuation();
                continue;
            }
            if (c == '\n') {
                newline();
                continue;
            }
            if (is_name_start(c)) {
                name_or_string();
                continue;
            }
            if (std::isdigit(c) != 0 || (c == '.' && std::isdigit(peek(1)) != 0)) {
                number();
                continue;
            }
            if (c == '"' || c == '\'') {
                string(pos_);
                continue;
            }
            op();
        }
        finish();
        return std::move(tokens_);
    }

private:
    [[nodiscard]] unsigned char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? static_cast<unsigned char>(src_[pos_ + ahead]) : '\0';
    }

    [[nodiscard]] Position here() const { return at(pos_); }

    [[nodiscard]] Position at(std::size_t offset) const {
        int col = static_cast<int>(offset - line_begin_);
        if (line_ == first_line_) {
            col += column_offset_;
        }
        return Position{line_, col};
    }

    void emit(TokenKind kind, std::size_t begin, std::size_t end, Position start) {
        tokens_.push_back(Token{kind, std::string(src_.substr(begin, end - begin)), start, here()});
    }

    void advance_line() {
        ++line_;
        line_begin_ = pos_;
    }

    // Returns false once the end of input is reached.
    bool handle_indentation() {
        while (true) {
            int width = 0;
            while (pos_ < src_.size()) {
                const char c = src_[pos_];
                if (c == ' ') {
                    ++width;
                } else if (c == '\t') {
                    width = (width / 8 + 1) * 8;
                } else if (c == '\f') {
                    width = 0;
                } else {
                    break;
                }
                ++pos_;
            }
            if (pos_ >= src_.size()) {
                return false;
            }
            const char c = src_[pos_];
            if (c == '#') {
                skip_comment();
                continue;
            }
            if (c == '\r') {
                ++pos_;
                continue;
            }
            if (c == '\n') {
                ++pos_;
                advance_line();
                continue;
            }
            if (c == '\\' && (peek(1) == '\n' || (peek(1) == '\r' && peek(2) == '\n'))) {
                // A continuation right after indentation joins with the next line.
                line_continuation();
                at_line_start_ = false;
                apply_indent(width);
                return true;
            }
            at_line_start_ = false;
            apply_indent(width);
            return true;
        }
    }

    void apply_indent(int width) {
        if (width > indents_.back()) {
            indents_.push_back(width);
            tokens_.push_back(Token{TokenKind::indent, "", here(), here()});
            return;
        }
        while (width < indents_.back()) {
            indents_.pop_back();
            tokens_.push_back(Token{TokenKind::dedent, "", here(), here()});
        }
        if (width != indents_.back()) {
            throw SyntaxError(here(), "unindent does not match any outer indentation level");
        }
    }

    void skip_comment() {
        while (pos_ < src_.size() && src_[pos_] != '\n') {
            ++pos_;
        }
    }

    void line_continuation() {
        const Position start = here();
        ++pos_;
        if (peek() == '\r') {
            ++pos_;
        }
        if (peek() != '\n') {
            throw SyntaxError(start, "unexpected character after line continuation character");
        }
        ++pos_;
        advance_line();
        if (pos_ >= src_.size()) {
            throw SyntaxError(start, "unexpected EOF after line continuation");
        }
    }

    void newline() {
        const Position start = here();
        ++pos_;
        if (depth_ == 0) {
            if (!tokens_.empty() && tokens_.back().kind != TokenKind::newline &&
                tokens_.back().kind != TokenKind::indent && tokens_.back().kind != TokenKind::dedent) {
                tokens_.push_back(Token{TokenKind::newline, "\n", start, start});
            }
            at_line_start_ = true;
        }
        advance_line();
    }

    void name_or_string() {
        const std::size_t begin = pos_;
        const Position start = here();
        while (pos_ < src_.size() && is_name_char(peek())) {
            ++pos_;
        }
        const std::string_view word = src_.substr(begin, pos_ - begin);
        if ((peek() == '"' || peek() == '\'') && is_string_prefix(word)) {
            string(begin);
            return;
        }
        emit(TokenKind::name, begin, pos_, start);
    }

    void number() {
        const std::size_t begin = pos_;
        const Position start = here();
        auto digits = [&](auto pred) {
            while (pos_ < src_.size() && (pred(peek()) || peek() == '_')) {
                ++pos_;
            }
        };
        auto is_dec = [](unsigned char c) { return std::isdigit(c) != 0; };
        if (peek() == '0' && (peek(1) == 'x' || peek(1) == 'X' || peek(1) == 'o' || peek(1) == 'O' ||
                              peek(1) == 'b' || peek(1) == 'B')) {
            pos_ += 2;
            digits([](unsigned char c) { return std::isxdigit(c) != 0; });
        } else {
            digits(is_dec);
            if (peek() == '.') {
                ++pos_;
                digits(is_dec);
            }
            if ((peek() == 'e' || peek() == 'E') &&
                (std::isdigit(peek(1)) != 0 || ((peek(1) == '+' || peek(1) == '-') && std::isdigit(peek(2)) != 0))) {
                pos_ += 2;
                digits(is_dec);
            }
            if (peek() == 'j' || peek() == 'J') {
                ++pos_;
            }
        }
        if (is_name_start(peek())) {
            throw SyntaxError(here(), "invalid decimal literal");
        }
        emit(TokenKind::number, begin, pos_, start);
    }

    // `begin` points at the prefix (if any); pos_ points at the opening quote.
    void string(std::size_t begin) {
        const Position start = at(begin);
        const char quote = static_cast<char>(peek());
        const bool triple = peek(1) == quote && peek(2) == quote;
        pos_ += triple ? 3 : 1;
        while (true) {
            if (pos_ >= src_.size()) {
                throw SyntaxError(start, triple ? "unterminated triple-quoted string literal"
                                                : "unterminated string literal");
            }
            const char c = src_[pos_];
            if (c == '\\') {
                ++pos_;
                if (pos_ < src_.size() && src_[pos_] == '\n') {
                    ++pos_;
                    advance_line();
                } else {
                    ++pos_;
                }
                continue;
            }
            if (c == '\n') {
                if (!triple) {
                    throw SyntaxError(start, "unterminated string literal");
                }
                ++pos_;
                advance_line();
                continue;
            }
            if (c == quote) {
                if (!triple) {
                    ++pos_;
                    break;
                }
                if (peek(1) == quote && peek(2) == quote) {
                    pos_ += 3;
                    break;
                }
            }
            ++pos_;
        }
        emit(TokenKind::string, begin, pos_, start);
    }

    void op() {
        const Position start = here();
        const std::string_view rest = src_.substr(pos_);
        for (std::string_view candidate : kOperators) {
            if (rest.substr(0, candidate.size()) != candidate) {
                continue;
            }
            if (candidate == "(" || candidate == "[" || candidate == "{") {
                brackets_.push_back(candidate[0]);
                ++depth_;
            } else if (candidate == ")" || candidate == "]" || candidate == "}") {
                const char open = candidate == ")" ? '(' : candidate == "]" ? '[' : '{';
                if (brackets_.empty() || brackets_.back() != open) {
                    throw SyntaxError(start, "unmatched '" + std::string(candidate) + "'");
                }
                brackets_.pop_back();
                --depth_;
            }
            const std::size_t begin = pos_;
            pos_ += candidate.size();
            emit(TokenKind::op, begin, pos_, start);
            return;
        }
        throw SyntaxError(start, std::string("invalid character '") + static_cast<char>(peek()) + "'");
    }

    void finish() {
        if (!brackets_.empty()) {
            throw SyntaxError(here(), std::string("'") + brackets_.back() + "' was never closed");
        }
        if (!tokens_.empty() && tokens_.back().kind != TokenKind::newline &&
            tokens_.back().kind != TokenKind::dedent) {
            tokens_.push_back(Token{TokenKind::newline, "", here(), here()});
        }
        while (indents_.size() > 1) {
            indents_.pop_back();
            tokens_.push_back(Token{TokenKind::dedent, "", here(), here()});
        }
        tokens_.push_back(Token{TokenKind::end_marker, "", here(), here()});
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_begin_ = 0;
    int line_;
    int first_line_ = line_;
    int column_offset_;
    int depth_ = 0;
    bool at_line_start_ = true;
    std::vector<int> indents_{0};
    std::vector<char> brackets_;
    std::vector<Token> tokens_;
};

} // namespace

std::vector<Token> tokenize(std::string_view source, int first_line, int first_column) {
    return Lexer(source, first_line, first_column).run();
}

} // namespace crabs::python
