#pragma once

// Tokenizer shared by the prefix s-expression formats of both tree genomes.

#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace msci {

class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t position, std::string expected, std::string found)
        : std::runtime_error("parse error at position " + std::to_string(position) + ": expected " + expected +
                             ", found " + found),
          position_(position),
          expected_(std::move(expected)) {}

    std::size_t position() const noexcept { return position_; }
    const std::string& expected() const noexcept { return expected_; }

private:
    std::size_t position_;
    std::string expected_;
};

struct Token {
    enum class Kind { open, close, atom, end };
    Kind kind;
    std::string_view text;
    std::size_t position;

    std::string describe() const {
        switch (kind) {
            case Kind::open: return "'('";
            case Kind::close: return "')'";
            case Kind::atom: return "'" + std::string(text) + "'";
            case Kind::end: return "end of input";
        }
        return "?";
    }
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) { advance(); }

    const Token& peek() const noexcept { return current_; }

    Token next() {
        Token t = current_;
        advance();
        return t;
    }

    Token expect(Token::Kind kind, const char* what) {
        if (current_.kind != kind) throw ParseError(current_.position, what, current_.describe());
        return next();
    }

    void expect_end() {
        if (current_.kind != Token::Kind::end) throw ParseError(current_.position, "end of input", current_.describe());
    }

private:
    void advance() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ >= src_.size()) {
            current_ = {Token::Kind::end, {}, src_.size()};
            return;
        }
        const char c = src_[pos_];
        if (c == '(' || c == ')') {
            current_ = {c == '(' ? Token::Kind::open : Token::Kind::close, src_.substr(pos_, 1), pos_};
            ++pos_;
            return;
        }
        const std::size_t start = pos_;
        while (pos_ < src_.size() && !std::isspace(static_cast<unsigned char>(src_[pos_])) && src_[pos_] != '(' &&
               src_[pos_] != ')')
            ++pos_;
        current_ = {Token::Kind::atom, src_.substr(start, pos_ - start), start};
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    Token current_{Token::Kind::end, {}, 0};
};

}  // namespace msci
