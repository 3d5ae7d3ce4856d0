// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/lexer.hpp"

#include <array>
#include <cctype>
#include <unordered_set>

#include "covloop/errors.hpp"

namespace covloop {

namespace {

class Cursor {
public:
    explicit Cursor(const std::string& text) : text_(text) {}

    bool done() const { return pos_ >= text_.size(); }
    char peek(std::size_t ahead = 0) const {
        return pos_ + ahead < text_.size() ? text_[pos_ + ahead] : '\0';
    }

    char advance() {
        char c = text_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }

    int line() const { return line_; }
    int col() const { return col_; }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool digit_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '?';
}

// Longest-match punctuation, multi-character first.
const std::array<const char*, 18> kMultiPunct = {
    "|->", "|=>", "<<<", ">>>", "===", "!==", "<=", ">=", "==", "!=",
    "&&",  "||",  "<<",  ">>",  "##",  "~&",  "~|", "~^",
};

} // namespace

bool is_verilog_keyword(const std::string& word) {
    static const std::unordered_set<std::string> kw = {
        "module", "endmodule", "input", "output", "inout", "wire", "reg", "logic",
        "parameter", "localparam", "assign", "always", "always_ff", "always_comb",
        "always_latch", "begin", "end", "if", "else", "case", "casez", "casex",
        "endcase", "default", "posedge", "negedge", "or", "property", "endproperty",
        "assert", "cover", "assume", "disable", "iff", "initial", "function",
        "endfunction", "task", "endtask", "generate", "endgenerate", "genvar",
        "interface", "endinterface", "class", "endclass", "typedef", "enum",
        "struct", "union", "packed", "signed", "unsigned", "integer", "real",
        "for", "while", "repeat", "forever", "fork", "join", "specify", "primitive",
        "modport", "unique", "priority", "sequence", "endsequence",
    };
    return kw.count(word) > 0;
}

std::vector<Token> tokenize(const std::string& text) {
    std::vector<Token> out;
    Cursor cur(text);

    while (!cur.done()) {
        char c = cur.peek();

        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '/') {
            while (!cur.done() && cur.peek() != '\n') cur.advance();
            continue;
        }
        if (c == '/' && cur.peek(1) == '*') {
            SourceSpan open{cur.line(), cur.col(), cur.line(), cur.col() + 2};
            cur.advance();
            cur.advance();
            bool closed = false;
            while (!cur.done()) {
                if (cur.peek() == '*' && cur.peek(1) == '/') {
                    cur.advance();
                    cur.advance();
                    closed = true;
                    break;
                }
                cur.advance();
            }
            if (!closed) throw SyntaxError(open, "unterminated comment", {"*/"});
            continue;
        }

        Token tok;
        tok.span.start_line = cur.line();
        tok.span.start_col = cur.col();

        if (ident_start(c)) {
            std::string word;
            while (!cur.done() && ident_char(cur.peek()) && cur.peek() != '$') word += cur.advance();
            tok.kind = Token::Kind::Ident;
            tok.text = std::move(word);
        } else if (c == '$') {
            std::string word;
            word += cur.advance();
            while (!cur.done() && (ident_char(cur.peek()) && cur.peek() != '$')) word += cur.advance();
            tok.kind = Token::Kind::SystemIdent;
            tok.text = std::move(word);
        } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '\'') {
            // Number: [size] ['base] digits, e.g. 42, 8'hFF, 'b101, 2'b1?
            std::string num;
            while (!cur.done() && std::isdigit(static_cast<unsigned char>(cur.peek())))
                num += cur.advance();
            if (cur.peek() == '\'') {
                num += cur.advance();
                char b = cur.peek();
                if (b == 's' || b == 'S') num += cur.advance(); // signed marker, rejected later
                b = cur.peek();
                if (b == 'b' || b == 'B' || b == 'o' || b == 'O' || b == 'd' || b == 'D' ||
                    b == 'h' || b == 'H') {
                    num += cur.advance();
                    while (!cur.done() && digit_char(cur.peek())) num += cur.advance();
                } else {
                    SourceSpan s{tok.span.start_line, tok.span.start_col, cur.line(), cur.col()};
                    throw SyntaxError(s, std::string("'") + b, {"b", "o", "d", "h"});
                }
            }
            tok.kind = Token::Kind::Number;
            tok.text = std::move(num);
        } else {
            std::string p;
            for (const char* mp : kMultiPunct) {
                std::size_t n = std::string_view(mp).size();
                bool match = true;
                for (std::size_t k = 0; k < n; ++k)
                    if (cur.peek(k) != mp[k]) {
                        match = false;
                        break;
                    }
                if (match) {
                    p = mp;
                    break;
                }
            }
            if (!p.empty()) {
                for (std::size_t k = 0; k < p.size(); ++k) cur.advance();
            } else {
                static const std::string kSingle = "()[]{}:;,.@#?=+-*/%<>!~&|^`";
                if (kSingle.find(c) == std::string::npos) {
                    SourceSpan s{cur.line(), cur.col(), cur.line(), cur.col() + 1};
                    throw SyntaxError(s, std::string(1, c), {"a Verilog token"});
                }
                p += cur.advance();
            }
            tok.kind = Token::Kind::Punct;
            tok.text = std::move(p);
        }

        tok.span.end_line = cur.line();
        tok.span.end_col = cur.col();
        out.push_back(std::move(tok));
    }

    Token eof;
    eof.kind = Token::Kind::End;
    eof.text = "<eof>";
    eof.span = {cur.line(), cur.col(), cur.line(), cur.col()};
    out.push_back(std::move(eof));
    return out;
}

} // namespace covloop
