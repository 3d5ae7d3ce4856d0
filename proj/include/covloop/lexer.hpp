// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "covloop/span.hpp"

namespace covloop {

struct Token {
    enum class Kind { Ident, SystemIdent, Number, Punct, End };

    Kind kind = Kind::End;
    std::string text;
    SourceSpan span;

    bool is(std::string_view t) const { return text == t; }
    bool is_ident(std::string_view t) const { return kind == Kind::Ident && text == t; }
};

/// Tokenizes Verilog/SVA source. Comments are skipped; spans index into the
/// original text so slices taken later stay byte-exact.
std::vector<Token> tokenize(const std::string& text);

bool is_verilog_keyword(const std::string& word);

} // namespace covloop
