// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "covloop/ast.hpp"

namespace covloop {

struct ParseOptions {
    /// Regex (search, case-insensitive) that classifies a guarded signal as
    /// reset logic when it is tested at the top of a clocked block.
    std::string reset_pattern = "^(rst|reset)";
};

/// Parses a source file into design units. The whole input must be consumed;
/// trailing text is a SyntaxError. Constructs outside the supported subset
/// raise UnsupportedConstruct.
std::vector<DesignUnit> parse_source(const std::string& text, const std::string& origin,
                                     const ParseOptions& options = {});

/// Parses a standalone expression (property antecedents/consequents and
/// similar fragments). $past(...) is only legal when allow_past is set.
Expr parse_expr_text(const std::string& text, bool allow_past);

} // namespace covloop
