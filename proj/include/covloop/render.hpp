// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "json.hpp"

#include "covloop/ast.hpp"

namespace covloop {

/// Source text for an expression with minimal parentheses.
std::string render_expr(const Expr& e);

/// Canonical source for a whole unit; parsing it back yields a structurally
/// identical AST.
std::string pretty_print(const DesignUnit& unit);

/// Stable JSON dump of the AST (debugging aid for `covloop parse`).
nlohmann::ordered_json ast_to_json(const DesignUnit& unit);

nlohmann::ordered_json span_to_json(const SourceSpan& s);

} // namespace covloop
