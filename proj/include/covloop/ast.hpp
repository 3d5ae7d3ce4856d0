// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "covloop/span.hpp"

namespace covloop {

// Expression tree for the synthesizable subset. Operators are kept as their
// source spelling; parentheses do not create nodes.
struct Expr {
    enum class Kind {
        Ref,     // identifier (signal or parameter)
        Literal, // integer literal, optionally sized/based, casez '?' bits allowed
        Unary,   // ! ~ - + and reductions & | ^ ~& ~| ~^
        Binary,  // arithmetic / bitwise / logical / relational / shift
        Ternary, // cond ? a : b
        Concat,  // {a, b, ...}
        Repeat,  // {N{expr}}
        Select,  // x[msb] or x[msb:lsb]
        Past,    // $past(expr) — property expressions only
    };

    Kind kind = Kind::Literal;
    std::string name;          // Ref: identifier; Unary/Binary: operator text
    std::uint64_t value = 0;   // Literal: value with '?' bits as 0
    std::uint64_t wildcard = 0; // Literal: mask of casez '?'/'z' digits
    int width = 0;             // Literal: declared size (0 = unsized)
    char base = 0;             // Literal: 'b','o','d','h' or 0 for plain decimal
    std::string digits;        // Literal: digit text as written (no size/base)
    std::vector<Expr> args;
    SourceSpan span;

    static Expr ref(std::string id, SourceSpan s = {}) {
        Expr e;
        e.kind = Kind::Ref;
        e.name = std::move(id);
        e.span = s;
        return e;
    }

    static Expr literal(std::uint64_t v, int w = 0, char b = 0, SourceSpan s = {}) {
        Expr e;
        e.kind = Kind::Literal;
        e.value = v;
        e.width = w;
        e.base = b;
        e.digits = std::to_string(v);
        e.span = s;
        return e;
    }

    static Expr unary(std::string op, Expr operand) {
        Expr e;
        e.kind = Kind::Unary;
        e.name = std::move(op);
        e.span = operand.span;
        e.args.push_back(std::move(operand));
        return e;
    }

    static Expr binary(std::string op, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = Kind::Binary;
        e.name = std::move(op);
        e.span = SourceSpan::merge(lhs.span, rhs.span);
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }

    static Expr true_value() { return literal(1, 1, 'b'); }

    bool is_true_literal() const {
        return kind == Kind::Literal && value == 1 && wildcard == 0;
    }
};

/// Structural equality ignoring source spans (used by the round-trip check).
bool structurally_equal(const Expr& a, const Expr& b);

struct Stmt {
    enum class Kind { Block, If, Case, Assign };

    struct CaseArm {
        std::vector<Expr> labels; // empty for default
        bool is_default = false;
        std::size_t body_index = 0; // index into sub
        SourceSpan span;            // label(s) through arm body
    };

    Kind kind = Kind::Block;
    SourceSpan span;

    // Assign
    std::string lhs;
    Expr rhs;
    bool nonblocking = false;

    // If
    Expr cond;
    bool has_else = false; // sub = [then] or [then, else]

    // Case
    Expr subject;
    bool casez = false;
    std::vector<CaseArm> arms;

    // Block children / If arms / Case arm bodies
    std::vector<Stmt> sub;
};

bool structurally_equal(const Stmt& a, const Stmt& b);

enum class TimingClass {
    AlwaysFf,   // always_ff
    AlwaysComb, // always_comb
    AlwaysPlain // event-controlled `always @(...)`
};

std::string to_string(TimingClass t);

struct ClockSpec {
    std::string signal;
    bool posedge = true;

    bool operator==(const ClockSpec&) const = default;
};

struct ResetSpec {
    std::string signal;
    bool active_low = false;
    bool async_reset = false;

    bool operator==(const ResetSpec&) const = default;
};

struct ProcBlock {
    TimingClass timing_class = TimingClass::AlwaysPlain;
    std::optional<ClockSpec> clock; // required for AlwaysFf and clocked plain always
    std::optional<ResetSpec> reset;
    Stmt body;
    SourceSpan span;
};

struct ContinuousAssign {
    std::string lhs;
    Expr rhs;
    SourceSpan span;      // full `assign ... = ...` region without the semicolon
    SourceSpan stmt_span; // the `lhs = rhs` region (coverage target span)
};

enum class PortDirection { In, Out, Inout };

std::string to_string(PortDirection d);

struct PortDecl {
    std::string name;
    PortDirection direction = PortDirection::In;
    bool is_reg = false;
    int width = 1;
    int msb = 0;
    int lsb = 0;
    SourceSpan span;
};

struct ParamDecl {
    std::string name;
    std::int64_t value = 0;
    bool localparam = false;
    SourceSpan span;
};

struct NetDecl {
    std::string name;
    bool is_reg = false; // reg/logic vs wire
    int width = 1;
    int msb = 0;
    int lsb = 0;
    SourceSpan span;
};

using ModuleItem = std::variant<ProcBlock, ContinuousAssign>;

struct DesignUnit {
    std::string name;
    std::vector<PortDecl> ports;
    std::vector<ParamDecl> params;
    std::vector<NetDecl> nets;
    std::vector<ModuleItem> items;
    SourceSpan span;

    std::string origin; // file path the unit was parsed from
    std::string source; // full text of that file (slice extraction anchor)

    const PortDecl* find_port(const std::string& n) const {
        for (const auto& p : ports)
            if (p.name == n) return &p;
        return nullptr;
    }
};

bool structurally_equal(const DesignUnit& a, const DesignUnit& b);

} // namespace covloop
