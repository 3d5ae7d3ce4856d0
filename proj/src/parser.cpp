// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/parser.hpp"

#include <cctype>
#include <map>
#include <regex>

#include "covloop/errors.hpp"
#include "covloop/lexer.hpp"

namespace covloop {

namespace {

// Constructs we recognize but deliberately do not model. Seeing one of these
// at item or statement level is an UnsupportedConstruct, never a mis-parse.
bool is_unsupported_keyword(const std::string& w) {
    static const char* words[] = {
        "interface", "class",    "typedef",  "enum",   "struct",   "union",
        "function",  "task",     "generate", "genvar", "initial",  "for",
        "while",     "repeat",   "forever",  "fork",   "specify",  "primitive",
        "casex",     "always_latch", "integer", "real", "signed",  "modport",
        "unique",    "priority", "sequence", "packed",
    };
    for (const char* k : words)
        if (w == k) return true;
    return false;
}

struct BasedLiteral {
    std::uint64_t value = 0;
    std::uint64_t wildcard = 0;
    int width = 0;
    char base = 0;
    std::string digits;
};

int base_radix(char b) {
    switch (b) {
        case 'b': return 2;
        case 'o': return 8;
        case 'd': return 10;
        case 'h': return 16;
    }
    return 10;
}

BasedLiteral decode_number(const Token& tok) {
    BasedLiteral lit;
    const std::string& t = tok.text;
    std::size_t quote = t.find('\'');
    std::string digits;
    if (quote == std::string::npos) {
        digits = t;
        lit.base = 0;
    } else {
        if (quote > 0) lit.width = std::stoi(t.substr(0, quote));
        std::size_t b = quote + 1;
        if (b < t.size() && (t[b] == 's' || t[b] == 'S'))
            throw UnsupportedConstruct(tok.span, "signed literal");
        lit.base = static_cast<char>(std::tolower(static_cast<unsigned char>(t[b])));
        digits = t.substr(b + 1);
    }
    int radix = base_radix(lit.base ? lit.base : 'd');
    std::string kept;
    for (char c : digits) {
        if (c == '_') continue;
        kept += c;
        std::uint64_t d = 0;
        bool wild = false;
        if (c == '?' || c == 'z' || c == 'Z') {
            if (radix != 2) throw UnsupportedConstruct(tok.span, "wildcard digit outside base 2");
            wild = true;
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            d = static_cast<std::uint64_t>(c - '0');
        } else {
            d = static_cast<std::uint64_t>(std::tolower(static_cast<unsigned char>(c)) - 'a' + 10);
        }
        if (!wild && d >= static_cast<std::uint64_t>(radix))
            throw SyntaxError(tok.span, std::string(1, c), {"digit for base"});
        if (radix == 10) {
            lit.value = lit.value * 10 + d;
        } else {
            int shift = radix == 2 ? 1 : radix == 8 ? 3 : 4;
            lit.value = (lit.value << shift) | (wild ? 0 : d);
            lit.wildcard = (lit.wildcard << shift) | (wild ? ((1u << shift) - 1) : 0);
        }
    }
    lit.digits = kept;
    return lit;
}

struct OpLevel {
    std::vector<std::string> ops;
};

// Precedence low → high; all binary levels are left-associative.
const std::vector<OpLevel> kBinaryLevels = {
    {{"||"}},
    {{"&&"}},
    {{"|"}},
    {{"^", "~^"}},
    {{"&"}},
    {{"==", "!="}},
    {{"<", "<=", ">", ">="}},
    {{"<<", ">>"}},
    {{"+", "-"}},
    {{"*", "/", "%"}},
};

class Parser {
public:
    Parser(std::vector<Token> tokens, const std::string& source, std::string origin,
           ParseOptions options)
        : toks_(std::move(tokens)), source_(source), origin_(std::move(origin)),
          options_(std::move(options)),
          reset_re_(options_.reset_pattern, std::regex::icase) {}

    std::vector<DesignUnit> parse_units() {
        std::vector<DesignUnit> units;
        while (!at_end()) {
            if (peek().is_ident("module")) {
                units.push_back(parse_module());
            } else {
                check_unsupported_here();
                fail({"module"});
            }
        }
        return units;
    }

    Expr parse_expression(bool allow_past) {
        allow_past_ = allow_past;
        Expr e = parse_ternary();
        if (!at_end()) fail({"end of expression"});
        return e;
    }

private:
    std::vector<Token> toks_;
    const std::string& source_;
    std::string origin_;
    ParseOptions options_;
    std::regex reset_re_;
    std::size_t pos_ = 0;
    bool allow_past_ = false;
    std::map<std::string, std::int64_t> param_env_;

    const Token& peek(std::size_t ahead = 0) const {
        std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& advance() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
    bool at_end() const { return peek().kind == Token::Kind::End; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw SyntaxError(peek().span, "'" + peek().text + "'", std::move(expected));
    }

    const Token& expect(std::string_view text) {
        if (!peek().is(text)) fail({std::string(text)});
        return advance();
    }

    bool accept(std::string_view text) {
        if (peek().is(text)) {
            advance();
            return true;
        }
        return false;
    }

    std::string expect_ident() {
        if (peek().kind != Token::Kind::Ident || is_verilog_keyword(peek().text))
            fail({"identifier"});
        return advance().text;
    }

    void check_unsupported_here() {
        if (peek().kind == Token::Kind::Ident && is_unsupported_keyword(peek().text))
            throw UnsupportedConstruct(peek().span, peek().text);
        if (peek().is("`"))
            throw UnsupportedConstruct(peek().span, "compiler directive");
        if (peek().is("#"))
            throw UnsupportedConstruct(peek().span, "delay/parameter override");
    }

    // ---- constant expressions (ranges, parameter values) ----

    std::int64_t const_eval(const Expr& e) {
        switch (e.kind) {
            case Expr::Kind::Literal:
                if (e.wildcard) throw UnsupportedConstruct(e.span, "wildcard in constant expression");
                return static_cast<std::int64_t>(e.value);
            case Expr::Kind::Ref: {
                auto it = param_env_.find(e.name);
                if (it == param_env_.end())
                    throw SyntaxError(e.span, "'" + e.name + "'", {"constant expression"});
                return it->second;
            }
            case Expr::Kind::Unary: {
                std::int64_t v = const_eval(e.args[0]);
                if (e.name == "-") return -v;
                if (e.name == "+") return v;
                if (e.name == "~") return ~v;
                if (e.name == "!") return v == 0;
                break;
            }
            case Expr::Kind::Binary: {
                std::int64_t a = const_eval(e.args[0]);
                std::int64_t b = const_eval(e.args[1]);
                if (e.name == "+") return a + b;
                if (e.name == "-") return a - b;
                if (e.name == "*") return a * b;
                if (e.name == "/") return b ? a / b : 0;
                if (e.name == "%") return b ? a % b : 0;
                if (e.name == "<<") return a << b;
                if (e.name == ">>") return a >> b;
                break;
            }
            default: break;
        }
        throw SyntaxError(e.span, "expression", {"constant expression"});
    }

    // ---- expressions ----

    Expr parse_ternary() {
        Expr cond = parse_binary(0);
        if (peek().is("?")) {
            advance();
            Expr then = parse_ternary();
            expect(":");
            Expr otherwise = parse_ternary();
            Expr e;
            e.kind = Expr::Kind::Ternary;
            e.span = SourceSpan::merge(cond.span, otherwise.span);
            e.args = {std::move(cond), std::move(then), std::move(otherwise)};
            return e;
        }
        return cond;
    }

    Expr parse_binary(std::size_t level) {
        if (level >= kBinaryLevels.size()) return parse_unary();
        Expr lhs = parse_binary(level + 1);
        for (;;) {
            bool matched = false;
            for (const auto& op : kBinaryLevels[level].ops) {
                if (peek().kind == Token::Kind::Punct && peek().is(op)) {
                    advance();
                    Expr rhs = parse_binary(level + 1);
                    lhs = Expr::binary(op, std::move(lhs), std::move(rhs));
                    matched = true;
                    break;
                }
            }
            if (!matched) return lhs;
        }
    }

    Expr parse_unary() {
        static const char* unary_ops[] = {"!", "~&", "~|", "~^", "~", "-", "+", "&", "|", "^"};
        for (const char* op : unary_ops) {
            if (peek().kind == Token::Kind::Punct && peek().is(op)) {
                SourceSpan start = peek().span;
                advance();
                Expr operand = parse_unary();
                Expr e = Expr::unary(op, std::move(operand));
                e.span = SourceSpan::merge(start, e.span);
                return e;
            }
        }
        return parse_postfix();
    }

    Expr parse_postfix() {
        Expr prim = parse_primary();
        while (peek().is("[")) {
            if (prim.kind != Expr::Kind::Ref)
                throw UnsupportedConstruct(peek().span, "select of a non-identifier");
            SourceSpan open = peek().span;
            advance();
            Expr msb = parse_ternary();
            Expr sel;
            sel.kind = Expr::Kind::Select;
            sel.args.push_back(std::move(prim));
            sel.args.push_back(std::move(msb));
            if (accept(":")) sel.args.push_back(parse_ternary());
            const Token& close = expect("]");
            sel.span = SourceSpan::merge(sel.args[0].span, close.span);
            (void)open;
            prim = std::move(sel);
        }
        return prim;
    }

    Expr parse_primary() {
        const Token& t = peek();
        if (t.kind == Token::Kind::Number) {
            BasedLiteral lit = decode_number(t);
            Expr e;
            e.kind = Expr::Kind::Literal;
            e.value = lit.value;
            e.wildcard = lit.wildcard;
            e.width = lit.width;
            e.base = lit.base;
            e.digits = lit.digits;
            e.span = t.span;
            advance();
            return e;
        }
        if (t.kind == Token::Kind::SystemIdent) {
            if (t.text == "$past" && allow_past_) {
                SourceSpan start = t.span;
                advance();
                expect("(");
                Expr inner = parse_ternary();
                const Token& close = expect(")");
                Expr e;
                e.kind = Expr::Kind::Past;
                e.span = SourceSpan::merge(start, close.span);
                e.args.push_back(std::move(inner));
                return e;
            }
            throw UnsupportedConstruct(t.span, "system call " + t.text);
        }
        if (t.kind == Token::Kind::Ident && !is_verilog_keyword(t.text)) {
            Expr e = Expr::ref(t.text, t.span);
            advance();
            return e;
        }
        if (t.is("(")) {
            advance();
            Expr e = parse_ternary();
            expect(")");
            return e;
        }
        if (t.is("{")) {
            SourceSpan start = t.span;
            advance();
            Expr first = parse_ternary();
            if (peek().is("{")) {
                // {N{expr}}
                advance();
                Expr body = parse_ternary();
                expect("}");
                const Token& close = expect("}");
                Expr e;
                e.kind = Expr::Kind::Repeat;
                e.span = SourceSpan::merge(start, close.span);
                e.args = {std::move(first), std::move(body)};
                return e;
            }
            Expr e;
            e.kind = Expr::Kind::Concat;
            e.args.push_back(std::move(first));
            while (accept(",")) e.args.push_back(parse_ternary());
            const Token& close = expect("}");
            e.span = SourceSpan::merge(start, close.span);
            return e;
        }
        check_unsupported_here();
        fail({"expression"});
    }

    // ---- statements ----

    Stmt parse_stmt() {
        check_unsupported_here();
        const Token& t = peek();
        if (t.is_ident("begin")) return parse_block();
        if (t.is_ident("if")) return parse_if();
        if (t.is_ident("case") || t.is_ident("casez")) return parse_case();
        return parse_assign_stmt();
    }

    Stmt parse_block() {
        Stmt s;
        s.kind = Stmt::Kind::Block;
        SourceSpan start = expect("begin").span;
        while (!peek().is_ident("end")) {
            if (at_end()) fail({"end"});
            s.sub.push_back(parse_stmt());
        }
        SourceSpan stop = expect("end").span;
        s.span = SourceSpan::merge(start, stop);
        return s;
    }

    Stmt parse_if() {
        Stmt s;
        s.kind = Stmt::Kind::If;
        SourceSpan start = expect("if").span;
        expect("(");
        s.cond = parse_ternary();
        expect(")");
        s.sub.push_back(parse_stmt());
        SourceSpan stop = s.sub.back().span;
        if (peek().is_ident("else")) {
            advance();
            s.has_else = true;
            s.sub.push_back(parse_stmt());
            stop = s.sub.back().span;
        }
        s.span = SourceSpan::merge(start, stop);
        return s;
    }

    Stmt parse_case() {
        Stmt s;
        s.kind = Stmt::Kind::Case;
        s.casez = peek().is_ident("casez");
        SourceSpan start = advance().span;
        expect("(");
        s.subject = parse_ternary();
        expect(")");
        while (!peek().is_ident("endcase")) {
            if (at_end()) fail({"endcase"});
            Stmt::CaseArm arm;
            SourceSpan arm_start = peek().span;
            if (peek().is_ident("default")) {
                advance();
                arm.is_default = true;
                accept(":");
            } else {
                arm.labels.push_back(parse_ternary());
                while (accept(",")) arm.labels.push_back(parse_ternary());
                expect(":");
                // labels must be constant; casez wildcard literals qualify
                for (const Expr& l : arm.labels)
                    if (!(l.kind == Expr::Kind::Literal && l.wildcard)) (void)const_eval(l);
            }
            arm.body_index = s.sub.size();
            s.sub.push_back(parse_stmt());
            arm.span = SourceSpan::merge(arm_start, s.sub.back().span);
            s.arms.push_back(std::move(arm));
        }
        SourceSpan stop = expect("endcase").span;
        s.span = SourceSpan::merge(start, stop);
        return s;
    }

    Stmt parse_assign_stmt() {
        Stmt s;
        s.kind = Stmt::Kind::Assign;
        if (peek().kind != Token::Kind::Ident || is_verilog_keyword(peek().text)) {
            check_unsupported_here();
            fail({"statement"});
        }
        if (peek(1).kind == Token::Kind::Ident)
            throw UnsupportedConstruct(peek().span, "module instantiation");
        SourceSpan start = peek().span;
        s.lhs = expect_ident();
        if (peek().is("["))
            throw UnsupportedConstruct(peek().span, "bit-select on assignment target");
        if (peek().is("<=")) {
            s.nonblocking = true;
            advance();
        } else if (peek().is("=")) {
            advance();
        } else {
            fail({"<=", "="});
        }
        s.rhs = parse_ternary();
        s.span = SourceSpan::merge(start, s.rhs.span); // semicolon excluded
        expect(";");
        return s;
    }

    // ---- reset / clock classification ----

    bool name_matches_reset(const std::string& n) const {
        return std::regex_search(n, reset_re_);
    }

    // A guard of the shape rst / !rst / ~rst / rst == k / rst != k over a
    // reset-named signal. Returns the level the guard asserts as "in reset".
    std::optional<ResetSpec> guard_as_reset(const Expr& guard) const {
        const Expr* e = &guard;
        bool negated = false;
        while (e->kind == Expr::Kind::Unary && (e->name == "!" || e->name == "~")) {
            negated = !negated;
            e = &e->args[0];
        }
        if (e->kind == Expr::Kind::Ref && name_matches_reset(e->name)) {
            ResetSpec r;
            r.signal = e->name;
            r.active_low = negated; // guard true means reset active
            return r;
        }
        if (e->kind == Expr::Kind::Binary && (e->name == "==" || e->name == "!=") &&
            e->args[0].kind == Expr::Kind::Ref && name_matches_reset(e->args[0].name) &&
            e->args[1].kind == Expr::Kind::Literal) {
            bool eq_zero = e->args[1].value == 0;
            bool active_low = (e->name == "==") ? eq_zero : !eq_zero;
            if (negated) active_low = !active_low;
            ResetSpec r;
            r.signal = e->args[0].name;
            r.active_low = active_low;
            return r;
        }
        return std::nullopt;
    }

    void classify_reset(ProcBlock& block) const {
        if (!block.clock && !block.reset) return; // reset logic lives in clocked blocks
        const Stmt* top = &block.body;
        while (top->kind == Stmt::Kind::Block && top->sub.size() == 1) top = &top->sub[0];
        if (top->kind == Stmt::Kind::Block && !top->sub.empty()) top = &top->sub[0];
        if (top->kind != Stmt::Kind::If) return;
        if (auto r = guard_as_reset(top->cond)) {
            if (block.reset) {
                // async reset from the sensitivity list wins; keep its polarity
                return;
            }
            block.reset = *r;
        }
    }

    // ---- module items ----

    struct Range {
        int msb = 0, lsb = 0, width = 1;
    };

    Range parse_opt_range() {
        Range r;
        if (accept("[")) {
            Expr msb = parse_ternary();
            expect(":");
            Expr lsb = parse_ternary();
            expect("]");
            r.msb = static_cast<int>(const_eval(msb));
            r.lsb = static_cast<int>(const_eval(lsb));
            if (r.msb < r.lsb)
                throw UnsupportedConstruct(msb.span, "descending ranges only ([msb:lsb])");
            r.width = r.msb - r.lsb + 1;
        }
        return r;
    }

    ProcBlock parse_always() {
        ProcBlock b;
        const Token& kw = advance();
        b.span.start_line = kw.span.start_line;
        b.span.start_col = kw.span.start_col;

        if (kw.text == "always_ff") {
            b.timing_class = TimingClass::AlwaysFf;
            parse_event_control(b, /*require_edge=*/true);
            if (!b.clock) throw SyntaxError(kw.span, "always_ff", {"@(posedge|negedge clock)"});
        } else if (kw.text == "always_comb") {
            b.timing_class = TimingClass::AlwaysComb;
        } else {
            b.timing_class = TimingClass::AlwaysPlain;
            if (peek().is("@")) {
                parse_event_control(b, /*require_edge=*/false);
            } else {
                fail({"@"});
            }
        }
        b.body = parse_stmt();
        b.span = SourceSpan::merge(b.span, b.body.span);
        classify_reset(b);
        return b;
    }

    void parse_event_control(ProcBlock& b, bool require_edge) {
        expect("@");
        if (accept("*")) return; // @* combinational
        expect("(");
        if (accept("*")) {
            expect(")");
            return;
        }
        bool first = true;
        do {
            bool posedge = false, negedge = false;
            if (peek().is_ident("posedge")) {
                posedge = true;
                advance();
            } else if (peek().is_ident("negedge")) {
                negedge = true;
                advance();
            }
            const Token& sig_tok = peek();
            std::string sig = expect_ident();
            if (posedge || negedge) {
                if (name_matches_reset(sig)) {
                    ResetSpec r;
                    r.signal = sig;
                    r.active_low = negedge;
                    r.async_reset = true;
                    b.reset = r;
                } else if (!b.clock) {
                    b.clock = ClockSpec{sig, posedge};
                } else {
                    throw UnsupportedConstruct(sig_tok.span, "multiple clocks in one block");
                }
            } else {
                if (require_edge) fail({"posedge", "negedge"});
                // plain sensitivity entry: treat as combinational trigger
            }
            first = false;
        } while (accept("or") || accept(","));
        (void)first;
        expect(")");
    }

    void parse_port_list(DesignUnit& unit) {
        if (!accept("(")) return;
        if (accept(")")) return;
        PortDirection dir = PortDirection::In;
        bool dir_seen = false;
        do {
            if (peek().is_ident("input") || peek().is_ident("output") || peek().is_ident("inout")) {
                const std::string d = advance().text;
                dir = d == "input" ? PortDirection::In
                                   : d == "output" ? PortDirection::Out : PortDirection::Inout;
                dir_seen = true;
            }
            if (!dir_seen) fail({"input", "output", "inout"});
            PortDecl p;
            p.direction = dir;
            if (peek().is_ident("reg") || peek().is_ident("logic")) {
                p.is_reg = true;
                advance();
            } else if (peek().is_ident("wire")) {
                advance();
            }
            Range r = parse_opt_range();
            p.msb = r.msb;
            p.lsb = r.lsb;
            p.width = r.width;
            const Token& name_tok = peek();
            p.name = expect_ident();
            p.span = name_tok.span;
            if (unit.find_port(p.name))
                throw SyntaxError(name_tok.span, "'" + p.name + "'", {"unique port name"});
            unit.ports.push_back(std::move(p));
        } while (accept(","));
        expect(")");
    }

    void parse_param_decl(DesignUnit& unit, bool localparam) {
        advance(); // parameter | localparam
        if (peek().is("[")) parse_opt_range(); // width on parameters is ignored
        do {
            ParamDecl p;
            p.localparam = localparam;
            const Token& name_tok = peek();
            p.name = expect_ident();
            p.span = name_tok.span;
            expect("=");
            Expr v = parse_ternary();
            p.value = const_eval(v);
            param_env_[p.name] = p.value;
            unit.params.push_back(std::move(p));
        } while (accept(","));
        expect(";");
    }

    void parse_net_decl(DesignUnit& unit, bool is_reg) {
        advance(); // wire | reg | logic
        Range r = parse_opt_range();
        do {
            const Token& name_tok = peek();
            std::string name = expect_ident();
            if (peek().is("["))
                throw UnsupportedConstruct(peek().span, "memory/array declaration");
            if (PortDecl* port = const_cast<PortDecl*>(unit.find_port(name))) {
                // body re-declaration of a port refines its width/kind
                port->is_reg = port->is_reg || is_reg;
                port->msb = r.msb;
                port->lsb = r.lsb;
                port->width = r.width;
            } else {
                NetDecl n;
                n.name = name;
                n.is_reg = is_reg;
                n.msb = r.msb;
                n.lsb = r.lsb;
                n.width = r.width;
                n.span = name_tok.span;
                unit.nets.push_back(std::move(n));
            }
        } while (accept(","));
        expect(";");
    }

    void parse_port_item(DesignUnit& unit) {
        const std::string d = advance().text;
        PortDirection dir = d == "input" ? PortDirection::In
                                         : d == "output" ? PortDirection::Out : PortDirection::Inout;
        bool is_reg = false;
        if (peek().is_ident("reg") || peek().is_ident("logic")) {
            is_reg = true;
            advance();
        } else if (peek().is_ident("wire")) {
            advance();
        }
        Range r = parse_opt_range();
        do {
            const Token& name_tok = peek();
            std::string name = expect_ident();
            if (PortDecl* port = const_cast<PortDecl*>(unit.find_port(name))) {
                port->direction = dir;
                port->is_reg = port->is_reg || is_reg;
                port->msb = r.msb;
                port->lsb = r.lsb;
                port->width = r.width;
            } else {
                PortDecl p;
                p.name = name;
                p.direction = dir;
                p.is_reg = is_reg;
                p.msb = r.msb;
                p.lsb = r.lsb;
                p.width = r.width;
                p.span = name_tok.span;
                unit.ports.push_back(std::move(p));
            }
        } while (accept(","));
        expect(";");
    }

    ContinuousAssign parse_cont_assign() {
        SourceSpan start = expect("assign").span;
        ContinuousAssign a;
        SourceSpan lhs_start = peek().span;
        a.lhs = expect_ident();
        if (peek().is("["))
            throw UnsupportedConstruct(peek().span, "bit-select on assignment target");
        expect("=");
        a.rhs = parse_ternary();
        a.stmt_span = SourceSpan::merge(lhs_start, a.rhs.span);
        a.span = SourceSpan::merge(start, a.rhs.span);
        expect(";");
        return a;
    }

    DesignUnit parse_module() {
        DesignUnit unit;
        unit.origin = origin_;
        unit.source = source_;
        param_env_.clear();

        SourceSpan start = expect("module").span;
        unit.name = expect_ident();
        if (peek().is("#"))
            throw UnsupportedConstruct(peek().span, "parameter port list");
        // Non-ANSI header (bare identifiers) is accepted; directions come from
        // body declarations.
        if (peek().is("(") && peek(1).kind == Token::Kind::Ident &&
            !is_verilog_keyword(peek(1).text)) {
            advance();
            do {
                PortDecl p;
                const Token& name_tok = peek();
                p.name = expect_ident();
                p.span = name_tok.span;
                p.direction = PortDirection::In; // refined by a body port item
                unit.ports.push_back(std::move(p));
            } while (accept(","));
            expect(")");
        } else {
            parse_port_list(unit);
        }
        expect(";");

        while (!peek().is_ident("endmodule")) {
            if (at_end()) fail({"endmodule"});
            check_unsupported_here();
            const Token& t = peek();
            if (t.is_ident("parameter") || t.is_ident("localparam")) {
                parse_param_decl(unit, t.text == "localparam");
            } else if (t.is_ident("input") || t.is_ident("output") || t.is_ident("inout")) {
                parse_port_item(unit);
            } else if (t.is_ident("wire")) {
                parse_net_decl(unit, false);
            } else if (t.is_ident("reg") || t.is_ident("logic")) {
                parse_net_decl(unit, true);
            } else if (t.is_ident("assign")) {
                unit.items.emplace_back(parse_cont_assign());
            } else if (t.is_ident("always") || t.is_ident("always_ff") ||
                       t.is_ident("always_comb")) {
                unit.items.emplace_back(parse_always());
            } else if (t.kind == Token::Kind::Ident && !is_verilog_keyword(t.text)) {
                throw UnsupportedConstruct(t.span, "module instantiation");
            } else {
                fail({"module item"});
            }
        }
        SourceSpan stop = expect("endmodule").span;
        unit.span = SourceSpan::merge(start, stop);
        return unit;
    }
};

} // namespace

std::vector<DesignUnit> parse_source(const std::string& text, const std::string& origin,
                                     const ParseOptions& options) {
    Parser p(tokenize(text), text, origin, options);
    return p.parse_units();
}

Expr parse_expr_text(const std::string& text, bool allow_past) {
    static const std::string empty;
    Parser p(tokenize(text), text, "<expr>", {});
    return p.parse_expression(allow_past);
}

std::string to_string(TimingClass t) {
    switch (t) {
        case TimingClass::AlwaysFf: return "always_ff";
        case TimingClass::AlwaysComb: return "always_comb";
        case TimingClass::AlwaysPlain: return "always";
    }
    return "always";
}

std::string to_string(PortDirection d) {
    switch (d) {
        case PortDirection::In: return "in";
        case PortDirection::Out: return "out";
        case PortDirection::Inout: return "inout";
    }
    return "in";
}

} // namespace covloop
