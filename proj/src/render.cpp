// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/render.hpp"

#include <map>
#include <sstream>

namespace covloop {

namespace {

int binary_prec(const std::string& op) {
    static const std::map<std::string, int> prec = {
        {"||", 2}, {"&&", 3}, {"|", 4},  {"^", 5},  {"~^", 5}, {"&", 6},
        {"==", 7}, {"!=", 7}, {"<", 8},  {"<=", 8}, {">", 8},  {">=", 8},
        {"<<", 9}, {">>", 9}, {"+", 10}, {"-", 10}, {"*", 11}, {"/", 11}, {"%", 11},
    };
    auto it = prec.find(op);
    return it == prec.end() ? 12 : it->second;
}

constexpr int kTernaryPrec = 1;
constexpr int kUnaryPrec = 12;
constexpr int kPrimaryPrec = 13;

int expr_prec(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Ternary: return kTernaryPrec;
        case Expr::Kind::Binary: return binary_prec(e.name);
        case Expr::Kind::Unary: return kUnaryPrec;
        default: return kPrimaryPrec;
    }
}

std::string render_literal(const Expr& e) {
    std::string out;
    if (e.width > 0) out += std::to_string(e.width);
    if (e.base) {
        out += "'";
        out += e.base;
        out += e.digits.empty() ? std::to_string(e.value) : e.digits;
    } else {
        out += e.digits.empty() ? std::to_string(e.value) : e.digits;
    }
    return out;
}

std::string render_child(const Expr& child, int parent_prec, bool right_side) {
    int cp = expr_prec(child);
    bool parens = cp < parent_prec || (cp == parent_prec && right_side);
    std::string s = render_expr(child);
    return parens ? "(" + s + ")" : s;
}

// ---- pretty printer ----

class Printer {
public:
    std::string print(const DesignUnit& u) {
        out_.str("");
        out_ << "module " << u.name;
        if (!u.ports.empty()) {
            out_ << " (\n";
            for (std::size_t i = 0; i < u.ports.size(); ++i) {
                const PortDecl& p = u.ports[i];
                out_ << "  " << dir_kw(p.direction);
                if (p.is_reg) out_ << " reg";
                if (p.width > 1 || p.msb != 0 || p.lsb != 0)
                    out_ << " [" << p.msb << ":" << p.lsb << "]";
                out_ << " " << p.name;
                if (i + 1 < u.ports.size()) out_ << ",";
                out_ << "\n";
            }
            out_ << ")";
        }
        out_ << ";\n";
        for (const ParamDecl& p : u.params)
            out_ << "  " << (p.localparam ? "localparam " : "parameter ") << p.name << " = "
                 << p.value << ";\n";
        for (const NetDecl& n : u.nets) {
            out_ << "  " << (n.is_reg ? "reg" : "wire");
            if (n.width > 1 || n.msb != 0 || n.lsb != 0) out_ << " [" << n.msb << ":" << n.lsb << "]";
            out_ << " " << n.name << ";\n";
        }
        for (const ModuleItem& item : u.items) {
            if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
                out_ << "  assign " << a->lhs << " = " << render_expr(a->rhs) << ";\n";
            } else {
                print_block(std::get<ProcBlock>(item));
            }
        }
        out_ << "endmodule\n";
        return out_.str();
    }

private:
    std::ostringstream out_;

    static const char* dir_kw(PortDirection d) {
        switch (d) {
            case PortDirection::In: return "input";
            case PortDirection::Out: return "output";
            case PortDirection::Inout: return "inout";
        }
        return "input";
    }

    void print_block(const ProcBlock& b) {
        out_ << "  ";
        switch (b.timing_class) {
            case TimingClass::AlwaysFf: out_ << "always_ff "; break;
            case TimingClass::AlwaysComb: out_ << "always_comb"; break;
            case TimingClass::AlwaysPlain: out_ << "always "; break;
        }
        if (b.timing_class != TimingClass::AlwaysComb) {
            std::vector<std::string> events;
            if (b.clock)
                events.push_back(std::string(b.clock->posedge ? "posedge " : "negedge ") +
                                 b.clock->signal);
            if (b.reset && b.reset->async_reset)
                events.push_back(std::string(b.reset->active_low ? "negedge " : "posedge ") +
                                 b.reset->signal);
            if (events.empty()) {
                out_ << "@*";
            } else {
                out_ << "@(";
                for (std::size_t i = 0; i < events.size(); ++i)
                    out_ << (i ? " or " : "") << events[i];
                out_ << ")";
            }
        }
        out_ << "\n";
        print_stmt(b.body, 2);
    }

    void indent(int n) {
        for (int i = 0; i < n; ++i) out_ << "  ";
    }

    void print_stmt(const Stmt& s, int depth) {
        switch (s.kind) {
            case Stmt::Kind::Block:
                indent(depth);
                out_ << "begin\n";
                for (const Stmt& c : s.sub) print_stmt(c, depth + 1);
                indent(depth);
                out_ << "end\n";
                break;
            case Stmt::Kind::Assign:
                indent(depth);
                out_ << s.lhs << (s.nonblocking ? " <= " : " = ") << render_expr(s.rhs) << ";\n";
                break;
            case Stmt::Kind::If:
                indent(depth);
                out_ << "if (" << render_expr(s.cond) << ")\n";
                print_stmt(s.sub[0], depth + 1);
                if (s.has_else) {
                    indent(depth);
                    out_ << "else\n";
                    print_stmt(s.sub[1], depth + 1);
                }
                break;
            case Stmt::Kind::Case:
                indent(depth);
                out_ << (s.casez ? "casez (" : "case (") << render_expr(s.subject) << ")\n";
                for (const Stmt::CaseArm& arm : s.arms) {
                    indent(depth + 1);
                    if (arm.is_default) {
                        out_ << "default:\n";
                    } else {
                        for (std::size_t i = 0; i < arm.labels.size(); ++i)
                            out_ << (i ? ", " : "") << render_expr(arm.labels[i]);
                        out_ << ":\n";
                    }
                    print_stmt(s.sub[arm.body_index], depth + 2);
                }
                indent(depth);
                out_ << "endcase\n";
                break;
        }
    }
};

// ---- structural equality ----

bool eq(const Expr& a, const Expr& b) {
    if (a.kind != b.kind || a.name != b.name || a.args.size() != b.args.size()) return false;
    if (a.kind == Expr::Kind::Literal &&
        (a.value != b.value || a.wildcard != b.wildcard || a.width != b.width || a.base != b.base))
        return false;
    for (std::size_t i = 0; i < a.args.size(); ++i)
        if (!eq(a.args[i], b.args[i])) return false;
    return true;
}

bool eq(const Stmt& a, const Stmt& b) {
    if (a.kind != b.kind || a.sub.size() != b.sub.size()) return false;
    switch (a.kind) {
        case Stmt::Kind::Assign:
            if (a.lhs != b.lhs || a.nonblocking != b.nonblocking || !eq(a.rhs, b.rhs)) return false;
            break;
        case Stmt::Kind::If:
            if (a.has_else != b.has_else || !eq(a.cond, b.cond)) return false;
            break;
        case Stmt::Kind::Case: {
            if (a.casez != b.casez || !eq(a.subject, b.subject) || a.arms.size() != b.arms.size())
                return false;
            for (std::size_t i = 0; i < a.arms.size(); ++i) {
                const auto& x = a.arms[i];
                const auto& y = b.arms[i];
                if (x.is_default != y.is_default || x.body_index != y.body_index ||
                    x.labels.size() != y.labels.size())
                    return false;
                for (std::size_t k = 0; k < x.labels.size(); ++k)
                    if (!eq(x.labels[k], y.labels[k])) return false;
            }
            break;
        }
        case Stmt::Kind::Block: break;
    }
    for (std::size_t i = 0; i < a.sub.size(); ++i)
        if (!eq(a.sub[i], b.sub[i])) return false;
    return true;
}

} // namespace

std::string render_expr(const Expr& e) {
    switch (e.kind) {
        case Expr::Kind::Ref: return e.name;
        case Expr::Kind::Literal: return render_literal(e);
        case Expr::Kind::Unary:
            return e.name + render_child(e.args[0], kUnaryPrec, false);
        case Expr::Kind::Binary: {
            int p = binary_prec(e.name);
            return render_child(e.args[0], p, false) + " " + e.name + " " +
                   render_child(e.args[1], p, true);
        }
        case Expr::Kind::Ternary:
            return render_child(e.args[0], kTernaryPrec + 1, false) + " ? " +
                   render_child(e.args[1], kTernaryPrec, true) + " : " +
                   render_child(e.args[2], kTernaryPrec, false);
        case Expr::Kind::Concat: {
            std::string out = "{";
            for (std::size_t i = 0; i < e.args.size(); ++i)
                out += (i ? ", " : "") + render_expr(e.args[i]);
            return out + "}";
        }
        case Expr::Kind::Repeat:
            return "{" + render_expr(e.args[0]) + "{" + render_expr(e.args[1]) + "}}";
        case Expr::Kind::Select: {
            std::string out = render_expr(e.args[0]) + "[" + render_expr(e.args[1]);
            if (e.args.size() > 2) out += ":" + render_expr(e.args[2]);
            return out + "]";
        }
        case Expr::Kind::Past: return "$past(" + render_expr(e.args[0]) + ")";
    }
    return "";
}

std::string pretty_print(const DesignUnit& unit) {
    Printer p;
    return p.print(unit);
}

bool structurally_equal(const Expr& a, const Expr& b) { return eq(a, b); }
bool structurally_equal(const Stmt& a, const Stmt& b) { return eq(a, b); }

bool structurally_equal(const DesignUnit& a, const DesignUnit& b) {
    if (a.name != b.name || a.ports.size() != b.ports.size() || a.params.size() != b.params.size() ||
        a.nets.size() != b.nets.size() || a.items.size() != b.items.size())
        return false;
    for (std::size_t i = 0; i < a.ports.size(); ++i) {
        const auto& x = a.ports[i];
        const auto& y = b.ports[i];
        if (x.name != y.name || x.direction != y.direction || x.is_reg != y.is_reg ||
            x.width != y.width || x.msb != y.msb || x.lsb != y.lsb)
            return false;
    }
    for (std::size_t i = 0; i < a.params.size(); ++i) {
        const auto& x = a.params[i];
        const auto& y = b.params[i];
        if (x.name != y.name || x.value != y.value || x.localparam != y.localparam) return false;
    }
    for (std::size_t i = 0; i < a.nets.size(); ++i) {
        const auto& x = a.nets[i];
        const auto& y = b.nets[i];
        if (x.name != y.name || x.is_reg != y.is_reg || x.width != y.width) return false;
    }
    for (std::size_t i = 0; i < a.items.size(); ++i) {
        if (a.items[i].index() != b.items[i].index()) return false;
        if (const auto* ca = std::get_if<ContinuousAssign>(&a.items[i])) {
            const auto& cb = std::get<ContinuousAssign>(b.items[i]);
            if (ca->lhs != cb.lhs || !eq(ca->rhs, cb.rhs)) return false;
        } else {
            const auto& pa = std::get<ProcBlock>(a.items[i]);
            const auto& pb = std::get<ProcBlock>(b.items[i]);
            if (pa.timing_class != pb.timing_class || pa.clock != pb.clock || pa.reset != pb.reset ||
                !eq(pa.body, pb.body))
                return false;
        }
    }
    return true;
}

// ---- JSON dump ----

namespace {

using nlohmann::ordered_json;

ordered_json expr_json(const Expr& e) {
    ordered_json j;
    switch (e.kind) {
        case Expr::Kind::Ref:
            j["kind"] = "ref";
            j["name"] = e.name;
            break;
        case Expr::Kind::Literal:
            j["kind"] = "literal";
            j["value"] = e.value;
            if (e.width) j["width"] = e.width;
            if (e.wildcard) j["wildcard"] = e.wildcard;
            break;
        case Expr::Kind::Unary:
            j["kind"] = "unary";
            j["op"] = e.name;
            break;
        case Expr::Kind::Binary:
            j["kind"] = "binary";
            j["op"] = e.name;
            break;
        case Expr::Kind::Ternary: j["kind"] = "ternary"; break;
        case Expr::Kind::Concat: j["kind"] = "concat"; break;
        case Expr::Kind::Repeat: j["kind"] = "repeat"; break;
        case Expr::Kind::Select: j["kind"] = "select"; break;
        case Expr::Kind::Past: j["kind"] = "past"; break;
    }
    j["span"] = span_to_json(e.span);
    if (!e.args.empty()) {
        ordered_json args = ordered_json::array();
        for (const Expr& a : e.args) args.push_back(expr_json(a));
        j["args"] = std::move(args);
    }
    return j;
}

ordered_json stmt_json(const Stmt& s) {
    ordered_json j;
    j["span"] = span_to_json(s.span);
    switch (s.kind) {
        case Stmt::Kind::Block: {
            j["kind"] = "block";
            ordered_json body = ordered_json::array();
            for (const Stmt& c : s.sub) body.push_back(stmt_json(c));
            j["stmts"] = std::move(body);
            break;
        }
        case Stmt::Kind::Assign:
            j["kind"] = "assign";
            j["lhs"] = s.lhs;
            j["nonblocking"] = s.nonblocking;
            j["rhs"] = expr_json(s.rhs);
            break;
        case Stmt::Kind::If:
            j["kind"] = "if";
            j["cond"] = expr_json(s.cond);
            j["then"] = stmt_json(s.sub[0]);
            if (s.has_else) j["else"] = stmt_json(s.sub[1]);
            break;
        case Stmt::Kind::Case: {
            j["kind"] = s.casez ? "casez" : "case";
            j["subject"] = expr_json(s.subject);
            ordered_json arms = ordered_json::array();
            for (const Stmt::CaseArm& arm : s.arms) {
                ordered_json a;
                a["default"] = arm.is_default;
                ordered_json labels = ordered_json::array();
                for (const Expr& l : arm.labels) labels.push_back(expr_json(l));
                a["labels"] = std::move(labels);
                a["span"] = span_to_json(arm.span);
                a["body"] = stmt_json(s.sub[arm.body_index]);
                arms.push_back(std::move(a));
            }
            j["arms"] = std::move(arms);
            break;
        }
    }
    return j;
}

} // namespace

nlohmann::ordered_json span_to_json(const SourceSpan& s) {
    ordered_json j;
    j["start"] = {s.start_line, s.start_col};
    j["end"] = {s.end_line, s.end_col};
    return j;
}

nlohmann::ordered_json ast_to_json(const DesignUnit& unit) {
    ordered_json j;
    j["module"] = unit.name;
    j["span"] = span_to_json(unit.span);
    ordered_json ports = ordered_json::array();
    for (const PortDecl& p : unit.ports) {
        ordered_json pj;
        pj["name"] = p.name;
        pj["direction"] = to_string(p.direction);
        pj["width"] = p.width;
        pj["reg"] = p.is_reg;
        ports.push_back(std::move(pj));
    }
    j["ports"] = std::move(ports);
    ordered_json params = ordered_json::array();
    for (const ParamDecl& p : unit.params) {
        ordered_json pj;
        pj["name"] = p.name;
        pj["value"] = p.value;
        pj["localparam"] = p.localparam;
        params.push_back(std::move(pj));
    }
    j["params"] = std::move(params);
    ordered_json nets = ordered_json::array();
    for (const NetDecl& n : unit.nets) {
        ordered_json nj;
        nj["name"] = n.name;
        nj["width"] = n.width;
        nj["reg"] = n.is_reg;
        nets.push_back(std::move(nj));
    }
    j["nets"] = std::move(nets);
    ordered_json items = ordered_json::array();
    for (const ModuleItem& item : unit.items) {
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            ordered_json ij;
            ij["kind"] = "assign";
            ij["lhs"] = a->lhs;
            ij["rhs"] = expr_json(a->rhs);
            ij["span"] = span_to_json(a->span);
            items.push_back(std::move(ij));
        } else {
            const ProcBlock& b = std::get<ProcBlock>(item);
            ordered_json ij;
            ij["kind"] = "process";
            ij["timing"] = to_string(b.timing_class);
            if (b.clock) {
                ordered_json cj;
                cj["signal"] = b.clock->signal;
                cj["edge"] = b.clock->posedge ? "posedge" : "negedge";
                ij["clock"] = std::move(cj);
            }
            if (b.reset) {
                ordered_json rj;
                rj["signal"] = b.reset->signal;
                rj["active"] = b.reset->active_low ? "low" : "high";
                rj["async"] = b.reset->async_reset;
                ij["reset"] = std::move(rj);
            }
            ij["span"] = span_to_json(b.span);
            ij["body"] = stmt_json(b.body);
            items.push_back(std::move(ij));
        }
    }
    j["items"] = std::move(items);
    return j;
}

} // namespace covloop
