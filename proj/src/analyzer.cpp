// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/analyzer.hpp"

#include <algorithm>
#include <map>

#include "covloop/errors.hpp"
#include "covloop/render.hpp"

namespace covloop {

namespace {

// ---- conjunct handling ----

void split_conjuncts(const Expr& e, std::vector<Expr>& out) {
    if (e.kind == Expr::Kind::Binary && e.name == "&&") {
        split_conjuncts(e.args[0], out);
        split_conjuncts(e.args[1], out);
        return;
    }
    out.push_back(e);
}

// If the conjunct is purely a test of `signal`, returns the signal value that
// makes the conjunct true.
std::optional<bool> implied_value(const Expr& e, const std::string& signal) {
    const Expr* cur = &e;
    bool negated = false;
    while (cur->kind == Expr::Kind::Unary && (cur->name == "!" || cur->name == "~")) {
        negated = !negated;
        cur = &cur->args[0];
    }
    if (cur->kind == Expr::Kind::Ref && cur->name == signal) return !negated;
    if (cur->kind == Expr::Kind::Binary && (cur->name == "==" || cur->name == "!=") &&
        cur->args[0].kind == Expr::Kind::Ref && cur->args[0].name == signal &&
        cur->args[1].kind == Expr::Kind::Literal) {
        bool nonzero = cur->args[1].value != 0;
        bool v = (cur->name == "==") ? nonzero : !nonzero;
        return negated ? !v : v;
    }
    return std::nullopt;
}

bool is_true_expr(const Expr& e) { return e.is_true_literal(); }

// ---- signature construction ----

std::string abstract_expr(const Expr& e, std::vector<std::string>& order) {
    switch (e.kind) {
        case Expr::Kind::Ref: {
            auto it = std::find(order.begin(), order.end(), e.name);
            std::size_t idx;
            if (it == order.end()) {
                order.push_back(e.name);
                idx = order.size() - 1;
            } else {
                idx = static_cast<std::size_t>(it - order.begin());
            }
            return "%" + std::to_string(idx);
        }
        case Expr::Kind::Literal: {
            std::string lit = std::to_string(e.value);
            if (e.width) lit = std::to_string(e.width) + "'" + lit;
            if (e.wildcard) lit += "?" + std::to_string(e.wildcard);
            return lit;
        }
        case Expr::Kind::Unary: return e.name + "(" + abstract_expr(e.args[0], order) + ")";
        case Expr::Kind::Binary:
            return "(" + abstract_expr(e.args[0], order) + e.name +
                   abstract_expr(e.args[1], order) + ")";
        case Expr::Kind::Ternary:
            return "(" + abstract_expr(e.args[0], order) + "?" + abstract_expr(e.args[1], order) +
                   ":" + abstract_expr(e.args[2], order) + ")";
        case Expr::Kind::Concat:
        case Expr::Kind::Repeat: {
            std::string out = e.kind == Expr::Kind::Concat ? "cat(" : "rep(";
            for (std::size_t i = 0; i < e.args.size(); ++i)
                out += (i ? "," : "") + abstract_expr(e.args[i], order);
            return out + ")";
        }
        case Expr::Kind::Select: {
            std::string out = abstract_expr(e.args[0], order) + "[";
            for (std::size_t i = 1; i < e.args.size(); ++i)
                out += (i > 1 ? ":" : "") + abstract_expr(e.args[i], order);
            return out + "]";
        }
        case Expr::Kind::Past: return "past(" + abstract_expr(e.args[0], order) + ")";
    }
    return "";
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? sep : "") + parts[i];
    return out;
}

// ---- helpers over targets ----

bool subtree_has_control(const Stmt& s) {
    if (s.kind == Stmt::Kind::If || s.kind == Stmt::Kind::Case) return true;
    for (const Stmt& c : s.sub)
        if (subtree_has_control(c)) return true;
    return false;
}

const Stmt* first_assign(const Stmt& s) {
    if (s.kind == Stmt::Kind::Assign) return &s;
    for (const Stmt& c : s.sub)
        if (const Stmt* a = first_assign(c)) return a;
    return nullptr;
}

std::string slugify(const std::string& text, std::size_t max_words = 4) {
    std::string out;
    std::size_t words = 0;
    bool in_word = false;
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            in_word = true;
        } else if (in_word) {
            if (++words >= max_words) break;
            out += '_';
            in_word = false;
        }
    }
    while (!out.empty() && out.back() == '_') out.pop_back();
    return out.empty() ? "prop" : out;
}

} // namespace

HolePartition classify_holes(const CoverageReport& report,
                             const std::vector<CoverageTarget>& targets) {
    HolePartition part;
    for (const ReportEntry& entry : report.targets) {
        auto it = std::find_if(targets.begin(), targets.end(),
                               [&](const CoverageTarget& t) { return t.id == entry.id; });
        if (it == targets.end()) throw UnknownTarget(entry.id);
        if (entry.status != TargetStatus::Uncovered) continue;
        if (it->in_control_flow)
            part.branch_or_statement.push_back(entry.id);
        else
            part.isolated.push_back(entry.id);
    }
    return part;
}

std::string extract_slice(const SourceSpan& span, const std::string& source) {
    if (!span.valid()) throw SpanOutOfRange(span);
    // Byte offset of (line, col); both 1-based, col counts bytes.
    auto offset_of = [&](int line, int col) -> std::size_t {
        int cur = 1;
        std::size_t pos = 0;
        while (cur < line) {
            std::size_t nl = source.find('\n', pos);
            if (nl == std::string::npos) throw SpanOutOfRange(span);
            pos = nl + 1;
            ++cur;
        }
        std::size_t line_end = source.find('\n', pos);
        if (line_end == std::string::npos) line_end = source.size();
        std::size_t off = pos + static_cast<std::size_t>(col - 1);
        if (off > line_end + 1 || off > source.size()) throw SpanOutOfRange(span);
        return off;
    };
    std::size_t a = offset_of(span.start_line, span.start_col);
    std::size_t b = offset_of(span.end_line, span.end_col);
    if (b < a || b > source.size()) throw SpanOutOfRange(span);
    return source.substr(a, b - a);
}

bool context_eligible(const CoverageTarget& target) {
    if (target.kind == TargetKind::Statement) return true;
    if (target.implicit_arm || target.stmt == nullptr) return true; // hold template
    return !subtree_has_control(*target.stmt);
}

HoleContext derive_context(const CoverageTarget& target, const DesignUnit& unit,
                           const SignalTable& table) {
    HoleContext ctx;
    ctx.module = unit.name;
    ctx.input_type = target.in_control_flow ? "BRANCH_STRUCTURE" : "ISOLATED_STRUCTURE";
    ctx.locations.push_back(target.span);
    ctx.type = target.kind == TargetKind::Branch ? "BRANCH" : "STATEMENT";
    ctx.code = extract_slice(target.span, unit.source);
    ctx.timing = target.enclosing.timing;
    ctx.member_ids.push_back(target.id);

    if (target.kind == TargetKind::Branch) {
        ctx.statement_type = target.construct && target.construct->kind == Stmt::Kind::Case
                                 ? "case_statement"
                                 : "if_statement";
    } else {
        ctx.statement_type = "assignment";
    }

    if (target.block && target.block->clock) ctx.clock = target.block->clock;

    // Split the path condition and strip reset-inactive conjuncts into the
    // disable field; reset-active conjuncts stay as genuine antecedents.
    std::vector<Expr> conjuncts;
    if (!is_true_expr(target.path_condition)) split_conjuncts(target.path_condition, conjuncts);
    std::vector<Expr> kept;
    bool reset_behavior = false;
    const std::optional<ResetSpec>& block_reset = target.block ? target.block->reset : std::nullopt;
    for (const Expr& c : conjuncts) {
        if (block_reset) {
            std::optional<bool> v = implied_value(c, block_reset->signal);
            if (v.has_value()) {
                bool active_value = !block_reset->active_low;
                if (*v == active_value) {
                    kept.push_back(c); // hole lives inside the reset branch
                    reset_behavior = true;
                } // inactive test: stripped, handled by disable iff
                continue;
            }
        }
        kept.push_back(c);
    }
    if (block_reset && !reset_behavior) ctx.reset = block_reset;

    Expr precond = Expr::true_value();
    if (!kept.empty()) {
        precond = kept[0];
        for (std::size_t i = 1; i < kept.size(); ++i)
            precond = Expr::binary("&&", std::move(precond), kept[i]);
    }
    ctx.precondition = render_expr(precond);
    ctx.preconditions.push_back(ctx.precondition);

    // Consequent source: the target's own assignment, the arm's sole
    // assignment, or hold semantics for empty/implicit arms.
    const Stmt* assign = nullptr;
    const Expr* rhs = nullptr;
    if (target.cont) {
        ctx.has_assign = true;
        ctx.lhs = target.cont->lhs;
        ctx.nonblocking = false;
        rhs = &target.cont->rhs;
    } else if (target.kind == TargetKind::Statement && target.stmt) {
        assign = target.stmt;
    } else if (target.stmt && !subtree_has_control(*target.stmt)) {
        assign = first_assign(*target.stmt);
    }
    if (assign) {
        ctx.has_assign = true;
        ctx.lhs = assign->lhs;
        ctx.nonblocking = assign->nonblocking;
        rhs = &assign->rhs;
    }
    if (ctx.has_assign) {
        ctx.rhs_text = render_expr(*rhs);
        ctx.signals_out = {ctx.lhs};
    } else {
        ctx.hold_semantics = true;
        ctx.lhs = target.driven.empty() ? "" : target.driven[0];
        ctx.signals_out = target.driven;
    }

    // in-signals: precondition references, then consequent references
    std::vector<std::string> ins;
    collect_refs(precond, ins);
    if (rhs) collect_refs(*rhs, ins);
    ins.erase(std::remove_if(ins.begin(), ins.end(),
                             [&](const std::string& n) {
                                 if (table.params.count(n)) return true; // constants
                                 return std::find(ctx.signals_out.begin(), ctx.signals_out.end(),
                                                  n) != ctx.signals_out.end();
                             }),
              ins.end());
    ctx.signals_in = ins;

    // Deterministic behavior sentence
    const char* mode = ctx.timing == "always_comb" || ctx.timing == "assign"
                           ? "Combinational"
                           : "Clocked";
    if (ctx.hold_semantics) {
        ctx.behavior = std::string("Branch holds ") + (ctx.lhs.empty() ? "state" : ctx.lhs) +
                       " when no update condition fires";
    } else if (target.kind == TargetKind::Branch) {
        ctx.behavior = std::string(mode) + " " +
                       (ctx.statement_type == "case_statement" ? "case" : "if") + " branch updates " +
                       ctx.lhs + " from " + ctx.rhs_text;
    } else if (!target.in_control_flow) {
        ctx.behavior = std::string(ctx.timing == "assign" ? "Continuous" : mode) +
                       " assignment drives " + ctx.lhs + " from " + ctx.rhs_text;
    } else {
        ctx.behavior = std::string(mode) + " assignment updates " + ctx.lhs + " from " +
                       ctx.rhs_text;
    }

    // Logic signature
    std::vector<std::string> order;
    if (ctx.has_assign) {
        ctx.signature.operation_pattern =
            abstract_expr(Expr::ref(ctx.lhs), order) + (ctx.nonblocking ? "<=" : "=") +
            abstract_expr(*rhs, order);
        std::vector<std::string> rhs_sigs;
        collect_refs(*rhs, rhs_sigs);
        ctx.signature.signal_relation = ctx.lhs + "<-" + join(rhs_sigs, ",");
    } else {
        ctx.signature.operation_pattern = "hold";
        ctx.signature.signal_relation = join(ctx.signals_out, ",") + "~hold";
    }
    std::string style = ctx.clock ? "nonoverlap" : "overlap";
    std::string flavor;
    if (reset_behavior)
        flavor = "reset";
    else if (ctx.reset)
        flavor = std::string("disable:") + ctx.reset->signal + (ctx.reset->active_low ? ":low" : ":high");
    std::string clk = ctx.clock ? (ctx.clock->posedge ? "posedge " : "negedge ") + ctx.clock->signal
                                : std::string();
    ctx.signature.timing_pattern = ctx.timing + "|" + style + "|" + clk + "|" + flavor;

    return ctx;
}

std::vector<HoleContext> consolidate(std::vector<HoleContext> contexts) {
    std::vector<HoleContext> out;
    for (HoleContext& ctx : contexts) {
        HoleContext* merged = nullptr;
        for (HoleContext& existing : out) {
            if (existing.signature == ctx.signature && existing.module == ctx.module) {
                merged = &existing;
                break;
            }
        }
        if (!merged) {
            out.push_back(std::move(ctx));
            continue;
        }
        for (const SourceSpan& loc : ctx.locations)
            if (std::find(merged->locations.begin(), merged->locations.end(), loc) ==
                merged->locations.end())
                merged->locations.push_back(loc);
        for (const std::string& id : ctx.member_ids)
            if (std::find(merged->member_ids.begin(), merged->member_ids.end(), id) ==
                merged->member_ids.end())
                merged->member_ids.push_back(id);
        for (const std::string& p : ctx.preconditions)
            if (std::find(merged->preconditions.begin(), merged->preconditions.end(), p) ==
                merged->preconditions.end())
                merged->preconditions.push_back(p);
        for (const std::string& s : ctx.signals_in)
            if (std::find(merged->signals_in.begin(), merged->signals_in.end(), s) ==
                merged->signals_in.end())
                merged->signals_in.push_back(s);
        // BRANCH absorbs STATEMENT: an arm plus its sole assignment is one hole
        if (merged->type == "STATEMENT" && ctx.type == "BRANCH") {
            merged->type = "BRANCH";
            merged->statement_type = ctx.statement_type;
            merged->behavior = ctx.behavior;
        }
        // Effective precondition is the disjunction of member preconditions
        if (merged->preconditions.size() > 1) {
            std::vector<std::string> wrapped;
            for (const std::string& p : merged->preconditions) wrapped.push_back("(" + p + ")");
            merged->precondition = join(wrapped, " || ");
        }
    }
    std::stable_sort(out.begin(), out.end(), [](const HoleContext& a, const HoleContext& b) {
        if (a.locations[0] == b.locations[0]) return a.type == "BRANCH" && b.type == "STATEMENT";
        return a.locations[0] < b.locations[0];
    });
    return out;
}

// ---- JSON ----

nlohmann::ordered_json context_to_json(const HoleContext& ctx) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["module"] = ctx.module;
    j["input_type"] = ctx.input_type;
    ordered_json locs = ordered_json::array();
    for (const SourceSpan& s : ctx.locations) {
        ordered_json l;
        l["start"] = {s.start_line, s.start_col};
        l["end"] = {s.end_line, s.end_col};
        locs.push_back(std::move(l));
    }
    j["locations"] = std::move(locs);
    j["type"] = ctx.type;
    j["code"] = ctx.code;
    j["behavior"] = ctx.behavior;
    j["statement_type"] = ctx.statement_type;
    ordered_json sig;
    sig["in"] = ctx.signals_in;
    sig["out"] = ctx.signals_out;
    j["signals"] = std::move(sig);
    j["timing"] = ctx.timing;

    j["x_precondition"] = ctx.precondition;
    if (ctx.reset) {
        ordered_json r;
        r["signal"] = ctx.reset->signal;
        r["active"] = ctx.reset->active_low ? "low" : "high";
        j["x_reset"] = std::move(r);
    } else {
        j["x_reset"] = nullptr;
    }
    if (ctx.clock) {
        ordered_json c;
        c["signal"] = ctx.clock->signal;
        c["edge"] = ctx.clock->posedge ? "posedge" : "negedge";
        j["x_clock"] = std::move(c);
    } else {
        j["x_clock"] = nullptr;
    }
    ordered_json ls;
    ls["operation_pattern"] = ctx.signature.operation_pattern;
    ls["signal_relation"] = ctx.signature.signal_relation;
    ls["timing_pattern"] = ctx.signature.timing_pattern;
    j["x_logic_signature"] = std::move(ls);
    ordered_json gen;
    gen["lhs"] = ctx.lhs;
    gen["rhs"] = ctx.rhs_text;
    gen["has_assign"] = ctx.has_assign;
    gen["nonblocking"] = ctx.nonblocking;
    gen["hold"] = ctx.hold_semantics;
    gen["preconditions"] = ctx.preconditions;
    gen["member_ids"] = ctx.member_ids;
    j["x_generation"] = std::move(gen);
    return j;
}

nlohmann::ordered_json contexts_to_json(const std::vector<HoleContext>& ctxs) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const HoleContext& c : ctxs) arr.push_back(context_to_json(c));
    return arr;
}

HoleContext context_from_json(const nlohmann::json& j) {
    HoleContext ctx;
    try {
        ctx.module = j.at("module").get<std::string>();
        ctx.input_type = j.at("input_type").get<std::string>();
        for (const auto& l : j.at("locations")) {
            SourceSpan s;
            s.start_line = l.at("start")[0].get<int>();
            s.start_col = l.at("start")[1].get<int>();
            s.end_line = l.at("end")[0].get<int>();
            s.end_col = l.at("end")[1].get<int>();
            ctx.locations.push_back(s);
        }
        ctx.type = j.at("type").get<std::string>();
        ctx.code = j.at("code").get<std::string>();
        ctx.behavior = j.at("behavior").get<std::string>();
        ctx.statement_type = j.at("statement_type").get<std::string>();
        ctx.signals_in = j.at("signals").at("in").get<std::vector<std::string>>();
        ctx.signals_out = j.at("signals").at("out").get<std::vector<std::string>>();
        ctx.timing = j.at("timing").get<std::string>();
        ctx.precondition = j.value("x_precondition", std::string("1'b1"));
        if (j.contains("x_reset") && !j["x_reset"].is_null()) {
            ResetSpec r;
            r.signal = j["x_reset"].at("signal").get<std::string>();
            r.active_low = j["x_reset"].value("active", "high") == std::string("low");
            ctx.reset = r;
        }
        if (j.contains("x_clock") && !j["x_clock"].is_null()) {
            ClockSpec c;
            c.signal = j["x_clock"].at("signal").get<std::string>();
            c.posedge = j["x_clock"].value("edge", "posedge") == std::string("posedge");
            ctx.clock = c;
        }
        if (j.contains("x_logic_signature")) {
            ctx.signature.operation_pattern =
                j["x_logic_signature"].value("operation_pattern", "");
            ctx.signature.signal_relation = j["x_logic_signature"].value("signal_relation", "");
            ctx.signature.timing_pattern = j["x_logic_signature"].value("timing_pattern", "");
        }
        if (j.contains("x_generation")) {
            const auto& g = j["x_generation"];
            ctx.lhs = g.value("lhs", "");
            ctx.rhs_text = g.value("rhs", "");
            ctx.has_assign = g.value("has_assign", false);
            ctx.nonblocking = g.value("nonblocking", true);
            ctx.hold_semantics = g.value("hold", false);
            if (g.contains("preconditions"))
                ctx.preconditions = g["preconditions"].get<std::vector<std::string>>();
            if (g.contains("member_ids"))
                ctx.member_ids = g["member_ids"].get<std::vector<std::string>>();
        }
        if (ctx.preconditions.empty()) ctx.preconditions.push_back(ctx.precondition);
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError("", std::string("bad hole context: ") + e.what());
    }
    return ctx;
}

std::string behavior_slug(const std::string& behavior);
std::string behavior_slug(const std::string& behavior) { return slugify(behavior); }

} // namespace covloop
