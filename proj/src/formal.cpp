// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/formal.hpp"

#include <algorithm>
#include <fstream>
#include <future>

#include "covloop/errors.hpp"
#include "covloop/parser.hpp"

namespace covloop {

namespace {

std::uint64_t mask_bits(std::uint64_t v, int width) {
    if (width <= 0 || width >= 64) return v;
    return v & ((1ull << width) - 1);
}

// must-assign set: signals assigned on every path through the statement
std::set<std::string> must_assign(const Stmt& s) {
    switch (s.kind) {
        case Stmt::Kind::Assign: return {s.lhs};
        case Stmt::Kind::Block: {
            std::set<std::string> out;
            for (const Stmt& c : s.sub) {
                auto m = must_assign(c);
                out.insert(m.begin(), m.end());
            }
            return out;
        }
        case Stmt::Kind::If: {
            if (!s.has_else) return {};
            auto a = must_assign(s.sub[0]);
            auto b = must_assign(s.sub[1]);
            std::set<std::string> out;
            for (const std::string& x : a)
                if (b.count(x)) out.insert(x);
            return out;
        }
        case Stmt::Kind::Case: {
            bool has_default = false;
            for (const Stmt::CaseArm& a : s.arms) has_default |= a.is_default;
            if (!has_default) return {}; // conservatively incomplete
            bool first = true;
            std::set<std::string> out;
            for (const Stmt::CaseArm& a : s.arms) {
                auto m = must_assign(s.sub[a.body_index]);
                if (first) {
                    out = m;
                    first = false;
                } else {
                    std::set<std::string> keep;
                    for (const std::string& x : out)
                        if (m.count(x)) keep.insert(x);
                    out = keep;
                }
            }
            return out;
        }
    }
    return {};
}

void collect_guard_deps(const Stmt& s, std::vector<std::string> guards,
                        std::map<std::string, std::set<std::string>>& deps) {
    switch (s.kind) {
        case Stmt::Kind::Assign: {
            std::vector<std::string> refs;
            collect_refs(s.rhs, refs);
            auto& d = deps[s.lhs];
            d.insert(refs.begin(), refs.end());
            d.insert(guards.begin(), guards.end());
            break;
        }
        case Stmt::Kind::Block:
            for (const Stmt& c : s.sub) collect_guard_deps(c, guards, deps);
            break;
        case Stmt::Kind::If: {
            std::vector<std::string> g = guards;
            collect_refs(s.cond, g);
            for (const Stmt& c : s.sub) collect_guard_deps(c, g, deps);
            break;
        }
        case Stmt::Kind::Case: {
            std::vector<std::string> g = guards;
            collect_refs(s.subject, g);
            for (const Stmt& c : s.sub) collect_guard_deps(c, g, deps);
            break;
        }
    }
}

} // namespace

std::string to_string(ProofStatus::Verdict v) {
    switch (v) {
        case ProofStatus::Verdict::Proven: return "PROVEN";
        case ProofStatus::Verdict::Falsified: return "FALSIFIED";
        case ProofStatus::Verdict::Undetermined: return "UNDETERMINED";
    }
    return "UNDETERMINED";
}

ProofStatus::Verdict verdict_from_string(const std::string& s) {
    if (s == "PROVEN") return ProofStatus::Verdict::Proven;
    if (s == "FALSIFIED") return ProofStatus::Verdict::Falsified;
    if (s == "UNDETERMINED") return ProofStatus::Verdict::Undetermined;
    throw SchemaError("", "unknown proof verdict '" + s + "'");
}

// ---- expression evaluation ----

int TransitionSystem::width_of_signal(const std::string& name) const {
    auto it = var_refs_.find(name);
    return it == var_refs_.end() ? 32 : it->second.width;
}

bool TransitionSystem::knows_signal(const std::string& name) const {
    return var_refs_.count(name) > 0;
}

int TransitionSystem::expr_width(const Expr& e) const {
    switch (e.kind) {
        case Expr::Kind::Ref: return width_of_signal(e.name);
        case Expr::Kind::Literal: return e.width ? e.width : 32;
        case Expr::Kind::Unary:
            if (e.name == "!" || e.name == "&" || e.name == "|" || e.name == "^" ||
                e.name == "~&" || e.name == "~|" || e.name == "~^")
                return 1;
            return expr_width(e.args[0]);
        case Expr::Kind::Binary: {
            const std::string& op = e.name;
            if (op == "&&" || op == "||" || op == "==" || op == "!=" || op == "<" || op == "<=" ||
                op == ">" || op == ">=")
                return 1;
            if (op == "<<" || op == ">>") return expr_width(e.args[0]);
            return std::max(expr_width(e.args[0]), expr_width(e.args[1]));
        }
        case Expr::Kind::Ternary: return std::max(expr_width(e.args[1]), expr_width(e.args[2]));
        case Expr::Kind::Concat: {
            int w = 0;
            for (const Expr& a : e.args) w += expr_width(a);
            return std::min(w, 64);
        }
        case Expr::Kind::Repeat: return 64;
        case Expr::Kind::Select: return e.args.size() > 2 ? 32 : 1;
        case Expr::Kind::Past: return expr_width(e.args[0]);
    }
    return 32;
}

std::uint64_t TransitionSystem::eval(const Expr& e, const ReadFn& read, const PastFn& past) const {
    switch (e.kind) {
        case Expr::Kind::Ref: return read(e.name);
        case Expr::Kind::Literal: return mask_bits(e.value, e.width ? e.width : 64);
        case Expr::Kind::Past:
            if (!past) throw UnknownSignal("$past in a same-cycle check");
            return past(e.args[0]);
        case Expr::Kind::Unary: {
            std::uint64_t v = eval(e.args[0], read, past);
            int w = expr_width(e.args[0]);
            if (e.name == "!") return v == 0;
            if (e.name == "~") return mask_bits(~v, w);
            if (e.name == "-") return mask_bits(~v + 1, w);
            if (e.name == "+") return v;
            std::uint64_t all = w >= 64 ? ~0ull : ((1ull << w) - 1);
            if (e.name == "&") return (v & all) == all;
            if (e.name == "|") return v != 0;
            if (e.name == "~&") return (v & all) != all;
            if (e.name == "~|") return v == 0;
            int ones = 0;
            for (std::uint64_t x = v; x; x >>= 1) ones += static_cast<int>(x & 1);
            if (e.name == "^") return ones & 1;
            return !(ones & 1); // ~^
        }
        case Expr::Kind::Binary: {
            const std::string& op = e.name;
            std::uint64_t a = eval(e.args[0], read, past);
            if (op == "&&") return a != 0 && eval(e.args[1], read, past) != 0;
            if (op == "||") return a != 0 || eval(e.args[1], read, past) != 0;
            std::uint64_t b = eval(e.args[1], read, past);
            int w = expr_width(e);
            if (op == "==") return a == b;
            if (op == "!=") return a != b;
            if (op == "<") return a < b;
            if (op == "<=") return a <= b;
            if (op == ">") return a > b;
            if (op == ">=") return a >= b;
            if (op == "+") return mask_bits(a + b, w);
            if (op == "-") return mask_bits(a - b, w);
            if (op == "*") return mask_bits(a * b, w);
            if (op == "/") return b ? mask_bits(a / b, w) : 0;
            if (op == "%") return b ? mask_bits(a % b, w) : 0;
            if (op == "&") return mask_bits(a & b, w);
            if (op == "|") return mask_bits(a | b, w);
            if (op == "^") return mask_bits(a ^ b, w);
            if (op == "~^") return mask_bits(~(a ^ b), w);
            if (op == "<<") return b >= 64 ? 0 : mask_bits(a << b, w);
            if (op == ">>") return b >= 64 ? 0 : a >> b;
            throw UnknownSignal("operator " + op);
        }
        case Expr::Kind::Ternary:
            return eval(e.args[0], read, past) ? eval(e.args[1], read, past)
                                               : eval(e.args[2], read, past);
        case Expr::Kind::Concat: {
            std::uint64_t v = 0;
            for (const Expr& a : e.args) {
                int w = expr_width(a);
                v = (v << w) | mask_bits(eval(a, read, past), w);
            }
            return v;
        }
        case Expr::Kind::Repeat: {
            std::uint64_t n = eval(e.args[0], read, past);
            int w = expr_width(e.args[1]);
            std::uint64_t body = mask_bits(eval(e.args[1], read, past), w);
            std::uint64_t v = 0;
            for (std::uint64_t i = 0; i < n && i < 64; ++i) v = (v << w) | body;
            return v;
        }
        case Expr::Kind::Select: {
            std::uint64_t base = eval(e.args[0], read, past);
            std::uint64_t msb = eval(e.args[1], read, past);
            if (e.args.size() > 2) {
                std::uint64_t lsb = eval(e.args[2], read, past);
                return mask_bits(base >> lsb, static_cast<int>(msb - lsb + 1));
            }
            return (base >> msb) & 1;
        }
    }
    return 0;
}

std::uint64_t TransitionSystem::read_frame(const Frame& f, const std::string& name) const {
    auto it = var_refs_.find(name);
    if (it == var_refs_.end()) throw UnknownSignal(name);
    const VarRef& r = it->second;
    switch (r.cls) {
        case VarClass::State: return mask_bits(f.state >> r.offset, r.width);
        case VarClass::Input: return mask_bits(f.input >> r.offset, r.width);
        case VarClass::Comb: return f.comb[static_cast<std::size_t>(r.comb_index)];
        case VarClass::Param: return r.param_value;
    }
    return 0;
}

std::uint64_t TransitionSystem::eval_on_frame(const Expr& e, const Frame& cur,
                                              const Frame* past) const {
    ReadFn read = [this, &cur](const std::string& n) { return read_frame(cur, n); };
    PastFn past_fn;
    if (past)
        past_fn = [this, past](const Expr& arg) { return eval_on_frame(arg, *past, nullptr); };
    return eval(e, read, past_fn);
}

// ---- frame construction ----

class FrameBuilder {
public:
    FrameBuilder(const TransitionSystem& ts, std::uint64_t state, std::uint64_t input)
        : ts_(ts) {
        frame_.state = state;
        frame_.input = input;
        frame_.comb.assign(ts.comb_vars_.size(), 0);
        read_ = [this](const std::string& n) { return read_signal(n); };
    }

    Frame build() {
        for (const auto& src : ts_.comb_order_) {
            if (src.cont) {
                std::uint64_t v =
                    mask_bits(eval(src.cont->rhs), ts_.width_of_signal(src.cont->lhs));
                set_comb(src.cont->lhs, v);
                annotate(ts_.cont_target_, src.cont);
            } else {
                exec(src.block->body, /*clocked=*/false);
            }
        }
        next_.assign(ts_.state_vars_.size(), 0);
        for (std::size_t i = 0; i < ts_.state_vars_.size(); ++i)
            next_[i] =
                mask_bits(frame_.state >> ts_.state_vars_[i].offset, ts_.state_vars_[i].width);
        for (const ProcBlock* b : ts_.clocked_blocks_) exec(b->body, /*clocked=*/true);
        frame_.next = 0;
        for (std::size_t i = 0; i < ts_.state_vars_.size(); ++i)
            frame_.next |= next_[i] << ts_.state_vars_[i].offset;
        return std::move(frame_);
    }

private:
    const TransitionSystem& ts_;
    Frame frame_;
    std::vector<std::uint64_t> next_;
    std::map<std::string, std::uint64_t> overlay_; // blocking assigns in clocked blocks
    TransitionSystem::ReadFn read_;

    std::uint64_t eval(const Expr& e) { return ts_.eval(e, read_, nullptr); }

    void set_comb(const std::string& name, std::uint64_t v) {
        auto it = ts_.var_refs_.find(name);
        if (it != ts_.var_refs_.end() && it->second.comb_index >= 0)
            frame_.comb[static_cast<std::size_t>(it->second.comb_index)] = v;
    }

    template <typename Map, typename Key>
    void annotate(const Map& m, Key k) {
        auto it = m.find(static_cast<const void*>(k));
        if (it != m.end()) frame_.executed.push_back(it->second);
    }

    std::uint64_t read_signal(const std::string& name) const {
        auto ov = overlay_.find(name);
        if (ov != overlay_.end()) return ov->second;
        return ts_.read_frame(frame_, name);
    }

    void exec(const Stmt& s, bool clocked) {
        switch (s.kind) {
            case Stmt::Kind::Block:
                for (const Stmt& c : s.sub) exec(c, clocked);
                break;
            case Stmt::Kind::Assign: {
                std::uint64_t v = mask_bits(eval(s.rhs), ts_.width_of_signal(s.lhs));
                if (clocked) {
                    for (std::size_t i = 0; i < ts_.state_vars_.size(); ++i)
                        if (ts_.state_vars_[i].name == s.lhs) next_[i] = v;
                    if (!s.nonblocking) overlay_[s.lhs] = v;
                } else {
                    set_comb(s.lhs, v);
                }
                annotate(ts_.stmt_target_, &s);
                break;
            }
            case Stmt::Kind::If:
                if (eval(s.cond)) {
                    annotate(ts_.then_target_, &s);
                    exec(s.sub[0], clocked);
                } else {
                    annotate(ts_.else_target_, &s);
                    if (s.has_else) exec(s.sub[1], clocked);
                }
                break;
            case Stmt::Kind::Case: exec_case(s, clocked); break;
        }
    }

    void exec_case(const Stmt& s, bool clocked) {
        int subj_w = ts_.expr_width(s.subject);
        std::uint64_t subj = mask_bits(eval(s.subject), subj_w);
        auto arm_targets = ts_.case_arm_targets_.find(&s);
        int default_arm = -1;
        for (std::size_t i = 0; i < s.arms.size(); ++i) {
            const Stmt::CaseArm& arm = s.arms[i];
            if (arm.is_default) {
                default_arm = static_cast<int>(i);
                continue;
            }
            for (const Expr& l : arm.labels) {
                bool hit;
                std::uint64_t lv = mask_bits(eval(l), subj_w);
                if (s.casez && l.kind == Expr::Kind::Literal && l.wildcard) {
                    std::uint64_t care = mask_bits(~l.wildcard, subj_w);
                    hit = (subj & care) == (lv & care);
                } else {
                    hit = subj == lv;
                }
                if (hit) {
                    if (arm_targets != ts_.case_arm_targets_.end() &&
                        arm_targets->second[i] != 0xffff)
                        frame_.executed.push_back(arm_targets->second[i]);
                    exec(s.sub[arm.body_index], clocked);
                    return;
                }
            }
        }
        if (default_arm >= 0) {
            if (arm_targets != ts_.case_arm_targets_.end() &&
                arm_targets->second[static_cast<std::size_t>(default_arm)] != 0xffff)
                frame_.executed.push_back(
                    arm_targets->second[static_cast<std::size_t>(default_arm)]);
            exec(s.sub[s.arms[static_cast<std::size_t>(default_arm)].body_index], clocked);
            return;
        }
        annotate(ts_.implicit_default_, &s); // nothing matched, nothing fired
    }
};

// ---- elaboration ----

TransitionSystem elaborate(const DesignUnit& unit, const SignalTable& table,
                           std::vector<CoverageTarget> targets, const EngineConfig& config) {
    TransitionSystem ts;
    ts.unit_ = &unit;
    ts.table_ = table;
    ts.targets_ = std::move(targets);
    ts.config_ = config;

    std::set<std::string> clocks;
    std::set<std::string> clocked_assigned, comb_assigned;
    for (const ModuleItem& item : unit.items) {
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            comb_assigned.insert(a->lhs);
        } else {
            const ProcBlock& b = std::get<ProcBlock>(item);
            std::vector<std::string> assigned = assigned_signals(b.body);
            if (b.clock) {
                clocks.insert(b.clock->signal);
                clocked_assigned.insert(assigned.begin(), assigned.end());
            } else {
                comb_assigned.insert(assigned.begin(), assigned.end());
            }
        }
    }
    if (clocks.size() > 1) throw UnsupportedConstruct(unit.span, "multiple clock domains");
    for (const std::string& s : clocked_assigned)
        if (comb_assigned.count(s))
            throw UnsupportedConstruct(unit.span, "signal '" + s + "' has multiple drivers");

    for (const PortDecl& p : unit.ports) {
        if (p.direction == PortDirection::Inout)
            throw UnsupportedConstruct(p.span, "inout port");
        if (p.direction == PortDirection::Out && !clocked_assigned.count(p.name) &&
            !comb_assigned.count(p.name))
            throw UnsupportedConstruct(p.span, "undriven output '" + p.name + "'");
        if (p.direction == PortDirection::In &&
            (clocked_assigned.count(p.name) || comb_assigned.count(p.name)))
            throw UnsupportedConstruct(p.span, "assignment to input port '" + p.name + "'");
    }

    auto add_var = [&](std::vector<TransitionSystem::Var>& vars, int& bits,
                       const std::string& name) {
        TransitionSystem::Var v;
        v.name = name;
        v.width = table.width_of(name);
        v.offset = bits;
        bits += v.width;
        vars.push_back(v);
    };
    for (const auto& [name, info] : table.signals)
        if (clocked_assigned.count(name)) add_var(ts.state_vars_, ts.state_bits_, name);
    if (ts.state_bits_ > config.state_budget)
        throw StateBudgetExceeded("state space", ts.state_bits_, config.state_budget);

    for (const PortDecl& p : unit.ports) {
        if (p.direction != PortDirection::In) continue;
        if (clocks.count(p.name)) continue; // the clock is the schedule, not data
        add_var(ts.input_vars_, ts.input_bits_, p.name);
    }
    if (ts.input_bits_ > config.input_budget)
        throw StateBudgetExceeded("input space", ts.input_bits_, config.input_budget);

    for (const auto& [name, info] : table.signals) {
        if (!comb_assigned.count(name)) continue;
        TransitionSystem::Var v;
        v.name = name;
        v.width = info.width;
        v.offset = 0;
        ts.comb_vars_.push_back(v);
    }

    for (const auto& v : ts.state_vars_)
        ts.var_refs_[v.name] = {TransitionSystem::VarClass::State, v.offset, v.width, -1, 0};
    for (const auto& v : ts.input_vars_)
        ts.var_refs_[v.name] = {TransitionSystem::VarClass::Input, v.offset, v.width, -1, 0};
    for (std::size_t i = 0; i < ts.comb_vars_.size(); ++i)
        ts.var_refs_[ts.comb_vars_[i].name] = {TransitionSystem::VarClass::Comb, 0,
                                               ts.comb_vars_[i].width, static_cast<int>(i), 0};
    for (const auto& [name, value] : table.params)
        ts.var_refs_[name] = {TransitionSystem::VarClass::Param, 0, 32, -1,
                              static_cast<std::uint64_t>(value)};

    for (const auto& [name, info] : table.signals) {
        if (clocks.count(name)) continue;
        if (!ts.var_refs_.count(name))
            throw UnsupportedConstruct(unit.span, "undriven signal '" + name + "'");
    }

    // combinational evaluation order (and latch check)
    struct Source {
        TransitionSystem::CombSource src;
        std::set<std::string> defs, uses;
    };
    std::vector<Source> sources;
    for (const ModuleItem& item : unit.items) {
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            Source s;
            s.src.cont = a;
            s.defs = {a->lhs};
            std::vector<std::string> refs;
            collect_refs(a->rhs, refs);
            for (const std::string& r : refs)
                if (comb_assigned.count(r)) s.uses.insert(r);
            sources.push_back(std::move(s));
        } else {
            const ProcBlock& b = std::get<ProcBlock>(item);
            if (b.clock) {
                ts.clocked_blocks_.push_back(&b);
                continue;
            }
            std::set<std::string> must = must_assign(b.body);
            for (const std::string& d : assigned_signals(b.body))
                if (!must.count(d))
                    throw UnsupportedConstruct(b.span, "latch inferred for '" + d + "'");
            Source s;
            s.src.block = &b;
            for (const std::string& d : assigned_signals(b.body)) s.defs.insert(d);
            std::map<std::string, std::set<std::string>> deps;
            collect_guard_deps(b.body, {}, deps);
            for (const auto& [lhs, rhs] : deps)
                for (const std::string& r : rhs)
                    if (comb_assigned.count(r) && !s.defs.count(r)) s.uses.insert(r);
            sources.push_back(std::move(s));
        }
    }
    std::vector<bool> placed(sources.size(), false);
    std::set<std::string> ready;
    for (std::size_t round = 0; round < sources.size(); ++round) {
        bool progress = false;
        for (std::size_t i = 0; i < sources.size(); ++i) {
            if (placed[i]) continue;
            bool ok = true;
            for (const std::string& u : sources[i].uses)
                if (!ready.count(u)) ok = false;
            if (!ok) continue;
            placed[i] = true;
            ts.comb_order_.push_back(sources[i].src);
            ready.insert(sources[i].defs.begin(), sources[i].defs.end());
            progress = true;
        }
        if (!progress) break;
    }
    for (std::size_t i = 0; i < sources.size(); ++i)
        if (!placed[i]) throw UnsupportedConstruct(unit.span, "combinational cycle");

    // annotation lookups
    for (std::size_t i = 0; i < ts.targets_.size(); ++i) {
        const CoverageTarget& t = ts.targets_[i];
        auto idx = static_cast<std::uint16_t>(i);
        if (t.cont) {
            ts.cont_target_[t.cont] = idx;
        } else if (t.kind == TargetKind::Statement) {
            ts.stmt_target_[t.stmt] = idx;
        } else if (t.construct && t.construct->kind == Stmt::Kind::If) {
            if (t.implicit_arm || (t.construct->has_else && t.stmt == &t.construct->sub[1]))
                ts.else_target_[t.construct] = idx;
            else
                ts.then_target_[t.construct] = idx;
        } else if (t.construct) { // case arm
            auto& vec = ts.case_arm_targets_[t.construct];
            if (vec.size() < t.construct->arms.size())
                vec.assign(t.construct->arms.size(), 0xffff);
            if (t.implicit_arm)
                ts.implicit_default_[t.construct] = idx;
            else
                vec[static_cast<std::size_t>(t.arm_index)] = idx;
        }
    }

    for (const std::string& text : config.assumes)
        ts.assume_exprs_.push_back(parse_expr_text(text, false));
    for (const Expr& e : ts.assume_exprs_) {
        std::vector<std::string> refs;
        collect_refs(e, refs);
        for (const std::string& r : refs)
            if (!ts.var_refs_.count(r)) throw UnknownSignal(r);
    }

    // initial states: reset-assigned registers pinned, the rest free
    std::map<std::string, std::uint64_t> reset_values;
    for (const ProcBlock* b : ts.clocked_blocks_) {
        if (!b->reset) continue;
        const Stmt* top = &b->body;
        while (top->kind == Stmt::Kind::Block && !top->sub.empty()) top = &top->sub[0];
        if (top->kind != Stmt::Kind::If) continue;
        const Expr* g = &top->cond;
        bool negated = false;
        while (g->kind == Expr::Kind::Unary && (g->name == "!" || g->name == "~")) {
            negated = !negated;
            g = &g->args[0];
        }
        if (g->kind != Expr::Kind::Ref || g->name != b->reset->signal) continue;
        bool guard_true_means_active = negated == b->reset->active_low;
        const Stmt* reset_arm = nullptr;
        if (guard_true_means_active)
            reset_arm = &top->sub[0];
        else if (top->has_else)
            reset_arm = &top->sub[1];
        if (!reset_arm) continue;
        const Stmt* scan = reset_arm;
        std::vector<const Stmt*> stack{scan};
        while (!stack.empty()) {
            const Stmt* s = stack.back();
            stack.pop_back();
            if (s->kind == Stmt::Kind::Assign && s->rhs.kind == Expr::Kind::Literal)
                reset_values[s->lhs] = mask_bits(s->rhs.value, table.width_of(s->lhs));
            if (s->kind == Stmt::Kind::Block)
                for (const Stmt& c : s->sub) stack.push_back(&c);
        }
    }
    std::vector<const TransitionSystem::Var*> free_vars;
    std::uint64_t fixed = 0;
    for (const auto& v : ts.state_vars_) {
        auto it = reset_values.find(v.name);
        if (it != reset_values.end())
            fixed |= it->second << v.offset;
        else
            free_vars.push_back(&v);
    }
    int free_bits = 0;
    for (const auto* v : free_vars) free_bits += v->width;
    if (free_bits > 20)
        throw StateBudgetExceeded("unconstrained initial state space", free_bits, 20);
    for (std::uint64_t c = 0; c < (1ull << free_bits); ++c) {
        std::uint64_t s = fixed;
        int shift = 0;
        for (const auto* v : free_vars) {
            s |= mask_bits(c >> shift, v->width) << v->offset;
            shift += v->width;
        }
        ts.init_states_.push_back(s);
    }
    return ts;
}

Frame TransitionSystem::evaluate(std::uint64_t state, std::uint64_t input) const {
    FrameBuilder b(*this, state, input);
    return b.build();
}

bool TransitionSystem::transition_allowed(const Frame& f) const {
    for (const Expr& e : assume_exprs_)
        if (eval_on_frame(e, f, nullptr) == 0) return false;
    return true;
}

ReachResult TransitionSystem::explore(int depth_bound) const {
    ReachResult r;
    std::vector<std::uint64_t> frontier;
    for (std::uint64_t s : init_states_) {
        if (r.depth.count(s)) continue;
        r.depth[s] = 0;
        r.order.push_back(s);
        frontier.push_back(s);
    }
    const std::uint64_t input_count = 1ull << input_bits_;
    int depth = 0;
    while (!frontier.empty() && depth < depth_bound) {
        std::vector<std::uint64_t> next_frontier;
        for (std::uint64_t s : frontier) {
            for (std::uint64_t i = 0; i < input_count; ++i) {
                Frame f = evaluate(s, i);
                if (!transition_allowed(f)) continue;
                if (r.depth.count(f.next)) continue;
                r.depth[f.next] = depth + 1;
                r.parent[f.next] = {s, i};
                r.order.push_back(f.next);
                next_frontier.push_back(f.next);
            }
        }
        frontier = std::move(next_frontier);
        ++depth;
    }
    r.complete = frontier.empty();
    r.max_depth = depth;
    return r;
}

std::set<std::string> TransitionSystem::cone_of_influence(
    const std::vector<std::string>& roots) const {
    std::map<std::string, std::set<std::string>> deps;
    for (const ModuleItem& item : unit_->items) {
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            std::vector<std::string> refs;
            collect_refs(a->rhs, refs);
            deps[a->lhs].insert(refs.begin(), refs.end());
        } else {
            collect_guard_deps(std::get<ProcBlock>(item).body, {}, deps);
        }
    }
    std::set<std::string> cone;
    std::vector<std::string> work = roots;
    while (!work.empty()) {
        std::string s = work.back();
        work.pop_back();
        if (!cone.insert(s).second) continue;
        auto it = deps.find(s);
        if (it != deps.end())
            for (const std::string& d : it->second) work.push_back(d);
    }
    return cone;
}

std::map<std::string, std::uint64_t> TransitionSystem::unpack_state(std::uint64_t bits) const {
    std::map<std::string, std::uint64_t> out;
    for (const auto& v : state_vars_) out[v.name] = mask_bits(bits >> v.offset, v.width);
    return out;
}

std::map<std::string, std::uint64_t> TransitionSystem::unpack_input(std::uint64_t bits) const {
    std::map<std::string, std::uint64_t> out;
    for (const auto& v : input_vars_) out[v.name] = mask_bits(bits >> v.offset, v.width);
    return out;
}

// ---- property checking ----

class PropertyChecker {
public:
    PropertyChecker(const TransitionSystem& ts, const ReachResult& reach, const SvaProperty& prop)
        : ts_(ts), reach_(reach), prop_(prop) {
        ante_ = parse_expr_text(prop.antecedent, true);
        cons_ = parse_expr_text(prop.consequent, true);
        if (!prop.disable_expr.empty()) disable_ = parse_expr_text(prop.disable_expr, false);
        check_refs(ante_);
        check_refs(cons_);
        if (disable_) check_refs(*disable_);
        cons_needs_inputs_ = refs_inputs(cons_, /*under_past=*/false);
    }

    ProofStatus run(int depth_bound) {
        ProofStatus st;
        st.depth_reached = reach_.max_depth;
        const std::uint64_t input_count = 1ull << ts_.input_bits();

        for (std::uint64_t s : reach_.order) {
            for (std::uint64_t i = 0; i < input_count; ++i) {
                Frame f = ts_.evaluate(s, i);
                if (!ts_.transition_allowed(f)) continue;
                if (disable_ && ts_.eval_on_frame(*disable_, f, nullptr) != 0) continue;
                if (ts_.eval_on_frame(ante_, f, nullptr) == 0) continue;

                if (prop_.kind == PropertyKind::Cover) {
                    if (witness_from(f)) {
                        st.verdict = ProofStatus::Verdict::Proven;
                        return st;
                    }
                    continue;
                }
                if (!holds_from(f, s, i, st)) {
                    st.verdict = ProofStatus::Verdict::Falsified;
                    return st;
                }
            }
        }
        if (prop_.kind == PropertyKind::Cover) {
            st.verdict = ProofStatus::Verdict::Undetermined; // no reachable witness
            return st;
        }
        st.verdict = reach_.complete ? ProofStatus::Verdict::Proven
                                     : ProofStatus::Verdict::Undetermined;
        (void)depth_bound;
        return st;
    }

    /// Attribution predicate: the property's check engages this transition.
    bool active_on(const Frame& f) const {
        if (disable_ && ts_.eval_on_frame(*disable_, f, nullptr) != 0) return false;
        return ts_.eval_on_frame(ante_, f, nullptr) != 0;
    }

private:
    const TransitionSystem& ts_;
    const ReachResult& reach_;
    const SvaProperty& prop_;
    Expr ante_, cons_;
    std::optional<Expr> disable_;
    bool cons_needs_inputs_ = false;

    void check_refs(const Expr& e) {
        std::vector<std::string> refs;
        collect_refs(e, refs);
        for (const std::string& r : refs)
            if (!ts_.knows_signal(r)) throw UnknownSignal(r);
    }

    // whether evaluation at the consequent cycle depends on that cycle's input
    bool refs_inputs(const Expr& e, bool under_past) const {
        if (e.kind == Expr::Kind::Past) return false; // reads the source frame
        if (e.kind == Expr::Kind::Ref && !under_past) {
            int w = 0;
            (void)w;
            if (!ts_.knows_signal(e.name)) return false;
            // comb values depend on inputs in general
            for (const auto& v : ts_.input_vars())
                if (v.name == e.name) return true;
            for (const auto& v : ts_.comb_vars())
                if (v.name == e.name) return true;
        }
        for (const Expr& a : e.args)
            if (refs_inputs(a, under_past)) return true;
        return false;
    }

    int steps() const {
        if (prop_.op == ImplOp::Overlap) return 0;
        if (prop_.op == ImplOp::Nonoverlap) return 1;
        return prop_.delay;
    }

    bool holds_from(const Frame& f0, std::uint64_t s0, std::uint64_t i0, ProofStatus& st) {
        int n = steps();
        if (n == 0) {
            if (ts_.eval_on_frame(cons_, f0, nullptr) != 0) return true;
            st.cex = build_trace(s0, i0, {});
            return false;
        }
        std::vector<std::pair<std::uint64_t, std::uint64_t>> walk;
        return holds_rec(f0, f0.next, n, walk, s0, i0, st);
    }

    // Every allowed, non-aborted path of `remaining` transitions must satisfy
    // the consequent at its end. An input-independent consequent has the same
    // value on every non-disabled input there, so the first one decides.
    bool holds_rec(const Frame& prev, std::uint64_t state, int remaining,
                   std::vector<std::pair<std::uint64_t, std::uint64_t>>& walk, std::uint64_t s0,
                   std::uint64_t i0, ProofStatus& st) {
        const std::uint64_t input_count = 1ull << ts_.input_bits();
        bool needs_all = remaining > 1 || cons_needs_inputs_;
        for (std::uint64_t j = 0; j < input_count; ++j) {
            Frame f = ts_.evaluate(state, j);
            if (!ts_.transition_allowed(f)) continue;
            if (disable_ && ts_.eval_on_frame(*disable_, f, nullptr) != 0) continue;
            if (remaining == 1) {
                if (ts_.eval_on_frame(cons_, f, &prev) == 0) {
                    walk.push_back({state, j});
                    st.cex = build_trace(s0, i0, walk);
                    walk.pop_back();
                    return false;
                }
                if (!needs_all) return true; // verdict is input-independent
            } else {
                walk.push_back({state, j});
                bool ok = holds_rec(f, f.next, remaining - 1, walk, s0, i0, st);
                walk.pop_back();
                if (!ok) return false;
            }
        }
        return true;
    }

    bool witness_from(const Frame& f0) {
        int n = steps();
        if (n == 0) return ts_.eval_on_frame(cons_, f0, nullptr) != 0;
        return witness_rec(f0, f0.next, n);
    }

    bool witness_rec(const Frame& prev, std::uint64_t state, int remaining) {
        const std::uint64_t input_count = 1ull << ts_.input_bits();
        for (std::uint64_t j = 0; j < input_count; ++j) {
            Frame f = ts_.evaluate(state, j);
            if (!ts_.transition_allowed(f)) continue;
            if (disable_ && ts_.eval_on_frame(*disable_, f, nullptr) != 0) continue;
            if (remaining == 1) {
                if (ts_.eval_on_frame(cons_, f, &prev) != 0) return true;
            } else if (witness_rec(f, f.next, remaining - 1)) {
                return true;
            }
        }
        return false;
    }

    std::vector<TraceStep> build_trace(
        std::uint64_t s0, std::uint64_t i0,
        const std::vector<std::pair<std::uint64_t, std::uint64_t>>& walk) {
        std::vector<std::pair<std::uint64_t, std::uint64_t>> chain;
        std::uint64_t cur = s0;
        while (true) {
            auto it = reach_.parent.find(cur);
            if (it == reach_.parent.end()) break;
            chain.push_back({it->second.first, it->second.second});
            cur = it->second.first;
        }
        std::reverse(chain.begin(), chain.end());
        chain.push_back({s0, i0});
        for (const auto& w : walk) chain.push_back(w);
        std::vector<TraceStep> trace;
        for (const auto& [s, i] : chain) {
            TraceStep step;
            step.state = ts_.unpack_state(s);
            step.input = ts_.unpack_input(i);
            trace.push_back(std::move(step));
        }
        return trace;
    }
};

ProofStatus check_property(const TransitionSystem& ts, const ReachResult& reach,
                           const SvaProperty& prop, int depth_bound) {
    PropertyChecker checker(ts, reach, prop);
    return checker.run(depth_bound);
}

CoverageReport measure_coverage(const TransitionSystem& ts, const ReachResult& reach,
                                const std::vector<SvaProperty>& props,
                                const std::vector<ProofStatus>& statuses, int iteration,
                                bool exclude_unreachable) {
    const std::vector<CoverageTarget>& targets = ts.targets();
    std::vector<bool> executed(targets.size(), false);
    std::vector<bool> covered(targets.size(), false);

    struct ActiveProp {
        std::unique_ptr<PropertyChecker> checker;
        std::set<std::string> cone;
    };
    std::vector<ActiveProp> proven;
    for (std::size_t i = 0; i < props.size() && i < statuses.size(); ++i) {
        if (!statuses[i].proven()) continue;
        ActiveProp a;
        a.checker = std::make_unique<PropertyChecker>(ts, reach, props[i]);
        std::vector<std::string> roots;
        Expr ante = parse_expr_text(props[i].antecedent, true);
        Expr cons = parse_expr_text(props[i].consequent, true);
        collect_refs(ante, roots);
        collect_refs(cons, roots);
        if (!props[i].disable_expr.empty()) {
            Expr dis = parse_expr_text(props[i].disable_expr, false);
            collect_refs(dis, roots);
        }
        a.cone = ts.cone_of_influence(roots);
        proven.push_back(std::move(a));
    }

    const std::uint64_t input_count = 1ull << ts.input_bits();
    for (std::uint64_t s : reach.order) {
        for (std::uint64_t i = 0; i < input_count; ++i) {
            Frame f = ts.evaluate(s, i);
            if (!ts.transition_allowed(f)) continue;
            std::vector<bool> active(proven.size());
            bool any_active = false;
            for (std::size_t p = 0; p < proven.size(); ++p) {
                active[p] = proven[p].checker->active_on(f);
                any_active |= active[p];
            }
            for (std::uint16_t t : f.executed) {
                executed[t] = true;
                if (!any_active || covered[t]) continue;
                for (std::size_t p = 0; p < proven.size() && !covered[t]; ++p) {
                    if (!active[p]) continue;
                    for (const std::string& sig : targets[t].driven) {
                        if (proven[p].cone.count(sig)) {
                            covered[t] = true;
                            break;
                        }
                    }
                }
            }
        }
    }

    CoverageReport report;
    report.design = ts.unit().name;
    report.iteration = iteration;
    for (std::size_t t = 0; t < targets.size(); ++t) {
        ReportEntry e;
        e.id = targets[t].id;
        e.kind = targets[t].kind;
        e.span = targets[t].span;
        e.status = !executed[t] ? TargetStatus::Unreachable
                                : covered[t] ? TargetStatus::Covered : TargetStatus::Uncovered;
        report.targets.push_back(std::move(e));
    }
    report.coverage_pct = compute_coverage(report, exclude_unreachable);
    return report;
}

// ---- backends ----

namespace {

class BuiltinBackend final : public FormalBackend {
public:
    BuiltinBackend(EngineConfig config, bool exclude_unreachable, int jobs)
        : config_(config), exclude_unreachable_(exclude_unreachable), jobs_(jobs < 1 ? 1 : jobs) {}

    std::vector<ProofStatus> prove(const DesignUnit& unit,
                                   const std::vector<SvaProperty>& props) override {
        ensure(unit);
        std::vector<ProofStatus> out(props.size());
        if (jobs_ == 1 || props.size() < 2) {
            for (std::size_t i = 0; i < props.size(); ++i)
                out[i] = check_property(*ts_, reach_, props[i], config_.depth_bound);
            return out;
        }
        std::vector<std::future<ProofStatus>> futures;
        futures.reserve(props.size());
        for (std::size_t i = 0; i < props.size(); ++i)
            futures.push_back(std::async(std::launch::async, [this, &props, i] {
                return check_property(*ts_, reach_, props[i], config_.depth_bound);
            }));
        for (std::size_t i = 0; i < props.size(); ++i) out[i] = futures[i].get();
        return out;
    }

    CoverageReport measure(const DesignUnit& unit, const std::vector<SvaProperty>& props,
                           const std::vector<ProofStatus>& statuses, int iteration) override {
        ensure(unit);
        return measure_coverage(*ts_, reach_, props, statuses, iteration, exclude_unreachable_);
    }

private:
    EngineConfig config_;
    bool exclude_unreachable_;
    int jobs_;
    const DesignUnit* cached_ = nullptr;
    std::optional<TransitionSystem> ts_;
    ReachResult reach_;

    void ensure(const DesignUnit& unit) {
        if (cached_ == &unit) return;
        SignalTable table = resolve_signals(unit);
        std::vector<CoverageTarget> targets = enumerate_targets(unit, table);
        ts_.emplace(elaborate(unit, table, std::move(targets), config_));
        reach_ = ts_->explore(config_.depth_bound);
        cached_ = &unit;
    }
};

class ReplayBackend final : public FormalBackend {
public:
    explicit ReplayBackend(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw SchemaError("", "cannot open recording '" + path + "'");
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("", std::string("invalid recording JSON: ") + e.what());
        }
        if (!j.is_array()) throw SchemaError("", "recording must be an array of iterations");
        int idx = 0;
        for (const auto& entry : j) {
            std::string where = "/" + std::to_string(idx++);
            Record rec;
            rec.report = report_from_json(entry, where);
            if (entry.contains("proofs")) {
                if (!entry["proofs"].is_object())
                    throw SchemaError(where + "/proofs", "expected an object");
                for (const auto& [name, verdict] : entry["proofs"].items())
                    rec.proofs[name] = verdict_from_string(verdict.get<std::string>());
            }
            records_.push_back(std::move(rec));
        }
    }

    std::vector<ProofStatus> prove(const DesignUnit&,
                                   const std::vector<SvaProperty>& props) override {
        const Record& rec = current();
        std::vector<ProofStatus> out;
        for (const SvaProperty& p : props) {
            ProofStatus st;
            auto it = rec.proofs.find(p.name);
            // a name absent from the recording stays undetermined; replay
            // never invents a verdict
            if (it != rec.proofs.end()) st.verdict = it->second;
            out.push_back(st);
        }
        return out;
    }

    CoverageReport measure(const DesignUnit&, const std::vector<SvaProperty>&,
                           const std::vector<ProofStatus>&, int iteration) override {
        const Record& rec = current();
        ++cursor_;
        CoverageReport r = rec.report;
        r.iteration = iteration;
        return r;
    }

private:
    struct Record {
        CoverageReport report;
        std::map<std::string, ProofStatus::Verdict> proofs;
    };
    std::vector<Record> records_;
    std::size_t cursor_ = 0;

    const Record& current() const {
        if (cursor_ >= records_.size()) throw RecordingExhausted(static_cast<int>(records_.size()));
        return records_[cursor_];
    }
};

} // namespace

std::unique_ptr<FormalBackend> make_builtin_backend(const EngineConfig& config,
                                                    bool exclude_unreachable, int jobs) {
    return std::make_unique<BuiltinBackend>(config, exclude_unreachable, jobs);
}

std::unique_ptr<FormalBackend> make_replay_backend(const std::string& recording_path) {
    return std::make_unique<ReplayBackend>(recording_path);
}

} // namespace covloop
