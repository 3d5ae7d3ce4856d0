// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
//
// Exhaustive-enumeration oracle for the builtin engine. Written as a separate
// implementation path on purpose: string-keyed environments instead of packed
// state words, full state-space enumeration with a fixpoint instead of BFS,
// and its own recursive evaluator. Test code only.
#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "covloop/ast.hpp"
#include "covloop/formal.hpp"
#include "covloop/parser.hpp"
#include "covloop/signals.hpp"
#include "covloop/sva.hpp"

namespace oracle {

using Env = std::map<std::string, std::uint64_t>;

inline std::uint64_t omask(std::uint64_t v, int w) {
    return (w <= 0 || w >= 64) ? v : (v & ((1ull << w) - 1));
}

struct Design {
    const covloop::DesignUnit* unit = nullptr;
    covloop::SignalTable table;
    std::vector<std::string> regs; // clocked-assigned, declaration order
    std::vector<std::string> ins;  // input ports minus clocks
    std::vector<std::string> combs;
};

inline Design analyze_design(const covloop::DesignUnit& unit) {
    Design d;
    d.unit = &unit;
    d.table = covloop::resolve_signals(unit);
    std::set<std::string> clocks, clocked, comb;
    for (const covloop::ModuleItem& item : unit.items) {
        if (const auto* a = std::get_if<covloop::ContinuousAssign>(&item)) {
            comb.insert(a->lhs);
        } else {
            const auto& b = std::get<covloop::ProcBlock>(item);
            auto assigned = covloop::assigned_signals(b.body);
            if (b.clock) {
                clocks.insert(b.clock->signal);
                clocked.insert(assigned.begin(), assigned.end());
            } else {
                comb.insert(assigned.begin(), assigned.end());
            }
        }
    }
    for (const auto& [name, info] : d.table.signals) {
        if (clocked.count(name)) d.regs.push_back(name);
        if (comb.count(name)) d.combs.push_back(name);
        if (info.direction == covloop::PortDirection::In && !clocks.count(name))
            d.ins.push_back(name);
    }
    return d;
}

// ---- expression evaluation (same width rule, fresh code) ----

inline int owidth(const Design& d, const covloop::Expr& e);

inline int owidth_ref(const Design& d, const std::string& name) {
    if (d.table.params.count(name)) return 32;
    const covloop::SignalInfo* s = d.table.find(name);
    return s ? s->width : 32;
}

inline int owidth(const Design& d, const covloop::Expr& e) {
    using K = covloop::Expr::Kind;
    switch (e.kind) {
        case K::Ref: return owidth_ref(d, e.name);
        case K::Literal: return e.width ? e.width : 32;
        case K::Unary: {
            const std::string& op = e.name;
            if (op == "~" || op == "-" || op == "+") return owidth(d, e.args[0]);
            return 1;
        }
        case K::Binary: {
            const std::string& op = e.name;
            if (op == "&&" || op == "||" || op == "==" || op == "!=" || op == "<" ||
                op == "<=" || op == ">" || op == ">=")
                return 1;
            if (op == "<<" || op == ">>") return owidth(d, e.args[0]);
            int a = owidth(d, e.args[0]), b = owidth(d, e.args[1]);
            return a > b ? a : b;
        }
        case K::Ternary: {
            int a = owidth(d, e.args[1]), b = owidth(d, e.args[2]);
            return a > b ? a : b;
        }
        case K::Concat: {
            int w = 0;
            for (const auto& a : e.args) w += owidth(d, a);
            return w > 64 ? 64 : w;
        }
        case K::Repeat: return 64;
        case K::Select: return e.args.size() > 2 ? 32 : 1;
        case K::Past: return owidth(d, e.args[0]);
    }
    return 32;
}

inline std::uint64_t oeval(const Design& d, const covloop::Expr& e, const Env& env,
                           const Env* past) {
    using K = covloop::Expr::Kind;
    switch (e.kind) {
        case K::Ref: {
            auto p = d.table.params.find(e.name);
            if (p != d.table.params.end()) return static_cast<std::uint64_t>(p->second);
            auto it = env.find(e.name);
            if (it == env.end()) throw std::runtime_error("oracle: unknown signal " + e.name);
            return it->second;
        }
        case K::Literal: return omask(e.value, e.width ? e.width : 64);
        case K::Past:
            if (!past) throw std::runtime_error("oracle: $past with no history");
            return oeval(d, e.args[0], *past, nullptr);
        case K::Unary: {
            std::uint64_t v = oeval(d, e.args[0], env, past);
            int w = owidth(d, e.args[0]);
            std::uint64_t all = w >= 64 ? ~0ull : ((1ull << w) - 1);
            if (e.name == "!") return v == 0;
            if (e.name == "~") return omask(~v, w);
            if (e.name == "-") return omask(~v + 1, w);
            if (e.name == "+") return v;
            if (e.name == "&") return (v & all) == all;
            if (e.name == "|") return v != 0;
            if (e.name == "~&") return (v & all) != all;
            if (e.name == "~|") return v == 0;
            int pop = 0;
            for (std::uint64_t x = v; x; x &= x - 1) ++pop;
            if (e.name == "^") return pop % 2;
            return 1 - pop % 2;
        }
        case K::Binary: {
            const std::string& op = e.name;
            std::uint64_t a = oeval(d, e.args[0], env, past);
            if (op == "&&") return a && oeval(d, e.args[1], env, past);
            if (op == "||") return a || oeval(d, e.args[1], env, past);
            std::uint64_t b = oeval(d, e.args[1], env, past);
            int w = owidth(d, e);
            if (op == "==") return a == b;
            if (op == "!=") return a != b;
            if (op == "<") return a < b;
            if (op == "<=") return a <= b;
            if (op == ">") return a > b;
            if (op == ">=") return a >= b;
            if (op == "+") return omask(a + b, w);
            if (op == "-") return omask(a - b, w);
            if (op == "*") return omask(a * b, w);
            if (op == "/") return b ? omask(a / b, w) : 0;
            if (op == "%") return b ? omask(a % b, w) : 0;
            if (op == "&") return omask(a & b, w);
            if (op == "|") return omask(a | b, w);
            if (op == "^") return omask(a ^ b, w);
            if (op == "~^") return omask(~(a ^ b), w);
            if (op == "<<") return b >= 64 ? 0 : omask(a << b, w);
            if (op == ">>") return b >= 64 ? 0 : a >> b;
            throw std::runtime_error("oracle: operator " + op);
        }
        case K::Ternary:
            return oeval(d, e.args[0], env, past) ? oeval(d, e.args[1], env, past)
                                                  : oeval(d, e.args[2], env, past);
        case K::Concat: {
            std::uint64_t v = 0;
            for (const auto& a : e.args)
                v = (v << owidth(d, a)) | omask(oeval(d, a, env, past), owidth(d, a));
            return v;
        }
        case K::Repeat: {
            std::uint64_t n = oeval(d, e.args[0], env, past);
            int w = owidth(d, e.args[1]);
            std::uint64_t body = omask(oeval(d, e.args[1], env, past), w);
            std::uint64_t v = 0;
            for (std::uint64_t i = 0; i < n && i < 64; ++i) v = (v << w) | body;
            return v;
        }
        case K::Select: {
            std::uint64_t base = oeval(d, e.args[0], env, past);
            std::uint64_t msb = oeval(d, e.args[1], env, past);
            if (e.args.size() > 2) {
                std::uint64_t lsb = oeval(d, e.args[2], env, past);
                return omask(base >> lsb, static_cast<int>(msb - lsb + 1));
            }
            return (base >> msb) & 1;
        }
    }
    return 0;
}

// ---- execution ----

struct Executed {
    std::set<const void*> assigns;                      // Stmt* / ContinuousAssign*
    std::set<std::pair<const void*, int>> arms;         // (construct, arm key)
    // arm keys: if-then = -1, if-else/implicit-else = -2,
    // case arm = parser index, implicit default = #arms
};

inline void oexec(const Design& d, const covloop::Stmt& s, Env& env, Env* next, Executed* ex) {
    using SK = covloop::Stmt::Kind;
    switch (s.kind) {
        case SK::Block:
            for (const auto& c : s.sub) oexec(d, c, env, next, ex);
            break;
        case SK::Assign: {
            std::uint64_t v = omask(oeval(d, s.rhs, env, nullptr), owidth_ref(d, s.lhs));
            if (next) {
                (*next)[s.lhs] = v;
                if (!s.nonblocking) env[s.lhs] = v;
            } else {
                env[s.lhs] = v;
            }
            if (ex) ex->assigns.insert(&s);
            break;
        }
        case SK::If:
            if (oeval(d, s.cond, env, nullptr)) {
                if (ex) ex->arms.insert({&s, -1});
                oexec(d, s.sub[0], env, next, ex);
            } else {
                if (ex) ex->arms.insert({&s, -2});
                if (s.has_else) oexec(d, s.sub[1], env, next, ex);
            }
            break;
        case SK::Case: {
            int w = owidth(d, s.subject);
            std::uint64_t subj = omask(oeval(d, s.subject, env, nullptr), w);
            int default_arm = -1;
            for (std::size_t i = 0; i < s.arms.size(); ++i) {
                if (s.arms[i].is_default) {
                    default_arm = static_cast<int>(i);
                    continue;
                }
                for (const auto& l : s.arms[i].labels) {
                    std::uint64_t lv = omask(oeval(d, l, env, nullptr), w);
                    bool hit;
                    if (s.casez && l.kind == covloop::Expr::Kind::Literal && l.wildcard) {
                        std::uint64_t care = omask(~l.wildcard, w);
                        hit = (subj & care) == (lv & care);
                    } else {
                        hit = subj == lv;
                    }
                    if (hit) {
                        if (ex) ex->arms.insert({&s, static_cast<int>(i)});
                        oexec(d, s.sub[s.arms[i].body_index], env, next, ex);
                        return;
                    }
                }
            }
            if (default_arm >= 0) {
                if (ex) ex->arms.insert({&s, default_arm});
                oexec(d, s.sub[s.arms[static_cast<std::size_t>(default_arm)].body_index], env,
                      next, ex);
            } else if (ex) {
                ex->arms.insert({&s, static_cast<int>(s.arms.size())});
            }
            break;
        }
    }
}

// full cycle evaluation: derives comb values, returns the next register env
inline Env ostep(const Design& d, const Env& state, const Env& input, Env* full_env = nullptr,
                 Executed* ex = nullptr) {
    Env env = state;
    for (const auto& [k, v] : input) env[k] = v;
    for (const std::string& c : d.combs) env[c] = 0;
    // iterate comb sources to a fixpoint (designs are cycle-free)
    for (std::size_t round = 0; round < d.combs.size() + 1; ++round) {
        Executed* rec = (round == d.combs.size() || d.combs.empty()) ? ex : nullptr;
        for (const covloop::ModuleItem& item : d.unit->items) {
            if (const auto* a = std::get_if<covloop::ContinuousAssign>(&item)) {
                env[a->lhs] = omask(oeval(d, a->rhs, env, nullptr), owidth_ref(d, a->lhs));
                if (rec) rec->assigns.insert(a);
            } else {
                const auto& b = std::get<covloop::ProcBlock>(item);
                if (!b.clock) oexec(d, b.body, env, nullptr, rec);
            }
        }
        if (d.combs.empty()) break;
    }
    Env next = state;
    for (const covloop::ModuleItem& item : d.unit->items) {
        if (const auto* b = std::get_if<covloop::ProcBlock>(&item)) {
            if (b->clock) {
                Env scratch = env;
                oexec(d, b->body, scratch, &next, ex);
            }
        }
    }
    if (full_env) *full_env = env;
    return next;
}

// ---- state enumeration ----

inline std::vector<Env> enumerate_envs(const Design& d, const std::vector<std::string>& names) {
    std::vector<Env> out;
    int bits = 0;
    for (const std::string& n : names) bits += owidth_ref(d, n);
    if (bits > 24) throw std::runtime_error("oracle: enumeration too large");
    for (std::uint64_t v = 0; v < (1ull << bits); ++v) {
        Env e;
        int shift = 0;
        for (const std::string& n : names) {
            int w = owidth_ref(d, n);
            e[n] = omask(v >> shift, w);
            shift += w;
        }
        out.push_back(std::move(e));
    }
    return out;
}

inline std::vector<Env> all_states(const Design& d) { return enumerate_envs(d, d.regs); }
inline std::vector<Env> all_inputs(const Design& d) { return enumerate_envs(d, d.ins); }

// Registers whose reset value is pinned: probe the design with the reset
// forced active from two opposite corners; registers that land on the same
// value both times are reset-pinned.
inline Env reset_pins(const Design& d) {
    const covloop::ProcBlock* reset_block = nullptr;
    for (const covloop::ModuleItem& item : d.unit->items)
        if (const auto* b = std::get_if<covloop::ProcBlock>(&item))
            if (b->clock && b->reset) reset_block = b;
    if (!reset_block) return {};
    std::uint64_t active = reset_block->reset->active_low ? 0 : 1;

    auto probe = [&](std::uint64_t fill) {
        Env state, input;
        for (const std::string& r : d.regs) state[r] = omask(fill, owidth_ref(d, r));
        for (const std::string& i : d.ins) input[i] = omask(fill, owidth_ref(d, i));
        input[reset_block->reset->signal] = active;
        return ostep(d, state, input);
    };
    Env a = probe(0), b = probe(~0ull);
    Env pins;
    for (const std::string& r : d.regs)
        if (a[r] == b[r]) pins[r] = a[r];
    return pins;
}

inline std::vector<Env> init_states(const Design& d) {
    Env pins = reset_pins(d);
    std::vector<Env> out;
    for (const Env& s : all_states(d)) {
        bool ok = true;
        for (const auto& [k, v] : pins)
            if (s.at(k) != v) ok = false;
        if (ok) out.push_back(s);
    }
    return out;
}

inline std::string env_key(const Env& e) {
    std::string k;
    for (const auto& [n, v] : e) k += n + "=" + std::to_string(v) + ";";
    return k;
}

inline std::vector<Env> reachable_states(const Design& d) {
    std::vector<Env> inputs = all_inputs(d);
    std::vector<Env> frontier = init_states(d);
    std::set<std::string> seen;
    std::vector<Env> out;
    for (const Env& s : frontier)
        if (seen.insert(env_key(s)).second) out.push_back(s);
    frontier = out;
    while (!frontier.empty()) {
        std::vector<Env> next_frontier;
        for (const Env& s : frontier) {
            for (const Env& i : inputs) {
                Env n = ostep(d, s, i);
                if (seen.insert(env_key(n)).second) {
                    out.push_back(n);
                    next_frontier.push_back(n);
                }
            }
        }
        frontier = std::move(next_frontier);
    }
    return out;
}

// ---- property semantics ----

struct PropExprs {
    covloop::Expr ante, cons;
    bool has_disable = false;
    covloop::Expr disable;
    covloop::ImplOp op = covloop::ImplOp::Nonoverlap;
    int delay = 1;
    bool is_cover = false;
};

inline PropExprs prop_exprs(const covloop::SvaProperty& p) {
    PropExprs x;
    x.ante = covloop::parse_expr_text(p.antecedent, true);
    x.cons = covloop::parse_expr_text(p.consequent, true);
    if (!p.disable_expr.empty()) {
        x.has_disable = true;
        x.disable = covloop::parse_expr_text(p.disable_expr, false);
    }
    x.op = p.op;
    x.delay = p.delay;
    x.is_cover = p.kind == covloop::PropertyKind::Cover;
    return x;
}

inline bool opath_holds(const Design& d, const PropExprs& x, const Env& prev_full,
                        const Env& state, int remaining, const std::vector<Env>& inputs,
                        bool existential) {
    for (const Env& i : inputs) {
        Env full;
        Env next = ostep(d, state, i, &full);
        if (x.has_disable && oeval(d, x.disable, full, nullptr)) continue;
        bool end_ok;
        if (remaining == 1)
            end_ok = oeval(d, x.cons, full, &prev_full) != 0;
        else
            end_ok = opath_holds(d, x, full, next, remaining - 1, inputs, existential);
        if (existential && end_ok) return true;
        if (!existential && !end_ok) return false;
    }
    return !existential;
}

inline covloop::ProofStatus::Verdict overdict(const Design& d, const covloop::SvaProperty& p) {
    PropExprs x = prop_exprs(p);
    std::vector<Env> inputs = all_inputs(d);
    int n = x.op == covloop::ImplOp::Overlap ? 0
            : x.op == covloop::ImplOp::Nonoverlap ? 1 : x.delay;
    bool witnessed = false;
    for (const Env& s : reachable_states(d)) {
        for (const Env& i : inputs) {
            Env full;
            Env next = ostep(d, s, i, &full);
            if (x.has_disable && oeval(d, x.disable, full, nullptr)) continue;
            if (!oeval(d, x.ante, full, nullptr)) continue;
            if (x.is_cover) {
                bool hit = n == 0 ? oeval(d, x.cons, full, nullptr) != 0
                                  : opath_holds(d, x, full, next, n, inputs, true);
                if (hit) witnessed = true;
            } else {
                bool ok = n == 0 ? oeval(d, x.cons, full, nullptr) != 0
                                 : opath_holds(d, x, full, next, n, inputs, false);
                if (!ok) return covloop::ProofStatus::Verdict::Falsified;
            }
            if (witnessed) break;
        }
        if (witnessed) break;
    }
    if (x.is_cover)
        return witnessed ? covloop::ProofStatus::Verdict::Proven
                         : covloop::ProofStatus::Verdict::Undetermined;
    return covloop::ProofStatus::Verdict::Proven;
}

// Replays an engine counterexample: consecutive steps must follow the step
// function and the property must be violated at the end of the trace.
inline bool replays_to_violation(const Design& d, const covloop::SvaProperty& p,
                                 const std::vector<covloop::TraceStep>& trace) {
    if (trace.empty()) return false;
    PropExprs x = prop_exprs(p);
    // trace[0] must start in an initial state
    Env pins = reset_pins(d);
    for (const auto& [k, v] : pins) {
        auto it = trace[0].state.find(k);
        if (it == trace[0].state.end() || it->second != v) return false;
    }
    std::vector<Env> fulls;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        Env state(trace[k].state.begin(), trace[k].state.end());
        Env input(trace[k].input.begin(), trace[k].input.end());
        Env full;
        Env next = ostep(d, state, input, &full);
        fulls.push_back(full);
        if (k + 1 < trace.size()) {
            Env want(trace[k + 1].state.begin(), trace[k + 1].state.end());
            if (next != want) return false;
        }
    }
    std::size_t last = trace.size() - 1;
    const Env& final_full = fulls[last];
    if (x.has_disable && oeval(d, x.disable, final_full, nullptr)) return false;
    if (x.op == covloop::ImplOp::Overlap) {
        return oeval(d, x.ante, final_full, nullptr) != 0 &&
               oeval(d, x.cons, final_full, nullptr) == 0;
    }
    int n = x.op == covloop::ImplOp::Nonoverlap ? 1 : x.delay;
    if (trace.size() < static_cast<std::size_t>(n) + 1) return false;
    std::size_t ante_at = last - static_cast<std::size_t>(n);
    if (x.has_disable && oeval(d, x.disable, fulls[ante_at], nullptr)) return false;
    if (oeval(d, x.ante, fulls[ante_at], nullptr) == 0) return false;
    return oeval(d, x.cons, final_full, &fulls[last - 1]) == 0;
}

} // namespace oracle
