// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/signals.hpp"

#include <algorithm>

#include "covloop/errors.hpp"

namespace covloop {

namespace {

void check_expr(const Expr& e, const SignalTable& table) {
    if (e.kind == Expr::Kind::Ref && !table.has(e.name))
        throw UndeclaredSignal(e.name, e.span);
    for (const Expr& a : e.args) check_expr(a, table);
}

void check_stmt(const Stmt& s, const SignalTable& table) {
    switch (s.kind) {
        case Stmt::Kind::Assign:
            if (!table.signals.count(s.lhs)) throw UndeclaredSignal(s.lhs, s.span);
            check_expr(s.rhs, table);
            break;
        case Stmt::Kind::If: check_expr(s.cond, table); break;
        case Stmt::Kind::Case:
            check_expr(s.subject, table);
            for (const Stmt::CaseArm& arm : s.arms)
                for (const Expr& l : arm.labels) check_expr(l, table);
            break;
        case Stmt::Kind::Block: break;
    }
    for (const Stmt& c : s.sub) check_stmt(c, table);
}

void collect_assigned(const Stmt& s, std::vector<std::string>& out) {
    if (s.kind == Stmt::Kind::Assign) {
        if (std::find(out.begin(), out.end(), s.lhs) == out.end()) out.push_back(s.lhs);
    }
    for (const Stmt& c : s.sub) collect_assigned(c, out);
}

} // namespace

std::vector<std::string> SignalTable::inputs() const {
    std::vector<std::string> out;
    for (const auto& [name, info] : signals)
        if (info.direction == PortDirection::In) out.push_back(name);
    return out;
}

std::vector<std::string> SignalTable::outputs() const {
    std::vector<std::string> out;
    for (const auto& [name, info] : signals)
        if (info.direction == PortDirection::Out) out.push_back(name);
    return out;
}

SignalTable resolve_signals(const DesignUnit& unit) {
    SignalTable table;
    for (const PortDecl& p : unit.ports) {
        SignalInfo info;
        info.direction = p.direction;
        info.width = p.width;
        info.msb = p.msb;
        info.lsb = p.lsb;
        info.kind = p.is_reg ? SignalKind::Reg : SignalKind::Wire;
        table.signals[p.name] = info;
    }
    for (const NetDecl& n : unit.nets) {
        if (table.signals.count(n.name)) throw UndeclaredSignal(n.name, n.span);
        SignalInfo info;
        info.width = n.width;
        info.msb = n.msb;
        info.lsb = n.lsb;
        info.kind = n.is_reg ? SignalKind::Reg : SignalKind::Wire;
        table.signals[n.name] = info;
    }
    for (const ParamDecl& p : unit.params) table.params[p.name] = p.value;

    for (const ModuleItem& item : unit.items) {
        if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
            if (!table.signals.count(a->lhs)) throw UndeclaredSignal(a->lhs, a->span);
            check_expr(a->rhs, table);
        } else {
            const ProcBlock& b = std::get<ProcBlock>(item);
            if (b.clock && !table.signals.count(b.clock->signal))
                throw UndeclaredSignal(b.clock->signal, b.span);
            check_stmt(b.body, table);
        }
    }
    return table;
}

void collect_refs(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == Expr::Kind::Ref) {
        if (std::find(out.begin(), out.end(), e.name) == out.end()) out.push_back(e.name);
    }
    for (const Expr& a : e.args) collect_refs(a, out);
}

std::vector<std::string> referenced_signals(const Expr& e) {
    std::vector<std::string> out;
    collect_refs(e, out);
    return out;
}

std::vector<std::string> assigned_signals(const Stmt& s) {
    std::vector<std::string> out;
    collect_assigned(s, out);
    return out;
}

} // namespace covloop
