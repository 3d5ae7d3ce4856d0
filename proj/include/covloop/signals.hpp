// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "covloop/ast.hpp"

namespace covloop {

enum class SignalKind { Reg, Wire };

struct SignalInfo {
    std::optional<PortDirection> direction; // nullopt = module-local
    int width = 1;
    int msb = 0;
    int lsb = 0;
    SignalKind kind = SignalKind::Wire;
};

/// Resolved view of a unit: every referenced identifier maps to a declaration.
struct SignalTable {
    std::map<std::string, SignalInfo> signals;
    std::map<std::string, std::int64_t> params;

    bool has(const std::string& name) const {
        return signals.count(name) > 0 || params.count(name) > 0;
    }
    const SignalInfo* find(const std::string& name) const {
        auto it = signals.find(name);
        return it == signals.end() ? nullptr : &it->second;
    }
    int width_of(const std::string& name) const {
        const SignalInfo* s = find(name);
        return s ? s->width : 32;
    }

    std::vector<std::string> inputs() const;
    std::vector<std::string> outputs() const;
};

/// Builds the signal table and checks that every identifier referenced by the
/// unit is declared (UndeclaredSignal otherwise).
SignalTable resolve_signals(const DesignUnit& unit);

/// All identifiers referenced by an expression, in first-appearance order.
std::vector<std::string> referenced_signals(const Expr& e);
void collect_refs(const Expr& e, std::vector<std::string>& out);

/// Signals assigned anywhere inside a statement tree, in first-assign order.
std::vector<std::string> assigned_signals(const Stmt& s);

} // namespace covloop
