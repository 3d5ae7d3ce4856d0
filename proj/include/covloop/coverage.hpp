// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "covloop/ast.hpp"
#include "covloop/signals.hpp"

namespace covloop {

enum class TargetKind { Statement, Branch };
enum class TargetStatus { Covered, Uncovered, Unreachable };

std::string to_string(TargetKind k);
std::string to_string(TargetStatus s);

/// One coverage target: a statement (every assignment) or a branch arm
/// (if/else arms and case arms, including implicit ones).
struct CoverageTarget {
    std::string id;
    TargetKind kind = TargetKind::Statement;
    SourceSpan span;

    struct Enclosing {
        std::string module;
        std::string timing;     // always_ff | always_comb | always | assign
        std::string block_kind; // if | case | always | assign
    } enclosing;

    Expr path_condition; // conjunction of branch guards from block root

    // Analysis anchors (non-owning; valid while the DesignUnit lives).
    const Stmt* stmt = nullptr;              // assign node, or arm body
    const Stmt* construct = nullptr;         // enclosing If/Case for branch targets
    const ProcBlock* block = nullptr;        // nullptr for continuous assigns
    const ContinuousAssign* cont = nullptr;  // set for continuous assigns
    bool implicit_arm = false;               // implicit else / implicit default
    int arm_index = -1;                      // case arm position, -1 for if arms
    bool in_control_flow = false;            // any enclosing If/Case

    /// Signals this target drives; for implicit arms, the signals the
    /// enclosing construct drives.
    std::vector<std::string> driven;
};

struct ReportEntry {
    std::string id;
    TargetKind kind = TargetKind::Statement;
    SourceSpan span;
    TargetStatus status = TargetStatus::Uncovered;
};

struct CoverageReport {
    std::string design;
    int iteration = 0;
    std::vector<ReportEntry> targets;
    double coverage_pct = 0.0;

    const ReportEntry* find(const std::string& id) const {
        for (const auto& t : targets)
            if (t.id == id) return &t;
        return nullptr;
    }
};

/// Enumerates one STATEMENT target per assignment and one BRANCH target per
/// if/case arm. Implicit else/default arms attach to the construct's span; an
/// implicit default is only materialized when the labels do not already cover
/// the full subject range.
std::vector<CoverageTarget> enumerate_targets(const DesignUnit& unit, const SignalTable& table);

/// COVERED / (total - UNREACHABLE if excluded, else total) * 100.
/// An empty denominator reports 100 by convention.
double compute_coverage(const CoverageReport& report, bool exclude_unreachable);

CoverageReport read_report(const std::string& path);
CoverageReport report_from_json(const nlohmann::json& j, const std::string& where);
void write_report(const CoverageReport& report, const std::string& path);
nlohmann::ordered_json report_to_json(const CoverageReport& report);

/// Adapter for a line-oriented external tool export: rows are matched by kind
/// and span against the enumerated target set; unmatched rows are errors.
CoverageReport report_from_vtool(const nlohmann::json& j,
                                 const std::vector<CoverageTarget>& targets,
                                 const std::string& design);

} // namespace covloop
