// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "covloop/coverage.hpp"

namespace covloop {

/// Canonical form of the behavior a hole represents. Two holes with equal
/// signatures would yield structurally identical properties up to renaming,
/// so the consolidation pass merges them.
struct LogicSignature {
    std::string operation_pattern; // stmt shape with signals abstracted to %n
    std::string signal_relation;   // lhs plus the ordered rhs signal list
    std::string timing_pattern;    // timing class, implication style, clock/reset flavor

    bool operator==(const LogicSignature&) const = default;
};

/// The analyzer's JSON record for one coverage hole.
struct HoleContext {
    std::string module;
    std::string input_type; // BRANCH_STRUCTURE | ISOLATED_STRUCTURE
    std::vector<SourceSpan> locations;
    std::string type; // BRANCH | STATEMENT
    std::string code; // verbatim RTL slice
    std::string behavior;
    std::string statement_type; // case_statement | if_statement | assignment
    std::vector<std::string> signals_in;
    std::vector<std::string> signals_out;
    std::string timing; // always_ff | always_comb | always | assign

    // Extension namespace (x_ keys in the emitted JSON)
    std::string precondition; // effective antecedent source text
    std::optional<ResetSpec> reset;
    std::optional<ClockSpec> clock;
    LogicSignature signature;

    // Generation support, serialized under x_generation
    std::string lhs;
    std::string rhs_text;
    bool has_assign = false;
    bool nonblocking = true;
    bool hold_semantics = false; // implicit/empty arm: assert the signal holds
    std::vector<std::string> preconditions; // member preconditions (ORed)
    std::vector<std::string> member_ids;    // target ids this context covers
};

struct HolePartition {
    std::vector<std::string> branch_or_statement; // target ids
    std::vector<std::string> isolated;
};

/// Splits the report's UNCOVERED targets into control-flow-related holes and
/// isolated holes. Ids that resolve to no enumerated target raise
/// UnknownTarget.
HolePartition classify_holes(const CoverageReport& report,
                             const std::vector<CoverageTarget>& targets);

/// Exact substring addressed by a half-open span. No normalization.
std::string extract_slice(const SourceSpan& span, const std::string& source);

/// True when a property template exists for this target. Arms that contain
/// nested control flow are covered through their constituents instead.
bool context_eligible(const CoverageTarget& target);

HoleContext derive_context(const CoverageTarget& target, const DesignUnit& unit,
                           const SignalTable& table);

/// Merges contexts with equal logic signatures; member locations accumulate
/// and preconditions join disjunctively. Output is ordered by first location.
std::vector<HoleContext> consolidate(std::vector<HoleContext> contexts);

nlohmann::ordered_json context_to_json(const HoleContext& ctx);
nlohmann::ordered_json contexts_to_json(const std::vector<HoleContext>& ctxs);
HoleContext context_from_json(const nlohmann::json& j);

/// Lowercase word-joined name fragment derived from a behavior sentence.
std::string behavior_slug(const std::string& behavior);

} // namespace covloop
