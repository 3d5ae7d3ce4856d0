// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "covloop/analyzer.hpp"
#include "covloop/signals.hpp"

namespace covloop {

enum class PropertyKind { Assert, Cover };
enum class ImplOp { Overlap, Nonoverlap, OverlapDelay };

std::string to_string(ImplOp op);

struct PropertyTrace {
    std::string file;
    std::vector<SourceSpan> locations;
    int iteration = 0;
};

/// One single-statement property: exactly one implication, one outcome.
struct SvaProperty {
    std::string name;
    PropertyKind kind = PropertyKind::Assert;
    std::string clock_expr;   // "@(posedge clk)" or a `MACRO, empty for unclocked
    std::string disable_expr; // reset-active expression, empty for none
    std::string antecedent;
    ImplOp op = ImplOp::Nonoverlap;
    int delay = 1; // cycles for OverlapDelay
    std::string consequent;
    PropertyTrace trace;
};

struct SvaMacro {
    std::string name;
    std::string body;
};

struct SvaParameter {
    std::string name;
    std::string value;
};

struct ExistingProperty {
    std::string name;
    std::string normalized_body;
};

/// Inventory of what the SVA file (plus the design) makes available.
struct SvaResources {
    std::vector<std::string> signals;
    std::vector<SvaMacro> macros;
    std::vector<SvaParameter> parameters;
    std::vector<ExistingProperty> existing_properties;

    bool has_signal(const std::string& n) const;
    bool has_macro(const std::string& n) const;
    bool has_parameter(const std::string& n) const;
    bool has_property_name(const std::string& n) const;
    bool identifier_available(const std::string& n) const;

    /// Adds the design's signals and parameters to the inventory.
    void add_design(const SignalTable& table);
};

/// Scans an SVA file for signals, macros, parameters and property blocks.
/// Idempotent; raises SvaParseError on malformed blocks.
SvaResources scan_resources(const std::string& sva_text);

/// Full parse of the property blocks in an SVA file (macros expanded) into
/// checkable SvaProperty values.
std::vector<SvaProperty> parse_sva_properties(const std::string& sva_text);

/// Whitespace-collapsed, parenthesis-canonicalized body text used for
/// duplicate detection. Covers and asserts never collide.
std::string normalize_property_body(const SvaProperty& p);
std::string normalize_body_text(const std::string& kind, const std::string& clock,
                                const std::string& disable, const std::string& body);

/// Validates the single-statement rules: one implication, single-outcome
/// consequent, and every identifier available in the resources. Throws
/// UnavailableSignal / SvaParseError on violation.
void validate_property(const SvaProperty& p, const SvaResources& res);

struct GenerateOptions {
    bool emit_cover = false; // reachability witness on BRANCH contexts
    int delay_cycles = 1;    // N for the |-> ##N form
};

/// Template instantiation per timing class: clocked nonblocking updates get
/// `(pre) |=> (lhs == $past(rhs))`, combinational logic gets
/// `(pre) |-> (lhs == rhs)`.
std::vector<SvaProperty> generate_property(const HoleContext& ctx, const SvaResources& res,
                                           const GenerateOptions& opts = {});

/// Drops properties whose normalized body already exists, then assigns fresh
/// collision-free names `p_<slug>_<suffix>` from a seeded generator.
std::vector<SvaProperty> name_and_dedup(std::vector<SvaProperty> props, const SvaResources& res,
                                        std::uint64_t seed);

/// Appends named properties with their traceability comments. Existing
/// content is untouched; the result reparses cleanly.
std::string merge_into_file(const std::string& sva_text, const std::vector<SvaProperty>& props);

std::string render_property(const SvaProperty& p);

struct ImplicationParts {
    std::string antecedent;
    ImplOp op = ImplOp::Nonoverlap;
    int delay = 1;
    std::string consequent;
};

/// Splits `ante |-> [##N] cons` (used by review edits and response parsing).
ImplicationParts parse_implication(const std::string& body);

} // namespace covloop
