// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "covloop/formal.hpp"
#include "covloop/llm.hpp"

namespace covloop {

enum class HilMode { Interactive, QueueFile, AutoApprove };
enum class ClosureOutcome { SignedOff, ThresholdMet, Escalated, Stalled };

std::string to_string(HilMode m);
std::string to_string(ClosureOutcome o);

struct BackendSpec {
    enum class Kind { Builtin, Replay };
    Kind kind = Kind::Builtin;
    std::string replay_path;
};

struct ClosureConfig {
    double coverage_threshold = 100.0; // percent, (0, 100]
    int max_iterations = 5;
    HilMode hil_mode = HilMode::AutoApprove;
    BackendSpec backend;
    std::uint64_t seed = 0;

    bool exclude_unreachable = false;
    bool enable_generation = true;
    EngineConfig engine;
    GenerationBackend generation;
    GenerateOptions gen_opts;
    std::string reset_pattern = "^(rst|reset)";
    int jobs = 1;

    std::string queue_dir = ".";
    int hil_timeout_ms = 60'000;
    std::istream* hil_in = nullptr;  // interactive prompts (defaults to stdin)
    std::ostream* hil_out = nullptr; // defaults to stdout

    void validate() const; // ConfigError on out-of-range values
};

struct HilDecision {
    enum class Kind { Approve, Reject, Edit, Pending };
    std::string property_name;
    Kind kind = Kind::Approve;
    std::string new_body; // Edit: replacement implication text
    std::string note;     // why a property stayed pending
};

std::string to_string(HilDecision::Kind k);

struct IterationRecord {
    int iteration = 0;
    double coverage_pct = 0.0;
    std::vector<std::string> new_properties;                // merged this iteration
    std::vector<std::pair<std::string, std::string>> proofs; // name → verdict
    std::vector<HilDecision> hil;
    std::vector<std::string> fallbacks; // contexts where the LLM path fell back
};

struct ClosureState {
    std::vector<IterationRecord> history;
    ClosureOutcome outcome = ClosureOutcome::Escalated;
    std::vector<SvaProperty> pending;          // unresolved review queue at exit
    std::vector<std::string> generated_names;  // every approved, merged property
    std::map<std::string, std::string> last_verdicts;
    CoverageReport final_report;
    std::string final_sva;
    std::string design;
};

struct KpiReport {
    int num_properties = 0;
    double proven_pct = 100.0;
    double coverage_pct = 0.0;
};

/// prove → measure → stop on threshold, else analyze → consolidate →
/// generate → review → merge → repeat. Bounded by max_iterations; an
/// iteration that merges nothing while coverage stands still stalls early.
ClosureState run_closure(const std::vector<std::string>& design_files,
                         const std::string& sva_path, const ClosureConfig& config);

/// Review checkpoint over freshly generated properties. Edits are re-validated
/// before acceptance; a failed edit leaves the property pending.
std::vector<HilDecision> hil_checkpoint(const std::vector<SvaProperty>& pending, HilMode mode,
                                        const SvaResources& res, const ClosureConfig& config,
                                        int iteration);

/// Proven percentage over every property generated across the run;
/// UNDETERMINED never counts as proven. Zero generated reports 100.
KpiReport compute_kpis(const ClosureState& state);

nlohmann::ordered_json manifest_to_json(const ClosureConfig& config, const ClosureState& state);

struct BenchRow {
    std::string design;
    std::string config_name; // "baseline" or "with_generation"
    int num_properties = 0;
    double proven_pct = 100.0;
    double coverage_pct = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    std::string error;
};

struct BenchTable {
    std::vector<BenchRow> rows;
    std::string render_text() const;
    nlohmann::ordered_json to_json() const;
};

/// Runs every corpus design with generation disabled and enabled and tabulates
/// properties, proven rate, coverage, iterations and wall time. Per-design
/// failures are recorded and the run continues.
BenchTable benchmark(const std::string& corpus_dir, const ClosureConfig& base_config);

} // namespace covloop
