// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "covloop/coverage.hpp"
#include "covloop/sva.hpp"

namespace covloop {

struct EngineConfig {
    int state_budget = 24;  // total register bits
    int input_budget = 16;  // total free input bits per cycle
    int depth_bound = 64;   // BFS depth; an emptied frontier upgrades to proven
    std::vector<std::string> assumes; // environment constraints over signals
};

struct TraceStep {
    std::map<std::string, std::uint64_t> state;
    std::map<std::string, std::uint64_t> input;
};

struct ProofStatus {
    enum class Verdict { Proven, Falsified, Undetermined };

    Verdict verdict = Verdict::Undetermined;
    int depth_reached = 0;
    std::vector<TraceStep> cex; // for Falsified: inputs drive each step, the
                                // property is violated at the final step

    bool proven() const { return verdict == Verdict::Proven; }
};

std::string to_string(ProofStatus::Verdict v);
ProofStatus::Verdict verdict_from_string(const std::string& s);

/// One evaluated transition: source state and input, derived combinational
/// values, successor state, and the coverage targets the transition executes.
struct Frame {
    std::uint64_t state = 0;
    std::uint64_t input = 0;
    std::vector<std::uint64_t> comb;
    std::uint64_t next = 0;
    std::vector<std::uint16_t> executed;
};

struct ReachResult {
    std::vector<std::uint64_t> order; // discovery order (deterministic)
    std::unordered_map<std::uint64_t, int> depth;
    std::unordered_map<std::uint64_t, std::pair<std::uint64_t, std::uint64_t>> parent;
    bool complete = false; // frontier emptied before the depth bound
    int max_depth = 0;
};

/// Explicit-state model of one design unit: registers become packed state
/// bits, non-clock input ports become free input bits, and combinational
/// logic is evaluated per transition. `$past` values come from the source
/// frame of each transition rather than from materialized history registers,
/// which keeps the reachable state count equal to the register state count.
class TransitionSystem {
public:
    struct Var {
        std::string name;
        int width = 1;
        int offset = 0; // bit offset into the packed word
    };

    const DesignUnit& unit() const { return *unit_; }
    const std::vector<Var>& state_vars() const { return state_vars_; }
    const std::vector<Var>& input_vars() const { return input_vars_; }
    const std::vector<Var>& comb_vars() const { return comb_vars_; }
    int state_bits() const { return state_bits_; }
    int input_bits() const { return input_bits_; }
    const std::vector<std::uint64_t>& init_states() const { return init_states_; }
    const std::vector<CoverageTarget>& targets() const { return targets_; }
    const SignalTable& table() const { return table_; }

    Frame evaluate(std::uint64_t state, std::uint64_t input) const;
    bool transition_allowed(const Frame& f) const; // environment assumptions

    ReachResult explore(int depth_bound) const;

    // Width-aware expression evaluation. Every operator result is masked to
    // the width of its widest operand; there is no context widening.
    using ReadFn = std::function<std::uint64_t(const std::string&)>;
    using PastFn = std::function<std::uint64_t(const Expr&)>;
    int width_of_signal(const std::string& name) const;
    int expr_width(const Expr& e) const;
    std::uint64_t eval(const Expr& e, const ReadFn& read, const PastFn& past) const;
    std::uint64_t read_frame(const Frame& f, const std::string& name) const;
    std::uint64_t eval_on_frame(const Expr& e, const Frame& cur, const Frame* past) const;
    bool knows_signal(const std::string& name) const;

    /// Transitive fan-in closure over the assignment dependency graph.
    std::set<std::string> cone_of_influence(const std::vector<std::string>& roots) const;

    std::map<std::string, std::uint64_t> unpack_state(std::uint64_t bits) const;
    std::map<std::string, std::uint64_t> unpack_input(std::uint64_t bits) const;

private:
    friend TransitionSystem elaborate(const DesignUnit&, const SignalTable&,
                                      std::vector<CoverageTarget>, const EngineConfig&);

    enum class VarClass { State, Input, Comb, Param };
    struct VarRef {
        VarClass cls = VarClass::Param;
        int offset = 0;
        int width = 1;
        int comb_index = -1;
        std::uint64_t param_value = 0;
    };

    const DesignUnit* unit_ = nullptr;
    SignalTable table_;
    std::vector<CoverageTarget> targets_;
    EngineConfig config_;

    std::vector<Var> state_vars_, input_vars_, comb_vars_;
    int state_bits_ = 0, input_bits_ = 0;
    std::vector<std::uint64_t> init_states_;
    std::unordered_map<std::string, VarRef> var_refs_;

    // combinational sources in evaluation order
    struct CombSource {
        const ContinuousAssign* cont = nullptr;
        const ProcBlock* block = nullptr;
    };
    std::vector<CombSource> comb_order_;
    std::vector<const ProcBlock*> clocked_blocks_;

    // target annotation lookup
    std::unordered_map<const void*, std::uint16_t> stmt_target_, cont_target_;
    std::unordered_map<const void*, std::uint16_t> then_target_, else_target_, implicit_default_;
    std::unordered_map<const void*, std::vector<std::uint16_t>> case_arm_targets_;

    std::vector<Expr> assume_exprs_;

    friend class FrameBuilder;
    friend class PropertyChecker;
};

TransitionSystem elaborate(const DesignUnit& unit, const SignalTable& table,
                           std::vector<CoverageTarget> targets, const EngineConfig& config = {});

/// Breadth-first proof of a single property against the reachable space.
/// A cover returns Proven exactly when a reachable witness satisfies it.
ProofStatus check_property(const TransitionSystem& ts, const ReachResult& reach,
                           const SvaProperty& prop, int depth_bound);

/// A target is UNREACHABLE when no reachable transition executes it, COVERED
/// when some reachable transition both executes it and has a proven property
/// active on it whose cone of influence reaches a driven signal.
CoverageReport measure_coverage(const TransitionSystem& ts, const ReachResult& reach,
                                const std::vector<SvaProperty>& props,
                                const std::vector<ProofStatus>& statuses, int iteration,
                                bool exclude_unreachable);

/// Proof backend abstraction: the builtin explicit-state engine or a replay
/// of recorded reports from an external tool.
class FormalBackend {
public:
    virtual ~FormalBackend() = default;
    virtual std::vector<ProofStatus> prove(const DesignUnit& unit,
                                           const std::vector<SvaProperty>& props) = 0;
    virtual CoverageReport measure(const DesignUnit& unit, const std::vector<SvaProperty>& props,
                                   const std::vector<ProofStatus>& statuses, int iteration) = 0;
};

std::unique_ptr<FormalBackend> make_builtin_backend(const EngineConfig& config,
                                                    bool exclude_unreachable, int jobs = 1);
std::unique_ptr<FormalBackend> make_replay_backend(const std::string& recording_path);

} // namespace covloop
