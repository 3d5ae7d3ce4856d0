// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include "covloop/errors.hpp"
#include "covloop/orchestrator.hpp"
#include "covloop/parser.hpp"
#include "support/oracle.hpp"
#include "support/paths.hpp"

using namespace covloop;

namespace {

namespace fs = std::filesystem;

ClosureConfig base_config() {
    ClosureConfig cfg;
    cfg.coverage_threshold = 100.0;
    cfg.max_iterations = 5;
    cfg.hil_mode = HilMode::AutoApprove;
    cfg.seed = 11;
    return cfg;
}

std::string temp_file(const std::string& name, const std::string& content) {
    std::string path = (fs::temp_directory_path() / name).string();
    std::ofstream out(path);
    out << content;
    return path;
}

SvaResources resources_for(const std::string& design_path, const std::string& sva_text = "") {
    std::vector<DesignUnit> units =
        parse_source(testpaths::slurp(design_path), design_path);
    SvaResources res = scan_resources(sva_text);
    res.add_design(resolve_signals(units[0]));
    return res;
}

} // namespace

TEST_CASE("a design covered at iteration zero signs off without generating") {
    // pre-cover the selector with both branch properties
    std::string sva =
        "property p_d1;\n  @(posedge clk)\n  (a && b) |=> (c == $past(d1));\nendproperty\n"
        "assert property (p_d1);\n"
        "property p_d2;\n  @(posedge clk)\n  (!(a && b)) |=> (c == $past(d2));\nendproperty\n"
        "assert property (p_d2);\n";
    std::string sva_path = temp_file("covloop_signoff.sva", sva);
    ClosureState state = run_closure({testpaths::corpus("selector.v")}, sva_path, base_config());
    CHECK(state.outcome == ClosureOutcome::SignedOff);
    CHECK(state.history.size() == 1);
    CHECK(state.generated_names.empty());
    CHECK(state.final_report.coverage_pct == doctest::Approx(100.0));
    std::remove(sva_path.c_str());
}

TEST_CASE("selector closes from an empty SVA file within two iterations") {
    ClosureState state = run_closure({testpaths::corpus("selector.v")}, "", base_config());
    CHECK(state.outcome == ClosureOutcome::ThresholdMet);
    CHECK(state.history.size() <= 2);
    CHECK(state.final_report.coverage_pct == doctest::Approx(100.0));

    // oracle confirms both statement targets are genuinely exercised: every
    // merged property proves under exhaustive enumeration
    std::vector<DesignUnit> units = parse_source(
        testpaths::slurp(testpaths::corpus("selector.v")), "selector.v");
    oracle::Design d = oracle::analyze_design(units[0]);
    std::vector<SvaProperty> merged = parse_sva_properties(state.final_sva);
    CHECK(merged.size() == 2);
    for (const SvaProperty& p : merged)
        CHECK(oracle::overdict(d, p) == ProofStatus::Verdict::Proven);
}

TEST_CASE("dead code stays unreachable and the loop stalls instead of spinning") {
    ClosureState state = run_closure({testpaths::data("deadcode.v")}, "", base_config());
    CHECK(state.outcome == ClosureOutcome::Stalled);
    CHECK(state.history.size() <= 3); // well under the cap; no identical iterations burned
    int unreachable = 0;
    for (const ReportEntry& e : state.final_report.targets)
        unreachable += e.status == TargetStatus::Unreachable ? 1 : 0;
    CHECK(unreachable == 2);
    CHECK(state.final_report.coverage_pct < 100.0);

    // excluding unreachable targets closes the remainder
    ClosureConfig cfg = base_config();
    cfg.exclude_unreachable = true;
    ClosureState excl = run_closure({testpaths::data("deadcode.v")}, "", cfg);
    CHECK(excl.outcome == ClosureOutcome::ThresholdMet);
    CHECK(excl.final_report.coverage_pct == doctest::Approx(100.0));
}

TEST_CASE("the iteration cap escalates with the pending queue attached") {
    // a replay backend that never improves coverage forces the cap
    std::vector<DesignUnit> units = parse_source(
        testpaths::slurp(testpaths::corpus("selector.v")), "selector.v");
    SignalTable table = resolve_signals(units[0]);
    std::vector<CoverageTarget> targets = enumerate_targets(units[0], table);
    nlohmann::ordered_json rec = nlohmann::ordered_json::array();
    for (int i = 0; i < 6; ++i) {
        CoverageReport r;
        r.design = "selector";
        r.iteration = i;
        for (const CoverageTarget& t : targets)
            r.targets.push_back({t.id, t.kind, t.span, TargetStatus::Uncovered});
        // tick coverage by a hair so the stall detector stays quiet
        r.coverage_pct = 0.001 * i;
        nlohmann::ordered_json entry = report_to_json(r);
        entry["proofs"] = nlohmann::ordered_json::object();
        rec.push_back(entry);
    }
    std::string rec_path = temp_file("covloop_flat.json", rec.dump(2));
    ClosureConfig cfg = base_config();
    cfg.backend.kind = BackendSpec::Kind::Replay;
    cfg.backend.replay_path = rec_path;
    cfg.max_iterations = 4;
    ClosureState state = run_closure({testpaths::corpus("selector.v")}, "", cfg);
    CHECK(state.outcome == ClosureOutcome::Escalated);
    CHECK(state.history.size() == 4); // never exceeds the cap
    std::remove(rec_path.c_str());
}

TEST_CASE("a two-iteration recording drives exactly two loop turns") {
    std::vector<DesignUnit> units = parse_source(
        testpaths::slurp(testpaths::corpus("selector.v")), "selector.v");
    SignalTable table = resolve_signals(units[0]);
    std::vector<CoverageTarget> targets = enumerate_targets(units[0], table);
    auto report_at = [&](int iteration, bool done) {
        CoverageReport r;
        r.design = "selector";
        r.iteration = iteration;
        for (const CoverageTarget& t : targets)
            r.targets.push_back(
                {t.id, t.kind, t.span, done ? TargetStatus::Covered : TargetStatus::Uncovered});
        r.coverage_pct = done ? 100.0 : 0.0;
        return report_to_json(r);
    };
    nlohmann::ordered_json rec = nlohmann::ordered_json::array();
    nlohmann::ordered_json first = report_at(0, false);
    first["proofs"] = nlohmann::ordered_json::object();
    rec.push_back(first);
    nlohmann::ordered_json second = report_at(1, true);
    second["proofs"] = nlohmann::ordered_json::object();
    rec.push_back(second);
    std::string rec_path = temp_file("covloop_two_iter.json", rec.dump(2));

    ClosureConfig cfg = base_config();
    cfg.backend.kind = BackendSpec::Kind::Replay;
    cfg.backend.replay_path = rec_path;
    ClosureState state = run_closure({testpaths::corpus("selector.v")}, "", cfg);
    CHECK(state.history.size() == 2);
    CHECK(state.outcome == ClosureOutcome::ThresholdMet);
    std::remove(rec_path.c_str());
}

TEST_CASE("a replayed report with unknown target ids aborts cleanly") {
    CoverageReport r;
    r.design = "selector";
    r.iteration = 0;
    r.targets.push_back({"nonsense:id", TargetKind::Statement, {1, 1, 1, 2},
                         TargetStatus::Uncovered});
    r.coverage_pct = 0.0;
    nlohmann::ordered_json entry = report_to_json(r);
    entry["proofs"] = nlohmann::ordered_json::object();
    nlohmann::ordered_json rec = nlohmann::ordered_json::array();
    rec.push_back(entry);
    std::string rec_path = temp_file("covloop_unknown.json", rec.dump(2));
    ClosureConfig cfg = base_config();
    cfg.backend.kind = BackendSpec::Kind::Replay;
    cfg.backend.replay_path = rec_path;
    CHECK_THROWS_AS(run_closure({testpaths::corpus("selector.v")}, "", cfg), UnknownTarget);
    std::remove(rec_path.c_str());
}

TEST_CASE("auto-approve records one approval per pending property") {
    SvaResources res = resources_for(testpaths::corpus("selector.v"));
    std::vector<SvaProperty> pending(3);
    for (int i = 0; i < 3; ++i) {
        pending[static_cast<std::size_t>(i)].name = "p" + std::to_string(i);
        pending[static_cast<std::size_t>(i)].antecedent = "a";
        pending[static_cast<std::size_t>(i)].consequent = "c == 1'b" + std::to_string(i % 2);
    }
    std::vector<HilDecision> decisions =
        hil_checkpoint(pending, HilMode::AutoApprove, res, base_config(), 0);
    REQUIRE(decisions.size() == 3);
    for (const HilDecision& d : decisions) CHECK(d.kind == HilDecision::Kind::Approve);
}

TEST_CASE("queue-file review honors rejections") {
    ClosureConfig cfg = base_config();
    cfg.hil_mode = HilMode::QueueFile;
    cfg.queue_dir = (fs::temp_directory_path() / "covloop_queue_reject").string();
    fs::remove_all(cfg.queue_dir);
    cfg.hil_timeout_ms = 5000;

    // decisions appear while the checkpoint waits
    std::thread reviewer([&cfg] {
        std::string pending_path = cfg.queue_dir + "/pending_review_iter0.json";
        for (int i = 0; i < 200 && !fs::exists(pending_path); ++i)
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        nlohmann::json pending;
        {
            std::ifstream in(pending_path);
            in >> pending;
        }
        nlohmann::json decisions = nlohmann::json::array();
        bool first = true;
        for (const auto& p : pending["pending"]) {
            decisions.push_back({{"name", p["name"]},
                                 {"decision", first ? "REJECT" : "APPROVE"}});
            first = false;
        }
        std::ofstream out(cfg.queue_dir + "/decisions_iter0.json");
        out << nlohmann::json{{"decisions", decisions}}.dump(2);
    });

    ClosureState state = run_closure({testpaths::corpus("selector.v")}, "", cfg);
    reviewer.join();
    // the rejected property never reaches the file; the loop regenerates it
    // next iteration and the design still closes within the cap
    REQUIRE_FALSE(state.history.empty());
    bool saw_reject = false;
    for (const HilDecision& d : state.history[0].hil)
        saw_reject |= d.kind == HilDecision::Kind::Reject;
    CHECK(saw_reject);
    CHECK(state.history[0].new_properties.size() == 1); // one of two approved
    fs::remove_all(cfg.queue_dir);
}

TEST_CASE("an edit with a malformed body leaves the property pending") {
    SvaResources res = resources_for(testpaths::corpus("selector.v"));
    SvaProperty p;
    p.name = "p_edit";
    p.clock_expr = "@(posedge clk)";
    p.antecedent = "a && b";
    p.op = ImplOp::Nonoverlap;
    p.consequent = "c == $past(d1)";

    ClosureConfig cfg = base_config();
    cfg.hil_mode = HilMode::QueueFile;
    cfg.queue_dir = (fs::temp_directory_path() / "covloop_queue_edit").string();
    fs::remove_all(cfg.queue_dir);
    cfg.hil_timeout_ms = 5000;
    std::thread reviewer([&cfg] {
        std::string pending_path = cfg.queue_dir + "/pending_review_iter7.json";
        for (int i = 0; i < 200 && !fs::exists(pending_path); ++i)
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        std::ofstream out(cfg.queue_dir + "/decisions_iter7.json");
        out << R"x({"decisions": [{"name": "p_edit", "decision": "EDIT",
                   "body": "(a && b) |=> (c == $past(d1) && c == $past(d2))"}]})x";
    });
    std::vector<HilDecision> decisions =
        hil_checkpoint({p}, HilMode::QueueFile, res, cfg, 7);
    reviewer.join();
    REQUIRE(decisions.size() == 1);
    CHECK(decisions[0].kind == HilDecision::Kind::Pending);
    CHECK_FALSE(decisions[0].note.empty());
    fs::remove_all(cfg.queue_dir);

    // a valid edit passes re-validation
    ClosureConfig cfg2 = base_config();
    cfg2.hil_mode = HilMode::QueueFile;
    cfg2.queue_dir = (fs::temp_directory_path() / "covloop_queue_edit2").string();
    fs::remove_all(cfg2.queue_dir);
    cfg2.hil_timeout_ms = 5000;
    std::thread reviewer2([&cfg2] {
        std::string pending_path = cfg2.queue_dir + "/pending_review_iter7.json";
        for (int i = 0; i < 200 && !fs::exists(pending_path); ++i)
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        std::ofstream out(cfg2.queue_dir + "/decisions_iter7.json");
        out << R"x({"decisions": [{"name": "p_edit", "decision": "EDIT",
                   "body": "(a) |=> (c == $past(d1))"}]})x";
    });
    decisions = hil_checkpoint({p}, HilMode::QueueFile, res, cfg2, 7);
    reviewer2.join();
    REQUIRE(decisions.size() == 1);
    CHECK(decisions[0].kind == HilDecision::Kind::Edit);
    fs::remove_all(cfg2.queue_dir);
}

TEST_CASE("queue review times out when no decisions file appears") {
    SvaResources res = resources_for(testpaths::corpus("selector.v"));
    SvaProperty p;
    p.name = "p_wait";
    p.antecedent = "a";
    p.consequent = "c == 1'b1";
    ClosureConfig cfg = base_config();
    cfg.hil_mode = HilMode::QueueFile;
    cfg.queue_dir = (fs::temp_directory_path() / "covloop_queue_timeout").string();
    fs::remove_all(cfg.queue_dir);
    cfg.hil_timeout_ms = 150;
    CHECK_THROWS_AS(hil_checkpoint({p}, HilMode::QueueFile, res, cfg, 0), ReviewTimeout);
    fs::remove_all(cfg.queue_dir);
}

TEST_CASE("interactive review approves, rejects and edits from the stream") {
    SvaResources res = resources_for(testpaths::corpus("selector.v"));
    std::vector<SvaProperty> pending(3);
    for (int i = 0; i < 3; ++i) {
        pending[static_cast<std::size_t>(i)].name = "p" + std::to_string(i);
        pending[static_cast<std::size_t>(i)].clock_expr = "@(posedge clk)";
        pending[static_cast<std::size_t>(i)].antecedent = "a && b";
        pending[static_cast<std::size_t>(i)].consequent = "c == $past(d1)";
    }
    std::istringstream in("a\nr\ne\n(a) |=> (c == $past(d2))\n");
    std::ostringstream out;
    ClosureConfig cfg = base_config();
    cfg.hil_in = &in;
    cfg.hil_out = &out;
    std::vector<HilDecision> decisions =
        hil_checkpoint(pending, HilMode::Interactive, res, cfg, 0);
    REQUIRE(decisions.size() == 3);
    CHECK(decisions[0].kind == HilDecision::Kind::Approve);
    CHECK(decisions[1].kind == HilDecision::Kind::Reject);
    CHECK(decisions[2].kind == HilDecision::Kind::Edit);
    CHECK(decisions[2].new_body == "(a) |=> (c == $past(d2))");
}

TEST_CASE("kpi arithmetic: forty generated, thirty-six proven reports ninety percent") {
    ClosureState state;
    for (int i = 0; i < 40; ++i) {
        std::string name = "p" + std::to_string(i);
        state.generated_names.push_back(name);
        state.last_verdicts[name] = i < 36 ? "PROVEN" : "UNDETERMINED";
    }
    state.final_report.coverage_pct = 89.30;
    KpiReport kpi = compute_kpis(state);
    CHECK(kpi.num_properties == 40);
    CHECK(kpi.proven_pct == doctest::Approx(90.0));
    CHECK(kpi.coverage_pct == doctest::Approx(89.30));
}

TEST_CASE("zero generated properties report one hundred percent proven by convention") {
    ClosureState state;
    state.final_report.coverage_pct = 100.0;
    KpiReport kpi = compute_kpis(state);
    CHECK(kpi.num_properties == 0);
    CHECK(kpi.proven_pct == doctest::Approx(100.0));
}

TEST_CASE("kpis match a hand count on a corpus run") {
    ClosureState state = run_closure({testpaths::corpus("counter3.v")}, "", base_config());
    KpiReport kpi = compute_kpis(state);
    std::size_t hand_count = 0;
    int hand_proven = 0;
    for (const IterationRecord& rec : state.history) hand_count += rec.new_properties.size();
    for (const std::string& name : state.generated_names) {
        auto it = state.last_verdicts.find(name);
        if (it != state.last_verdicts.end() && it->second == "PROVEN") ++hand_proven;
    }
    CHECK(kpi.num_properties == static_cast<int>(hand_count));
    CHECK(kpi.proven_pct ==
          doctest::Approx(100.0 * hand_proven / static_cast<double>(hand_count)));
}

TEST_CASE("coverage never decreases across iterations on corpus runs") {
    for (const std::string& path : testpaths::corpus_files()) {
        CAPTURE(path);
        ClosureState state = run_closure({path}, "", base_config());
        for (std::size_t i = 1; i < state.history.size(); ++i)
            CHECK(state.history[i].coverage_pct >= state.history[i - 1].coverage_pct);
        CHECK(static_cast<int>(state.history.size()) <= 5);
    }
}

TEST_CASE("fixed seeds reproduce byte-identical SVA and manifests") {
    ClosureConfig cfg = base_config();
    cfg.seed = 1234;
    ClosureState a = run_closure({testpaths::corpus("handshake.v")}, "", cfg);
    ClosureState b = run_closure({testpaths::corpus("handshake.v")}, "", cfg);
    CHECK(a.final_sva == b.final_sva);
    CHECK(manifest_to_json(cfg, a).dump(2) == manifest_to_json(cfg, b).dump(2));
}

TEST_CASE("every merged property traces back to a generation record and an approval") {
    ClosureState state = run_closure({testpaths::corpus("fsm4.v")}, "", base_config());
    std::vector<SvaProperty> merged = parse_sva_properties(state.final_sva);
    for (const SvaProperty& p : merged) {
        bool recorded = false, approved = false;
        for (const IterationRecord& rec : state.history) {
            for (const std::string& n : rec.new_properties) recorded |= n == p.name;
            for (const HilDecision& d : rec.hil)
                approved |= d.property_name == p.name &&
                            (d.kind == HilDecision::Kind::Approve ||
                             d.kind == HilDecision::Kind::Edit);
        }
        CAPTURE(p.name);
        CHECK(recorded);
        CHECK(approved);
    }
}

TEST_CASE("config validation rejects out-of-range values") {
    ClosureConfig cfg = base_config();
    cfg.coverage_threshold = 0.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = base_config();
    cfg.coverage_threshold = 101.0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = base_config();
    cfg.max_iterations = 0;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = base_config();
    cfg.backend.kind = BackendSpec::Kind::Replay;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
}

TEST_CASE("benchmark: generation never loses to the baseline on any corpus design") {
    ClosureConfig cfg = base_config();
    BenchTable table = benchmark(std::string(COVLOOP_CORPUS_DIR), cfg);
    REQUIRE(table.rows.size() == 12); // six designs, two configs each
    for (std::size_t i = 0; i + 1 < table.rows.size(); i += 2) {
        const BenchRow& base = table.rows[i];
        const BenchRow& gen = table.rows[i + 1];
        CAPTURE(base.design);
        REQUIRE(base.error.empty());
        REQUIRE(gen.error.empty());
        CHECK(base.config_name == "baseline");
        CHECK(gen.config_name == "with_generation");
        CHECK(gen.coverage_pct >= base.coverage_pct);
    }
    // text rendering carries every design once per config
    std::string text = table.render_text();
    CHECK(text.find("selector") != std::string::npos);
    CHECK(text.find("with_generation") != std::string::npos);
}

TEST_CASE("an empty corpus benchmarks to an empty table") {
    std::string dir = (fs::temp_directory_path() / "covloop_empty_corpus").string();
    fs::create_directories(dir);
    BenchTable table = benchmark(dir, base_config());
    CHECK(table.rows.empty());
    CHECK(table.to_json().empty());
    fs::remove_all(dir);
}
