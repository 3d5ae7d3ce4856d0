// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
//
// covloop — coverage-closure driver: parse RTL, enumerate coverage targets,
// analyze holes, generate SVA properties, prove them with the builtin
// explicit-state engine, and iterate to closure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "covloop/analyzer.hpp"
#include "covloop/coverage.hpp"
#include "covloop/errors.hpp"
#include "covloop/formal.hpp"
#include "covloop/llm.hpp"
#include "covloop/orchestrator.hpp"
#include "covloop/parser.hpp"
#include "covloop/render.hpp"
#include "covloop/sva.hpp"

namespace {

namespace fs = std::filesystem;
using covloop::Error;

constexpr int kExitUsage = 64;

std::string read_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw covloop::ConfigError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void emit(const nlohmann::ordered_json& j, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream out(out_path);
        if (!out) throw covloop::ConfigError("cannot write '" + out_path + "'");
        out << j.dump(2) << "\n";
    }
}

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw covloop::ConfigError("cannot write '" + path + "'");
    out << text;
}

struct CommonOpts {
    std::string config_path;
    std::string sva;
    std::string out;
    std::string backend = "builtin";
    std::string hil = "auto";
    std::string llm_config;
    std::string reset_pattern = "^(rst|reset)";
    std::string queue_dir = ".";
    double threshold = 100.0;
    int max_iters = 5;
    std::uint64_t seed = 0;
    int jobs = 1;
    int depth = 64;
    bool exclude_unreachable = false;
    bool covers = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "JSON config file (flags override it)");
    cmd->add_option("--sva", o.sva, "SVA property file");
    cmd->add_option("--out", o.out, "output file (default stdout)");
    cmd->add_option("--threshold", o.threshold, "coverage threshold percent");
    cmd->add_option("--max-iters", o.max_iters, "closure iteration cap");
    cmd->add_option("--hil", o.hil, "review mode: interactive|queue|auto")
        ->check(CLI::IsMember({"interactive", "queue", "auto"}));
    cmd->add_option("--backend", o.backend, "builtin or replay:<recording.json>");
    cmd->add_option("--llm-config", o.llm_config, "LLM backend config (JSON)");
    cmd->add_option("--seed", o.seed, "seed for generated property names");
    cmd->add_option("--jobs", o.jobs, "intra-stage fan-out");
    cmd->add_option("--depth", o.depth, "engine depth bound");
    cmd->add_option("--reset-pattern", o.reset_pattern, "regex classifying reset signals");
    cmd->add_option("--queue-dir", o.queue_dir, "directory for queue-mode review files");
    cmd->add_flag("--exclude-unreachable", o.exclude_unreachable,
                  "drop unreachable targets from the coverage denominator");
    cmd->add_flag("--covers", o.covers, "emit cover witnesses for branch holes");
}

// flag not given on the command line → value from the config file applies
void apply_config_file(const CLI::App* cmd, CommonOpts& o) {
    if (o.config_path.empty()) return;
    nlohmann::json j;
    std::ifstream in(o.config_path);
    if (!in) throw covloop::ConfigError("cannot open config '" + o.config_path + "'");
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw covloop::ConfigError(std::string("invalid config JSON: ") + e.what());
    }
    auto unset = [&](const std::string& flag) { return cmd->count(flag) == 0; };
    if (j.contains("sva") && unset("--sva")) o.sva = j["sva"].get<std::string>();
    if (j.contains("threshold") && unset("--threshold")) o.threshold = j["threshold"].get<double>();
    if (j.contains("max_iters") && unset("--max-iters")) o.max_iters = j["max_iters"].get<int>();
    if (j.contains("hil") && unset("--hil")) o.hil = j["hil"].get<std::string>();
    if (j.contains("backend") && unset("--backend")) o.backend = j["backend"].get<std::string>();
    if (j.contains("llm_config") && unset("--llm-config"))
        o.llm_config = j["llm_config"].get<std::string>();
    if (j.contains("seed") && unset("--seed")) o.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("jobs") && unset("--jobs")) o.jobs = j["jobs"].get<int>();
    if (j.contains("depth") && unset("--depth")) o.depth = j["depth"].get<int>();
    if (j.contains("reset_pattern") && unset("--reset-pattern"))
        o.reset_pattern = j["reset_pattern"].get<std::string>();
    if (j.contains("exclude_unreachable") && unset("--exclude-unreachable"))
        o.exclude_unreachable = j["exclude_unreachable"].get<bool>();
    if (j.contains("covers") && unset("--covers")) o.covers = j["covers"].get<bool>();
}

covloop::ClosureConfig make_closure_config(const CommonOpts& o) {
    covloop::ClosureConfig cfg;
    cfg.coverage_threshold = o.threshold;
    cfg.max_iterations = o.max_iters;
    cfg.hil_mode = o.hil == "interactive" ? covloop::HilMode::Interactive
                   : o.hil == "queue"     ? covloop::HilMode::QueueFile
                                          : covloop::HilMode::AutoApprove;
    if (o.backend == "builtin") {
        cfg.backend.kind = covloop::BackendSpec::Kind::Builtin;
    } else if (o.backend.rfind("replay:", 0) == 0) {
        cfg.backend.kind = covloop::BackendSpec::Kind::Replay;
        cfg.backend.replay_path = o.backend.substr(7);
    } else {
        throw covloop::ConfigError("backend must be 'builtin' or 'replay:<path>'");
    }
    cfg.seed = o.seed;
    cfg.exclude_unreachable = o.exclude_unreachable;
    cfg.engine.depth_bound = o.depth;
    cfg.gen_opts.emit_cover = o.covers;
    cfg.reset_pattern = o.reset_pattern;
    cfg.jobs = o.jobs;
    cfg.queue_dir = o.queue_dir;
    if (!o.llm_config.empty()) {
        cfg.generation.mode = covloop::GenerationBackend::Mode::Llm;
        cfg.generation.config = covloop::llm_config_from_file(o.llm_config);
    }
    return cfg;
}

struct LoadedDesign {
    std::vector<covloop::DesignUnit> units;
    covloop::SignalTable table;
    std::vector<covloop::CoverageTarget> targets;
};

LoadedDesign load_single(const std::string& path, const std::string& reset_pattern) {
    covloop::ParseOptions popts;
    popts.reset_pattern = reset_pattern;
    LoadedDesign d;
    d.units = covloop::parse_source(read_text(path), path, popts);
    if (d.units.size() != 1)
        throw covloop::ConfigError("expected exactly one module in '" + path + "'");
    d.table = covloop::resolve_signals(d.units[0]);
    d.targets = covloop::enumerate_targets(d.units[0], d.table);
    return d;
}

nlohmann::ordered_json targets_json(const LoadedDesign& d) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const covloop::CoverageTarget& t : d.targets) {
        nlohmann::ordered_json j;
        j["id"] = t.id;
        j["kind"] = covloop::to_string(t.kind);
        j["start"] = {t.span.start_line, t.span.start_col};
        j["end"] = {t.span.end_line, t.span.end_col};
        j["module"] = t.enclosing.module;
        j["timing"] = t.enclosing.timing;
        j["block"] = t.enclosing.block_kind;
        j["path_condition"] = covloop::render_expr(t.path_condition);
        arr.push_back(std::move(j));
    }
    return arr;
}

covloop::CoverageReport measure_with_builtin(const LoadedDesign& d, const std::string& sva_text,
                                             const CommonOpts& o) {
    covloop::EngineConfig engine;
    engine.depth_bound = o.depth;
    auto backend = covloop::make_builtin_backend(engine, o.exclude_unreachable, o.jobs);
    std::vector<covloop::SvaProperty> props = covloop::parse_sva_properties(sva_text);
    std::vector<covloop::ProofStatus> statuses = backend->prove(d.units[0], props);
    return backend->measure(d.units[0], props, statuses, 0);
}

std::vector<covloop::HoleContext> analyze_design(const LoadedDesign& d,
                                                 const covloop::CoverageReport& report) {
    covloop::classify_holes(report, d.targets); // validates ids
    std::vector<covloop::HoleContext> contexts;
    for (const covloop::CoverageTarget& t : d.targets) {
        const covloop::ReportEntry* e = report.find(t.id);
        if (!e || e->status != covloop::TargetStatus::Uncovered) continue;
        if (!covloop::context_eligible(t)) continue;
        contexts.push_back(covloop::derive_context(t, d.units[0], d.table));
    }
    return covloop::consolidate(std::move(contexts));
}

nlohmann::ordered_json trace_json(const std::vector<covloop::TraceStep>& trace) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const covloop::TraceStep& step : trace) {
        nlohmann::ordered_json s;
        s["state"] = step.state;
        s["input"] = step.input;
        arr.push_back(std::move(s));
    }
    return arr;
}

int run(int argc, char** argv) {
    CLI::App app{"coverage-closure engine for formal verification"};
    app.require_subcommand(1);

    // parse
    auto* cmd_parse = app.add_subcommand("parse", "parse RTL and dump the AST as JSON");
    std::vector<std::string> parse_files;
    CommonOpts parse_opts;
    cmd_parse->add_option("files", parse_files, "RTL source files")->required();
    add_common(cmd_parse, parse_opts);

    // targets
    auto* cmd_targets = app.add_subcommand("targets", "enumerate coverage targets");
    std::string targets_file;
    CommonOpts targets_opts;
    cmd_targets->add_option("file", targets_file, "RTL source file")->required();
    add_common(cmd_targets, targets_opts);

    // report
    auto* cmd_report = app.add_subcommand("report", "validate/normalize a coverage report");
    std::string report_design, report_in, report_format = "canonical";
    CommonOpts report_opts;
    cmd_report->add_option("design", report_design, "RTL source file")->required();
    cmd_report->add_option("--in", report_in, "report file to read")->required();
    cmd_report->add_option("--format", report_format, "canonical|vtool")
        ->check(CLI::IsMember({"canonical", "vtool"}));
    add_common(cmd_report, report_opts);

    // analyze
    auto* cmd_analyze = app.add_subcommand("analyze", "derive hole contexts for uncovered targets");
    std::string analyze_file, analyze_report;
    CommonOpts analyze_opts;
    cmd_analyze->add_option("file", analyze_file, "RTL source file")->required();
    cmd_analyze->add_option("--report", analyze_report, "canonical coverage report (JSON)");
    add_common(cmd_analyze, analyze_opts);

    // generate
    auto* cmd_generate = app.add_subcommand("generate", "generate properties for coverage holes");
    std::string generate_file, generate_report;
    bool generate_merge = false;
    CommonOpts generate_opts;
    cmd_generate->add_option("file", generate_file, "RTL source file")->required();
    cmd_generate->add_option("--report", generate_report, "canonical coverage report (JSON)");
    cmd_generate->add_flag("--merge", generate_merge, "merge into the --sva file in place");
    add_common(cmd_generate, generate_opts);

    // prove
    auto* cmd_prove = app.add_subcommand("prove", "prove the SVA file against the design");
    std::string prove_file;
    CommonOpts prove_opts;
    cmd_prove->add_option("file", prove_file, "RTL source file")->required();
    add_common(cmd_prove, prove_opts);

    // close
    auto* cmd_close = app.add_subcommand("close", "run the iterative coverage-closure loop");
    std::vector<std::string> close_files;
    std::string close_manifest, close_out_sva;
    CommonOpts close_opts;
    cmd_close->add_option("files", close_files, "RTL source files")->required();
    cmd_close->add_option("--manifest", close_manifest, "write the run manifest here");
    cmd_close->add_option("--out-sva", close_out_sva, "write the final SVA file here");
    add_common(cmd_close, close_opts);

    // bench
    auto* cmd_bench = app.add_subcommand("bench", "closure with and without generation per design");
    std::string bench_dir;
    CommonOpts bench_opts;
    cmd_bench->add_option("corpus", bench_dir, "directory of .v/.sv designs")->required();
    add_common(cmd_bench, bench_opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    if (cmd_parse->parsed()) {
        apply_config_file(cmd_parse, parse_opts);
        covloop::ParseOptions popts;
        popts.reset_pattern = parse_opts.reset_pattern;
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const std::string& f : parse_files)
            for (const covloop::DesignUnit& u : covloop::parse_source(read_text(f), f, popts))
                arr.push_back(covloop::ast_to_json(u));
        emit(arr, parse_opts.out);
        return 0;
    }

    if (cmd_targets->parsed()) {
        apply_config_file(cmd_targets, targets_opts);
        LoadedDesign d = load_single(targets_file, targets_opts.reset_pattern);
        emit(targets_json(d), targets_opts.out);
        return 0;
    }

    if (cmd_report->parsed()) {
        apply_config_file(cmd_report, report_opts);
        LoadedDesign d = load_single(report_design, report_opts.reset_pattern);
        covloop::CoverageReport rep;
        if (report_format == "vtool") {
            nlohmann::json j;
            std::ifstream in(report_in);
            if (!in) throw covloop::ConfigError("cannot open '" + report_in + "'");
            in >> j;
            rep = covloop::report_from_vtool(j, d.targets, d.units[0].name);
        } else {
            rep = covloop::read_report(report_in);
        }
        rep.coverage_pct = covloop::compute_coverage(rep, report_opts.exclude_unreachable);
        emit(covloop::report_to_json(rep), report_opts.out);
        return 0;
    }

    if (cmd_analyze->parsed()) {
        apply_config_file(cmd_analyze, analyze_opts);
        LoadedDesign d = load_single(analyze_file, analyze_opts.reset_pattern);
        covloop::CoverageReport report;
        if (!analyze_report.empty()) {
            report = covloop::read_report(analyze_report);
        } else {
            std::string sva_text =
                analyze_opts.sva.empty() ? std::string() : read_text(analyze_opts.sva);
            report = measure_with_builtin(d, sva_text, analyze_opts);
        }
        emit(covloop::contexts_to_json(analyze_design(d, report)), analyze_opts.out);
        return 0;
    }

    if (cmd_generate->parsed()) {
        apply_config_file(cmd_generate, generate_opts);
        LoadedDesign d = load_single(generate_file, generate_opts.reset_pattern);
        std::string sva_text =
            generate_opts.sva.empty() ? std::string() : read_text(generate_opts.sva);
        covloop::CoverageReport report;
        if (!generate_report.empty())
            report = covloop::read_report(generate_report);
        else
            report = measure_with_builtin(d, sva_text, generate_opts);

        std::vector<covloop::HoleContext> contexts = analyze_design(d, report);
        covloop::SvaResources res = covloop::scan_resources(sva_text);
        res.add_design(d.table);
        covloop::GenerationBackend backend;
        if (!generate_opts.llm_config.empty()) {
            backend.mode = covloop::GenerationBackend::Mode::Llm;
            backend.config = covloop::llm_config_from_file(generate_opts.llm_config);
        }
        covloop::GenerateOptions gopts;
        gopts.emit_cover = generate_opts.covers;
        std::vector<covloop::SvaProperty> props;
        for (const covloop::HoleContext& ctx : contexts) {
            covloop::LlmResult r = covloop::llm_generate(ctx, res, backend, gopts);
            for (covloop::SvaProperty& p : r.properties) {
                p.trace.file = fs::path(generate_file).filename().string();
                p.trace.locations = ctx.locations;
                props.push_back(std::move(p));
            }
        }
        props = covloop::name_and_dedup(std::move(props), res, generate_opts.seed);
        std::string merged = covloop::merge_into_file(sva_text, props);
        if (generate_merge) {
            if (generate_opts.sva.empty())
                throw covloop::ConfigError("--merge needs --sva");
            write_text(merged, generate_opts.sva);
            std::cout << props.size() << " properties merged into " << generate_opts.sva << "\n";
        } else {
            std::string added = merged.substr(sva_text.size());
            if (generate_opts.out.empty())
                std::cout << added;
            else
                write_text(added, generate_opts.out);
        }
        return 0;
    }

    if (cmd_prove->parsed()) {
        apply_config_file(cmd_prove, prove_opts);
        LoadedDesign d = load_single(prove_file, prove_opts.reset_pattern);
        std::string sva_text = prove_opts.sva.empty() ? std::string() : read_text(prove_opts.sva);
        covloop::EngineConfig engine;
        engine.depth_bound = prove_opts.depth;
        auto backend =
            covloop::make_builtin_backend(engine, prove_opts.exclude_unreachable, prove_opts.jobs);
        std::vector<covloop::SvaProperty> props = covloop::parse_sva_properties(sva_text);
        std::vector<covloop::ProofStatus> statuses = backend->prove(d.units[0], props);
        covloop::CoverageReport report = backend->measure(d.units[0], props, statuses, 0);
        nlohmann::ordered_json j;
        nlohmann::ordered_json proofs = nlohmann::ordered_json::object();
        for (std::size_t i = 0; i < props.size(); ++i) {
            nlohmann::ordered_json p;
            p["verdict"] = covloop::to_string(statuses[i].verdict);
            if (statuses[i].verdict == covloop::ProofStatus::Verdict::Undetermined)
                p["depth_reached"] = statuses[i].depth_reached;
            if (!statuses[i].cex.empty()) p["cex"] = trace_json(statuses[i].cex);
            proofs[props[i].name] = std::move(p);
        }
        j["proofs"] = std::move(proofs);
        j["report"] = covloop::report_to_json(report);
        emit(j, prove_opts.out);
        return 0;
    }

    if (cmd_close->parsed()) {
        apply_config_file(cmd_close, close_opts);
        covloop::ClosureConfig cfg = make_closure_config(close_opts);
        covloop::ClosureState state = covloop::run_closure(close_files, close_opts.sva, cfg);
        covloop::KpiReport kpi = covloop::compute_kpis(state);

        std::string out_sva = close_out_sva;
        if (out_sva.empty())
            out_sva = fs::path(close_files[0]).stem().string() + "_cov.sva";
        write_text(state.final_sva, out_sva);
        nlohmann::ordered_json manifest = covloop::manifest_to_json(cfg, state);
        if (!close_manifest.empty()) write_text(manifest.dump(2) + "\n", close_manifest);

        std::cout << "design:      " << state.design << "\n"
                  << "outcome:     " << covloop::to_string(state.outcome) << "\n"
                  << "iterations:  " << state.history.size() << "\n"
                  << "properties:  " << kpi.num_properties << "\n";
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", kpi.proven_pct);
        std::cout << "proven_pct:  " << buf << "\n";
        std::snprintf(buf, sizeof buf, "%.2f", kpi.coverage_pct);
        std::cout << "coverage:    " << buf << "\n"
                  << "final SVA:   " << out_sva << "\n";
        switch (state.outcome) {
            case covloop::ClosureOutcome::SignedOff:
            case covloop::ClosureOutcome::ThresholdMet: return 0;
            case covloop::ClosureOutcome::Escalated: return 2;
            case covloop::ClosureOutcome::Stalled: return 3;
        }
        return 0;
    }

    if (cmd_bench->parsed()) {
        apply_config_file(cmd_bench, bench_opts);
        covloop::ClosureConfig cfg = make_closure_config(bench_opts);
        covloop::BenchTable table = covloop::benchmark(bench_dir, cfg);
        std::cout << table.render_text();
        if (!bench_opts.out.empty()) emit(table.to_json(), bench_opts.out);
        return 0;
    }

    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "covloop: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "covloop: internal error: " << e.what() << "\n";
        return 1;
    }
}
