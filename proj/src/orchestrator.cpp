// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "covloop/errors.hpp"
#include "covloop/parser.hpp"

namespace covloop {

namespace {

namespace fs = std::filesystem;

std::string read_text_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string file_stem_name(const std::string& path) { return fs::path(path).filename().string(); }

SvaProperty apply_edit(const SvaProperty& original, const std::string& body,
                       const SvaResources& res) {
    SvaProperty edited = original;
    try {
        ImplicationParts parts = parse_implication(body);
        edited.antecedent = parts.antecedent;
        edited.op = parts.op;
        edited.delay = parts.delay;
        edited.consequent = parts.consequent;
        validate_property(edited, res);
    } catch (const Error& e) {
        throw InvalidEdit(original.name, e.what());
    }
    return edited;
}

nlohmann::ordered_json property_to_json(const SvaProperty& p) {
    nlohmann::ordered_json j;
    j["name"] = p.name;
    j["kind"] = p.kind == PropertyKind::Cover ? "cover" : "assert";
    j["clock"] = p.clock_expr;
    j["disable"] = p.disable_expr;
    j["body"] = p.antecedent + " " + to_string(p.op) +
                (p.op == ImplOp::OverlapDelay ? " ##" + std::to_string(p.delay) : "") + " " +
                p.consequent;
    nlohmann::ordered_json locs = nlohmann::ordered_json::array();
    for (const SourceSpan& s : p.trace.locations) locs.push_back(s.str());
    j["locations"] = std::move(locs);
    return j;
}

} // namespace

std::string to_string(HilMode m) {
    switch (m) {
        case HilMode::Interactive: return "interactive";
        case HilMode::QueueFile: return "queue";
        case HilMode::AutoApprove: return "auto";
    }
    return "auto";
}

std::string to_string(ClosureOutcome o) {
    switch (o) {
        case ClosureOutcome::SignedOff: return "SIGNED_OFF";
        case ClosureOutcome::ThresholdMet: return "THRESHOLD_MET";
        case ClosureOutcome::Escalated: return "ESCALATED";
        case ClosureOutcome::Stalled: return "STALLED";
    }
    return "ESCALATED";
}

std::string to_string(HilDecision::Kind k) {
    switch (k) {
        case HilDecision::Kind::Approve: return "APPROVE";
        case HilDecision::Kind::Reject: return "REJECT";
        case HilDecision::Kind::Edit: return "EDIT";
        case HilDecision::Kind::Pending: return "PENDING";
    }
    return "APPROVE";
}

void ClosureConfig::validate() const {
    if (coverage_threshold <= 0.0 || coverage_threshold > 100.0)
        throw ConfigError("coverage threshold must lie in (0, 100]");
    if (max_iterations < 1) throw ConfigError("max iterations must be at least 1");
    if (backend.kind == BackendSpec::Kind::Replay && backend.replay_path.empty())
        throw ConfigError("replay backend needs a recording path");
    if (jobs < 1) throw ConfigError("jobs must be at least 1");
}

// ---- human-in-the-loop ----

std::vector<HilDecision> hil_checkpoint(const std::vector<SvaProperty>& pending, HilMode mode,
                                        const SvaResources& res, const ClosureConfig& config,
                                        int iteration) {
    std::vector<HilDecision> decisions;
    if (pending.empty()) return decisions;

    if (mode == HilMode::AutoApprove) {
        for (const SvaProperty& p : pending)
            decisions.push_back({p.name, HilDecision::Kind::Approve, "", ""});
        return decisions;
    }

    if (mode == HilMode::Interactive) {
        std::istream& in = config.hil_in ? *config.hil_in : std::cin;
        std::ostream& out = config.hil_out ? *config.hil_out : std::cout;
        for (const SvaProperty& p : pending) {
            out << "\n--- pending property (iteration " << iteration << ") ---\n"
                << render_property(p) << "[a]pprove / [r]eject / [e]dit > " << std::flush;
            std::string line;
            if (!std::getline(in, line)) line = "a";
            HilDecision d;
            d.property_name = p.name;
            if (!line.empty() && (line[0] == 'r' || line[0] == 'R')) {
                d.kind = HilDecision::Kind::Reject;
            } else if (!line.empty() && (line[0] == 'e' || line[0] == 'E')) {
                out << "new body (ante |-> / |=> cons) > " << std::flush;
                std::string body;
                std::getline(in, body);
                try {
                    apply_edit(p, body, res);
                    d.kind = HilDecision::Kind::Edit;
                    d.new_body = body;
                } catch (const InvalidEdit& e) {
                    out << "edit rejected: " << e.what() << "\n";
                    d.kind = HilDecision::Kind::Pending;
                    d.note = e.what();
                }
            } else {
                d.kind = HilDecision::Kind::Approve;
            }
            decisions.push_back(std::move(d));
        }
        return decisions;
    }

    // QueueFile: publish the queue, block for the decisions document.
    fs::create_directories(config.queue_dir);
    std::string pending_path =
        (fs::path(config.queue_dir) / ("pending_review_iter" + std::to_string(iteration) + ".json"))
            .string();
    std::string decisions_path =
        (fs::path(config.queue_dir) / ("decisions_iter" + std::to_string(iteration) + ".json"))
            .string();
    {
        nlohmann::ordered_json doc;
        doc["iteration"] = iteration;
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const SvaProperty& p : pending) arr.push_back(property_to_json(p));
        doc["pending"] = std::move(arr);
        std::ofstream out(pending_path);
        out << doc.dump(2) << "\n";
    }
    auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(config.hil_timeout_ms);
    while (!fs::exists(decisions_path)) {
        if (std::chrono::steady_clock::now() > deadline) throw ReviewTimeout(decisions_path);
        std::this_thread::sleep_for(std::chrono::milliseconds(25));
    }
    nlohmann::json doc;
    {
        std::ifstream in(decisions_path);
        try {
            in >> doc;
        } catch (const nlohmann::json::parse_error& e) {
            throw SchemaError("", std::string("invalid decisions JSON: ") + e.what());
        }
    }
    std::map<std::string, std::pair<std::string, std::string>> by_name; // name → (decision, body)
    if (doc.contains("decisions"))
        for (const auto& d : doc["decisions"])
            by_name[d.value("name", "")] = {d.value("decision", "APPROVE"), d.value("body", "")};
    for (const SvaProperty& p : pending) {
        HilDecision d;
        d.property_name = p.name;
        auto it = by_name.find(p.name);
        if (it == by_name.end()) {
            d.kind = HilDecision::Kind::Pending;
            d.note = "no decision recorded";
        } else if (it->second.first == "REJECT") {
            d.kind = HilDecision::Kind::Reject;
        } else if (it->second.first == "EDIT") {
            try {
                apply_edit(p, it->second.second, res);
                d.kind = HilDecision::Kind::Edit;
                d.new_body = it->second.second;
            } catch (const InvalidEdit& e) {
                d.kind = HilDecision::Kind::Pending;
                d.note = e.what();
            }
        } else {
            d.kind = HilDecision::Kind::Approve;
        }
        decisions.push_back(std::move(d));
    }
    return decisions;
}

// ---- closure loop ----

ClosureState run_closure(const std::vector<std::string>& design_files,
                         const std::string& sva_path, const ClosureConfig& config) {
    config.validate();
    if (design_files.empty()) throw ConfigError("no design files given");

    ParseOptions popts;
    popts.reset_pattern = config.reset_pattern;
    std::vector<DesignUnit> units;
    for (const std::string& path : design_files) {
        std::string text = read_text_file(path);
        for (DesignUnit& u : parse_source(text, path, popts)) units.push_back(std::move(u));
    }
    if (units.size() != 1)
        throw ConfigError("closure runs over exactly one module; got " +
                          std::to_string(units.size()));
    const DesignUnit& unit = units.front();
    SignalTable table = resolve_signals(unit);
    std::vector<CoverageTarget> targets = enumerate_targets(unit, table);

    std::string sva_text;
    if (!sva_path.empty() && fs::exists(sva_path)) sva_text = read_text_file(sva_path);

    std::unique_ptr<FormalBackend> backend =
        config.backend.kind == BackendSpec::Kind::Builtin
            ? make_builtin_backend(config.engine, config.exclude_unreachable, config.jobs)
            : make_replay_backend(config.backend.replay_path);

    ClosureState state;
    state.design = unit.name;
    bool zero_holes_at_start = false;
    bool finished = false;

    for (int it = 0; it < config.max_iterations && !finished; ++it) {
        IterationRecord rec;
        rec.iteration = it;

        std::vector<SvaProperty> props = parse_sva_properties(sva_text);
        std::vector<ProofStatus> statuses = backend->prove(unit, props);
        for (std::size_t i = 0; i < props.size(); ++i) {
            rec.proofs.emplace_back(props[i].name, to_string(statuses[i].verdict));
            state.last_verdicts[props[i].name] = to_string(statuses[i].verdict);
        }
        CoverageReport report = backend->measure(unit, props, statuses, it);
        for (const ReportEntry& e : report.targets) {
            bool known = std::any_of(targets.begin(), targets.end(),
                                     [&](const CoverageTarget& t) { return t.id == e.id; });
            if (!known) throw UnknownTarget(e.id);
        }
        rec.coverage_pct = report.coverage_pct;
        state.final_report = report;

        if (it == 0)
            zero_holes_at_start =
                std::none_of(report.targets.begin(), report.targets.end(),
                             [](const ReportEntry& e) { return e.status == TargetStatus::Uncovered; });

        if (report.coverage_pct >= config.coverage_threshold) {
            state.outcome = (it == 0 && zero_holes_at_start) ? ClosureOutcome::SignedOff
                                                             : ClosureOutcome::ThresholdMet;
            state.history.push_back(std::move(rec));
            finished = true;
            break;
        }

        // analyze → consolidate → generate
        std::vector<SvaProperty> fresh;
        SvaResources res = scan_resources(sva_text);
        res.add_design(table);
        if (config.enable_generation) {
            HolePartition part = classify_holes(report, targets);
            std::vector<HoleContext> contexts;
            for (const CoverageTarget& t : targets) {
                const ReportEntry* entry = report.find(t.id);
                if (!entry || entry->status != TargetStatus::Uncovered) continue;
                if (!context_eligible(t)) continue;
                contexts.push_back(derive_context(t, unit, table));
            }
            (void)part; // partition validated the report against the targets
            contexts = consolidate(std::move(contexts));

            for (const HoleContext& ctx : contexts) {
                LlmResult gen = llm_generate(ctx, res, config.generation, config.gen_opts);
                if (gen.used_fallback)
                    rec.fallbacks.push_back(ctx.module + ":" + ctx.precondition + " (" +
                                            gen.fallback_reason + ")");
                for (SvaProperty& p : gen.properties) {
                    p.trace.file = file_stem_name(unit.origin);
                    p.trace.iteration = it;
                    p.trace.locations = ctx.locations;
                    fresh.push_back(std::move(p));
                }
            }
            // regenerated bodies must also dedup against the unresolved queue
            SvaResources dedup_res = res;
            for (const SvaProperty& p : state.pending)
                dedup_res.existing_properties.push_back({p.name, normalize_property_body(p)});
            fresh = name_and_dedup(std::move(fresh), dedup_res,
                                   config.seed + 1000003ull * static_cast<std::uint64_t>(it));
        }

        // review queue = carried-over pending plus this iteration's batch
        std::vector<SvaProperty> review = state.pending;
        review.insert(review.end(), fresh.begin(), fresh.end());
        std::vector<SvaProperty> approved;
        std::vector<SvaProperty> still_pending;
        if (!review.empty()) {
            std::vector<HilDecision> decisions =
                hil_checkpoint(review, config.hil_mode, res, config, it);
            for (std::size_t i = 0; i < review.size(); ++i) {
                const HilDecision& d = decisions[i];
                switch (d.kind) {
                    case HilDecision::Kind::Approve: approved.push_back(review[i]); break;
                    case HilDecision::Kind::Edit:
                        approved.push_back(apply_edit(review[i], d.new_body, res));
                        break;
                    case HilDecision::Kind::Reject: break;
                    case HilDecision::Kind::Pending: still_pending.push_back(review[i]); break;
                }
            }
            rec.hil = std::move(decisions);
        }
        state.pending = std::move(still_pending);

        if (!approved.empty()) {
            sva_text = merge_into_file(sva_text, approved);
            for (const SvaProperty& p : approved) {
                rec.new_properties.push_back(p.name);
                state.generated_names.push_back(p.name);
            }
        }

        bool stalled = rec.new_properties.empty() && it > 0 &&
                       state.history.back().coverage_pct == rec.coverage_pct;
        state.history.push_back(std::move(rec));
        if (stalled) {
            state.outcome = ClosureOutcome::Stalled;
            finished = true;
        }
    }

    if (!finished) state.outcome = ClosureOutcome::Escalated;
    state.final_sva = sva_text;
    return state;
}

KpiReport compute_kpis(const ClosureState& state) {
    KpiReport kpi;
    kpi.num_properties = static_cast<int>(state.generated_names.size());
    int proven = 0;
    for (const std::string& name : state.generated_names) {
        auto it = state.last_verdicts.find(name);
        if (it != state.last_verdicts.end() && it->second == "PROVEN") ++proven;
    }
    kpi.proven_pct = kpi.num_properties == 0
                         ? 100.0
                         : 100.0 * proven / static_cast<double>(kpi.num_properties);
    kpi.coverage_pct = state.final_report.coverage_pct;
    return kpi;
}

nlohmann::ordered_json manifest_to_json(const ClosureConfig& config, const ClosureState& state) {
    nlohmann::ordered_json j;
    j["design"] = state.design;
    nlohmann::ordered_json cfg;
    cfg["coverage_threshold"] = config.coverage_threshold;
    cfg["max_iterations"] = config.max_iterations;
    cfg["hil_mode"] = to_string(config.hil_mode);
    cfg["backend"] =
        config.backend.kind == BackendSpec::Kind::Builtin ? "builtin" : config.backend.replay_path;
    cfg["seed"] = config.seed;
    cfg["exclude_unreachable"] = config.exclude_unreachable;
    cfg["generation"] = config.enable_generation;
    cfg["covers"] = config.gen_opts.emit_cover;
    j["config"] = std::move(cfg);

    nlohmann::ordered_json iters = nlohmann::ordered_json::array();
    for (const IterationRecord& rec : state.history) {
        nlohmann::ordered_json r;
        r["iteration"] = rec.iteration;
        r["coverage_pct"] = rec.coverage_pct;
        nlohmann::ordered_json proofs = nlohmann::ordered_json::object();
        for (const auto& [name, verdict] : rec.proofs) proofs[name] = verdict;
        r["proofs"] = std::move(proofs);
        r["new_properties"] = rec.new_properties;
        nlohmann::ordered_json hil = nlohmann::ordered_json::array();
        for (const HilDecision& d : rec.hil) {
            nlohmann::ordered_json h;
            h["name"] = d.property_name;
            h["decision"] = to_string(d.kind);
            if (!d.new_body.empty()) h["body"] = d.new_body;
            if (!d.note.empty()) h["note"] = d.note;
            hil.push_back(std::move(h));
        }
        r["hil"] = std::move(hil);
        if (!rec.fallbacks.empty()) r["llm_fallbacks"] = rec.fallbacks;
        iters.push_back(std::move(r));
    }
    j["iterations"] = std::move(iters);
    j["outcome"] = to_string(state.outcome);
    std::vector<std::string> pending_names;
    for (const SvaProperty& p : state.pending) pending_names.push_back(p.name);
    j["pending"] = pending_names;

    KpiReport kpi = compute_kpis(state);
    nlohmann::ordered_json k;
    k["num_properties"] = kpi.num_properties;
    k["proven_pct"] = kpi.proven_pct;
    k["coverage_pct"] = kpi.coverage_pct;
    j["kpis"] = std::move(k);
    j["final_report"] = report_to_json(state.final_report);
    return j;
}

// ---- benchmark ----

std::string BenchTable::render_text() const {
    std::ostringstream out;
    auto line = [&](const std::string& a, const std::string& b, const std::string& c,
                    const std::string& d, const std::string& e, const std::string& f,
                    const std::string& g) {
        out << a;
        out << std::string(a.size() < 14 ? 14 - a.size() : 1, ' ') << b;
        out << std::string(b.size() < 17 ? 17 - b.size() : 1, ' ') << c;
        out << std::string(c.size() < 7 ? 7 - c.size() : 1, ' ') << d;
        out << std::string(d.size() < 9 ? 9 - d.size() : 1, ' ') << e;
        out << std::string(e.size() < 10 ? 10 - e.size() : 1, ' ') << f;
        out << std::string(f.size() < 7 ? 7 - f.size() : 1, ' ') << g << "\n";
    };
    line("design", "config", "props", "proven%", "cov%", "iters", "wall_ms");
    char buf[32];
    for (const BenchRow& r : rows) {
        if (!r.error.empty()) {
            line(r.design, r.config_name, "-", "-", "-", "-", "error: " + r.error);
            continue;
        }
        std::string proven, cov, wall;
        std::snprintf(buf, sizeof buf, "%.2f", r.proven_pct);
        proven = buf;
        std::snprintf(buf, sizeof buf, "%.2f", r.coverage_pct);
        cov = buf;
        std::snprintf(buf, sizeof buf, "%.1f", r.wall_ms);
        wall = buf;
        line(r.design, r.config_name, std::to_string(r.num_properties), proven, cov,
             std::to_string(r.iterations), wall);
    }
    return out.str();
}

nlohmann::ordered_json BenchTable::to_json() const {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const BenchRow& r : rows) {
        nlohmann::ordered_json j;
        j["design"] = r.design;
        j["config"] = r.config_name;
        if (!r.error.empty()) {
            j["error"] = r.error;
        } else {
            j["num_properties"] = r.num_properties;
            j["proven_pct"] = r.proven_pct;
            j["coverage_pct"] = r.coverage_pct;
            j["iterations"] = r.iterations;
            j["wall_ms"] = r.wall_ms;
        }
        arr.push_back(std::move(j));
    }
    return arr;
}

BenchTable benchmark(const std::string& corpus_dir, const ClosureConfig& base_config) {
    BenchTable table;
    std::vector<std::string> files;
    if (fs::exists(corpus_dir))
        for (const auto& entry : fs::directory_iterator(corpus_dir)) {
            std::string ext = entry.path().extension().string();
            if (ext == ".v" || ext == ".sv") files.push_back(entry.path().string());
        }
    std::sort(files.begin(), files.end());

    for (const std::string& file : files) {
        for (bool with_generation : {false, true}) {
            BenchRow row;
            row.design = fs::path(file).stem().string();
            row.config_name = with_generation ? "with_generation" : "baseline";
            ClosureConfig cfg = base_config;
            cfg.enable_generation = with_generation;
            cfg.hil_mode = HilMode::AutoApprove;
            auto start = std::chrono::steady_clock::now();
            try {
                ClosureState state = run_closure({file}, "", cfg);
                KpiReport kpi = compute_kpis(state);
                row.num_properties = kpi.num_properties;
                row.proven_pct = kpi.proven_pct;
                row.coverage_pct = kpi.coverage_pct;
                row.iterations = static_cast<int>(state.history.size());
            } catch (const Error& e) {
                row.error = e.what();
            }
            auto stop = std::chrono::steady_clock::now();
            row.wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
            table.rows.push_back(std::move(row));
        }
    }
    return table;
}

} // namespace covloop
