// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/coverage.hpp"

#include <filesystem>
#include <fstream>

#include "covloop/errors.hpp"
#include "covloop/render.hpp"

namespace covloop {

namespace {

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex8(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(8, '0');
    for (int i = 7; i >= 0; --i) {
        out[i] = digits[v & 0xf];
        v >>= 4;
    }
    return out;
}

std::string file_stem(const std::string& path) {
    return std::filesystem::path(path).stem().string();
}

Expr conjoin(const std::vector<Expr>& conjuncts) {
    if (conjuncts.empty()) return Expr::true_value();
    Expr out = conjuncts[0];
    for (std::size_t i = 1; i < conjuncts.size(); ++i)
        out = Expr::binary("&&", std::move(out), conjuncts[i]);
    return out;
}

Expr negate(const Expr& e) { return Expr::unary("!", e); }

// subject == label, with casez wildcards lowered to a masked compare
Expr label_match(const Expr& subject, const Expr& label, bool casez, int subject_width) {
    if (casez && label.kind == Expr::Kind::Literal && label.wildcard != 0) {
        int w = label.width ? label.width : subject_width;
        std::uint64_t care = ~label.wildcard & (w >= 64 ? ~0ull : ((1ull << w) - 1));
        Expr mask = Expr::literal(care, w, 'h');
        Expr want = Expr::literal(label.value & care, w, 'h');
        return Expr::binary("==", Expr::binary("&", subject, std::move(mask)), std::move(want));
    }
    return Expr::binary("==", subject, label);
}

Expr arm_condition(const Stmt& case_stmt, const Stmt::CaseArm& arm, int subject_width) {
    std::vector<Expr> matches;
    for (const Expr& l : arm.labels)
        matches.push_back(label_match(case_stmt.subject, l, case_stmt.casez, subject_width));
    Expr out = matches[0];
    for (std::size_t i = 1; i < matches.size(); ++i)
        out = Expr::binary("||", std::move(out), matches[i]);
    return out;
}

Expr default_condition(const Stmt& case_stmt, int subject_width) {
    std::vector<Expr> matches;
    for (const Stmt::CaseArm& arm : case_stmt.arms) {
        if (arm.is_default) continue;
        matches.push_back(arm_condition(case_stmt, arm, subject_width));
    }
    if (matches.empty()) return Expr::true_value();
    Expr any = matches[0];
    for (std::size_t i = 1; i < matches.size(); ++i)
        any = Expr::binary("||", std::move(any), matches[i]);
    return negate(any);
}

class Enumerator {
public:
    Enumerator(const DesignUnit& unit, const SignalTable& table)
        : unit_(unit), table_(table) {}

    std::vector<CoverageTarget> run() {
        for (const ModuleItem& item : unit_.items) {
            if (const auto* a = std::get_if<ContinuousAssign>(&item)) {
                CoverageTarget t = base_target(TargetKind::Statement, a->stmt_span);
                t.enclosing.timing = "assign";
                t.enclosing.block_kind = "assign";
                t.cont = a;
                t.path_condition = Expr::true_value();
                t.driven = {a->lhs};
                push(std::move(t));
            } else {
                const ProcBlock& b = std::get<ProcBlock>(item);
                block_ = &b;
                path_.clear();
                walk(b.body, false);
            }
        }
        return std::move(out_);
    }

private:
    const DesignUnit& unit_;
    const SignalTable& table_;
    const ProcBlock* block_ = nullptr;
    std::vector<Expr> path_;
    std::vector<CoverageTarget> out_;

    CoverageTarget base_target(TargetKind kind, SourceSpan span) const {
        CoverageTarget t;
        t.kind = kind;
        t.span = span;
        t.enclosing.module = unit_.name;
        if (block_) {
            t.enclosing.timing = to_string(block_->timing_class);
            t.block = block_;
        }
        return t;
    }

    void push(CoverageTarget t) {
        std::string key = file_stem(unit_.origin) + ":" + unit_.name + ":" +
                          (t.kind == TargetKind::Statement ? "S" : "B") + ":" + t.span.str();
        t.id = key + ":" + hex8(fnv1a(unit_.origin + "|" + key));
        out_.push_back(std::move(t));
    }

    int subject_width(const Expr& subject) const {
        if (subject.kind == Expr::Kind::Ref) return table_.width_of(subject.name);
        return 32;
    }

    // Constant label value: literal, parameter reference, or simple
    // arithmetic over those.
    std::optional<std::uint64_t> label_value(const Expr& l) const {
        switch (l.kind) {
            case Expr::Kind::Literal:
                return l.wildcard ? std::nullopt : std::optional<std::uint64_t>(l.value);
            case Expr::Kind::Ref: {
                auto it = table_.params.find(l.name);
                if (it == table_.params.end()) return std::nullopt;
                return static_cast<std::uint64_t>(it->second);
            }
            case Expr::Kind::Unary: {
                auto v = label_value(l.args[0]);
                if (!v) return std::nullopt;
                if (l.name == "-") return ~*v + 1;
                if (l.name == "+") return v;
                return std::nullopt;
            }
            case Expr::Kind::Binary: {
                auto a = label_value(l.args[0]);
                auto b = label_value(l.args[1]);
                if (!a || !b) return std::nullopt;
                if (l.name == "+") return *a + *b;
                if (l.name == "-") return *a - *b;
                if (l.name == "*") return *a * *b;
                return std::nullopt;
            }
            default: return std::nullopt;
        }
    }

    // True when the case labels provably cover every subject value, so no
    // implicit default arm exists.
    bool labels_exhaustive(const Stmt& s) const {
        int w = subject_width(s.subject);
        if (w > 16) return false;
        std::vector<bool> seen(1ull << w, false);
        for (const Stmt::CaseArm& arm : s.arms) {
            if (arm.is_default) return true;
            for (const Expr& l : arm.labels) {
                if (s.casez && l.kind == Expr::Kind::Literal && l.wildcard) {
                    std::uint64_t care = ~l.wildcard & ((1ull << w) - 1);
                    for (std::uint64_t v = 0; v < (1ull << w); ++v)
                        if ((v & care) == (l.value & care)) seen[v] = true;
                    continue;
                }
                auto v = label_value(l);
                if (!v) return false;
                std::uint64_t masked = *v & (w >= 64 ? ~0ull : ((1ull << w) - 1));
                seen[masked] = true;
            }
        }
        for (bool b : seen)
            if (!b) return false;
        return true;
    }

    void statement_target(const Stmt& s, bool in_control, const char* enclosing_kind) {
        CoverageTarget t = base_target(TargetKind::Statement, s.span);
        t.enclosing.block_kind = enclosing_kind;
        t.stmt = &s;
        t.in_control_flow = in_control;
        t.path_condition = conjoin(path_);
        t.driven = {s.lhs};
        push(std::move(t));
    }

    void branch_target(const Stmt& construct, const Stmt* body, SourceSpan span,
                       const char* block_kind, int arm_index, bool implicit) {
        CoverageTarget t = base_target(TargetKind::Branch, span);
        t.enclosing.block_kind = block_kind;
        t.stmt = body;
        t.construct = &construct;
        t.arm_index = arm_index;
        t.implicit_arm = implicit;
        t.in_control_flow = true;
        t.path_condition = conjoin(path_);
        if (body) t.driven = assigned_signals(*body);
        if (t.driven.empty()) t.driven = assigned_signals(construct);
        push(std::move(t));
    }

    void walk(const Stmt& s, bool in_control, const char* enclosing_kind = "always") {
        switch (s.kind) {
            case Stmt::Kind::Block:
                for (const Stmt& c : s.sub) walk(c, in_control, enclosing_kind);
                break;
            case Stmt::Kind::Assign:
                statement_target(s, in_control, enclosing_kind);
                break;
            case Stmt::Kind::If: {
                path_.push_back(s.cond);
                branch_target(s, &s.sub[0], s.sub[0].span, "if", -1, false);
                walk(s.sub[0], true, "if");
                path_.pop_back();

                path_.push_back(negate(s.cond));
                if (s.has_else) {
                    branch_target(s, &s.sub[1], s.sub[1].span, "if", -1, false);
                    walk(s.sub[1], true, "if");
                } else {
                    branch_target(s, nullptr, s.span, "if", -1, true);
                }
                path_.pop_back();
                break;
            }
            case Stmt::Kind::Case: {
                int w = subject_width(s.subject);
                for (std::size_t i = 0; i < s.arms.size(); ++i) {
                    const Stmt::CaseArm& arm = s.arms[i];
                    Expr cond = arm.is_default ? default_condition(s, w)
                                               : arm_condition(s, arm, w);
                    path_.push_back(std::move(cond));
                    const Stmt& body = s.sub[arm.body_index];
                    branch_target(s, &body, body.span, "case", static_cast<int>(i), false);
                    walk(body, true, "case");
                    path_.pop_back();
                }
                bool has_default = false;
                for (const Stmt::CaseArm& arm : s.arms) has_default |= arm.is_default;
                if (!has_default && !labels_exhaustive(s)) {
                    path_.push_back(default_condition(s, w));
                    branch_target(s, nullptr, s.span, "case", static_cast<int>(s.arms.size()),
                                  true);
                    path_.pop_back();
                }
                break;
            }
        }
    }
};

TargetStatus status_from_string(const std::string& s, const std::string& pointer) {
    if (s == "COVERED") return TargetStatus::Covered;
    if (s == "UNCOVERED") return TargetStatus::Uncovered;
    if (s == "UNREACHABLE") return TargetStatus::Unreachable;
    throw SchemaError(pointer, "unknown status '" + s + "'");
}

TargetKind kind_from_string(const std::string& s, const std::string& pointer) {
    if (s == "STATEMENT") return TargetKind::Statement;
    if (s == "BRANCH") return TargetKind::Branch;
    throw SchemaError(pointer, "unknown kind '" + s + "'");
}

SourceSpan span_from_json(const nlohmann::json& t, const std::string& pointer) {
    if (!t.contains("start") || !t.contains("end") || !t["start"].is_array() ||
        !t["end"].is_array() || t["start"].size() != 2 || t["end"].size() != 2)
        throw SchemaError(pointer, "expected start/end [line, col] pairs");
    SourceSpan s;
    s.start_line = t["start"][0].get<int>();
    s.start_col = t["start"][1].get<int>();
    s.end_line = t["end"][0].get<int>();
    s.end_col = t["end"][1].get<int>();
    return s;
}

} // namespace

std::string to_string(TargetKind k) {
    return k == TargetKind::Statement ? "STATEMENT" : "BRANCH";
}

std::string to_string(TargetStatus s) {
    switch (s) {
        case TargetStatus::Covered: return "COVERED";
        case TargetStatus::Uncovered: return "UNCOVERED";
        case TargetStatus::Unreachable: return "UNREACHABLE";
    }
    return "UNCOVERED";
}

std::vector<CoverageTarget> enumerate_targets(const DesignUnit& unit, const SignalTable& table) {
    Enumerator e(unit, table);
    return e.run();
}

double compute_coverage(const CoverageReport& report, bool exclude_unreachable) {
    std::size_t covered = 0, unreachable = 0;
    for (const ReportEntry& t : report.targets) {
        if (t.status == TargetStatus::Covered) ++covered;
        if (t.status == TargetStatus::Unreachable) ++unreachable;
    }
    std::size_t denom = report.targets.size() - (exclude_unreachable ? unreachable : 0);
    if (denom == 0) return 100.0;
    return 100.0 * static_cast<double>(covered) / static_cast<double>(denom);
}

nlohmann::ordered_json report_to_json(const CoverageReport& report) {
    nlohmann::ordered_json j;
    j["design"] = report.design;
    j["iteration"] = report.iteration;
    nlohmann::ordered_json targets = nlohmann::ordered_json::array();
    for (const ReportEntry& t : report.targets) {
        nlohmann::ordered_json tj;
        tj["id"] = t.id;
        tj["kind"] = to_string(t.kind);
        tj["start"] = {t.span.start_line, t.span.start_col};
        tj["end"] = {t.span.end_line, t.span.end_col};
        tj["status"] = to_string(t.status);
        targets.push_back(std::move(tj));
    }
    j["targets"] = std::move(targets);
    j["coverage_pct"] = report.coverage_pct;
    return j;
}

CoverageReport report_from_json(const nlohmann::json& j, const std::string& where) {
    CoverageReport r;
    if (!j.is_object()) throw SchemaError(where, "expected an object");
    if (!j.contains("design") || !j["design"].is_string())
        throw SchemaError(where + "/design", "expected a string");
    r.design = j["design"].get<std::string>();
    if (!j.contains("iteration") || !j["iteration"].is_number_integer())
        throw SchemaError(where + "/iteration", "expected an integer");
    r.iteration = j["iteration"].get<int>();
    if (!j.contains("targets") || !j["targets"].is_array())
        throw SchemaError(where + "/targets", "expected an array");
    int idx = 0;
    for (const auto& t : j["targets"]) {
        std::string p = where + "/targets/" + std::to_string(idx++);
        ReportEntry e;
        if (!t.contains("id") || !t["id"].is_string())
            throw SchemaError(p + "/id", "expected a string");
        e.id = t["id"].get<std::string>();
        if (!t.contains("kind") || !t["kind"].is_string())
            throw SchemaError(p + "/kind", "expected a string");
        e.kind = kind_from_string(t["kind"].get<std::string>(), p + "/kind");
        e.span = span_from_json(t, p);
        if (!t.contains("status") || !t["status"].is_string())
            throw SchemaError(p + "/status", "expected a string");
        e.status = status_from_string(t["status"].get<std::string>(), p + "/status");
        r.targets.push_back(std::move(e));
    }
    if (!j.contains("coverage_pct") || !j["coverage_pct"].is_number())
        throw SchemaError(where + "/coverage_pct", "expected a number");
    r.coverage_pct = j["coverage_pct"].get<double>();
    return r;
}

CoverageReport read_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError("", "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError("", std::string("invalid JSON: ") + e.what());
    }
    return report_from_json(j, "");
}

void write_report(const CoverageReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw SchemaError("", "cannot write '" + path + "'");
    out << report_to_json(report).dump(2) << "\n";
}

CoverageReport report_from_vtool(const nlohmann::json& j,
                                 const std::vector<CoverageTarget>& targets,
                                 const std::string& design) {
    if (!j.is_object() || !j.contains("rows") || !j["rows"].is_array())
        throw SchemaError("/rows", "expected a row array");
    CoverageReport r;
    r.design = design;
    r.iteration = j.value("iteration", 0);
    // Default every enumerated target to UNCOVERED, then apply rows.
    for (const CoverageTarget& t : targets)
        r.targets.push_back({t.id, t.kind, t.span, TargetStatus::Uncovered});
    int idx = 0;
    for (const auto& row : j["rows"]) {
        std::string p = "/rows/" + std::to_string(idx++);
        TargetKind kind =
            kind_from_string(row.value("kind", std::string("STATEMENT")), p + "/kind");
        SourceSpan span = span_from_json(row, p);
        bool matched = false;
        for (std::size_t i = 0; i < targets.size(); ++i) {
            if (targets[i].kind == kind && targets[i].span == span) {
                if (row.value("unreachable", false))
                    r.targets[i].status = TargetStatus::Unreachable;
                else
                    r.targets[i].status =
                        row.value("hit", false) ? TargetStatus::Covered : TargetStatus::Uncovered;
                matched = true;
                break;
            }
        }
        if (!matched) throw SchemaError(p, "no enumerated target matches this row");
    }
    r.coverage_pct = compute_coverage(r, false);
    return r;
}

} // namespace covloop
