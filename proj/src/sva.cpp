// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/sva.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <regex>
#include <sstream>

#include "covloop/errors.hpp"
#include "covloop/lexer.hpp"
#include "covloop/parser.hpp"

namespace covloop {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

std::string strip_line_comment(const std::string& line) {
    std::size_t pos = line.find("//");
    return pos == std::string::npos ? line : line.substr(0, pos);
}

// ---- body normalization ----

std::vector<std::string> light_tokens(const std::string& text) {
    std::vector<std::string> toks;
    std::size_t i = 0;
    while (i < text.size()) {
        char c = text[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        if (std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '$' || c == '\'' ||
            c == '`') {
            std::string t;
            while (i < text.size()) {
                char d = text[i];
                if (std::isalnum(static_cast<unsigned char>(d)) || d == '_' || d == '$' ||
                    d == '\'' || d == '`' || d == '?') {
                    t += d;
                    ++i;
                } else {
                    break;
                }
            }
            toks.push_back(std::move(t));
            continue;
        }
        static const char* multi[] = {"|->", "|=>", "##", "==", "!=", "<=", ">=", "&&", "||",
                                      "<<", ">>"};
        bool matched = false;
        for (const char* m : multi) {
            std::size_t n = std::char_traits<char>::length(m);
            if (text.compare(i, n, m) == 0) {
                toks.emplace_back(m);
                i += n;
                matched = true;
                break;
            }
        }
        if (!matched) {
            toks.push_back(std::string(1, c));
            ++i;
        }
    }
    return toks;
}

// Removes parentheses that wrap a single token and parentheses that wrap the
// whole antecedent or consequent segment. Call parentheses ($past(...)) stay.
std::vector<std::string> canonicalize_parens(std::vector<std::string> toks) {
    bool changed = true;
    while (changed) {
        changed = false;
        // (tok) -> tok, unless preceded by a call head
        for (std::size_t i = 0; i + 2 < toks.size(); ++i) {
            if (toks[i] == "(" && toks[i + 2] == ")" && toks[i + 1] != "(" && toks[i + 1] != ")") {
                bool call = i > 0 && !toks[i - 1].empty() &&
                            (toks[i - 1][0] == '$' ||
                             std::isalnum(static_cast<unsigned char>(toks[i - 1][0])) ||
                             toks[i - 1][0] == '_' || toks[i - 1][0] == '`');
                if (!call) {
                    toks.erase(toks.begin() + static_cast<long>(i + 2));
                    toks.erase(toks.begin() + static_cast<long>(i));
                    changed = true;
                    break;
                }
            }
        }
        if (changed) continue;
        // full-segment parens around everything before/after the implication
        std::size_t op = toks.size();
        int depth = 0;
        for (std::size_t i = 0; i < toks.size(); ++i) {
            if (toks[i] == "(") ++depth;
            else if (toks[i] == ")") --depth;
            else if (depth == 0 && (toks[i] == "|->" || toks[i] == "|=>")) {
                op = i;
                break;
            }
        }
        auto strip_segment = [&](std::size_t begin, std::size_t end) -> bool {
            // [begin, end): strip if it is exactly one parenthesized group
            if (end - begin < 2 || toks[begin] != "(") return false;
            if (begin > 0) {
                const std::string& prev = toks[begin - 1];
                if (!prev.empty() && (prev[0] == '$' || prev[0] == '`' ||
                                      std::isalnum(static_cast<unsigned char>(prev[0])) ||
                                      prev[0] == '_'))
                    return false;
            }
            int d = 0;
            for (std::size_t i = begin; i < end; ++i) {
                if (toks[i] == "(") ++d;
                else if (toks[i] == ")") --d;
                if (d == 0 && i + 1 < end) return false; // closes early
            }
            if (toks[end - 1] != ")") return false;
            toks.erase(toks.begin() + static_cast<long>(end - 1));
            toks.erase(toks.begin() + static_cast<long>(begin));
            return true;
        };
        if (op != toks.size()) {
            if (strip_segment(0, op)) {
                changed = true;
                continue;
            }
            std::size_t cons_begin = op + 1;
            if (cons_begin < toks.size() && toks[cons_begin] == "##" && cons_begin + 1 < toks.size())
                cons_begin += 2;
            if (strip_segment(cons_begin, toks.size())) changed = true;
        }
    }
    return toks;
}

std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) out += (i ? " " : "") + toks[i];
    return out;
}

// ---- property block parsing ----

struct RawBlock {
    std::string name;
    std::string body; // between `property NAME;` and `endproperty`
    int line = 0;
};

struct ScanState {
    std::vector<RawBlock> blocks;
    std::vector<SvaMacro> macros;
    std::vector<SvaParameter> parameters;
    std::vector<std::string> signals;
    std::vector<std::pair<std::string, PropertyKind>> bindings; // assert/cover property(name)
};

ScanState scan_text(const std::string& text) {
    ScanState st;
    static const std::regex define_re(R"(^\s*`define\s+(\w+)\s+(.*)$)");
    static const std::regex param_re(R"(^\s*(?:parameter|localparam)\s+(\w+)\s*=\s*([^;,]+)\s*[;,]?)");
    static const std::regex signal_re(
        R"(^\s*(?:input|output|inout|wire|reg|logic)\s*(?:\[[^\]]*\]\s*)?(\w+(?:\s*,\s*\w+)*)\s*;)");
    static const std::regex prop_re(R"(^\s*property\s+(\w+)\s*;?)");
    static const std::regex bind_re(R"(^\s*(assert|cover|assume)\s+property\s*\(\s*(\w+)\s*\)\s*;)");

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    bool in_block = false;
    RawBlock current;
    while (std::getline(in, line)) {
        ++lineno;
        std::string code = strip_line_comment(line);
        std::smatch m;
        if (in_block) {
            std::string t = trim(code);
            if (t == "endproperty") {
                in_block = false;
                st.blocks.push_back(current);
                continue;
            }
            if (std::regex_search(code, m, prop_re))
                throw SvaParseError(lineno, "property block opened before previous endproperty");
            current.body += code + "\n";
            continue;
        }
        if (std::regex_search(code, m, define_re)) {
            st.macros.push_back({m[1].str(), trim(m[2].str())});
            continue;
        }
        if (std::regex_search(code, m, prop_re)) {
            current = RawBlock{};
            current.name = m[1].str();
            current.line = lineno;
            in_block = true;
            continue;
        }
        if (std::regex_search(code, m, bind_re)) {
            PropertyKind kind = m[1].str() == "cover" ? PropertyKind::Cover : PropertyKind::Assert;
            st.bindings.emplace_back(m[2].str(), kind);
            continue;
        }
        if (std::regex_search(code, m, param_re)) {
            st.parameters.push_back({m[1].str(), trim(m[2].str())});
            continue;
        }
        if (std::regex_search(code, m, signal_re)) {
            std::string names = m[1].str();
            std::string cur;
            for (char c : names + ",") {
                if (c == ',') {
                    std::string n = trim(cur);
                    if (!n.empty()) st.signals.push_back(n);
                    cur.clear();
                } else {
                    cur += c;
                }
            }
            continue;
        }
    }
    if (in_block) throw SvaParseError(current.line, "missing endproperty for '" + current.name + "'");
    return st;
}

std::string expand_macros(const std::string& text, const std::vector<SvaMacro>& macros) {
    std::string out = text;
    bool changed = true;
    int guard = 0;
    while (changed && guard++ < 8) {
        changed = false;
        for (const SvaMacro& m : macros) {
            std::string needle = "`" + m.name;
            std::size_t pos;
            while ((pos = out.find(needle)) != std::string::npos) {
                out.replace(pos, needle.size(), m.body);
                changed = true;
            }
        }
    }
    return out;
}

ImplicationParts split_implication(const std::string& text, int line) {
    int depth = 0;
    std::size_t op_pos = std::string::npos;
    bool nonoverlap = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (c == '(') ++depth;
        if (c == ')') --depth;
        if (depth == 0 && c == '|' && i + 2 < text.size() &&
            (text[i + 1] == '-' || text[i + 1] == '=') && text[i + 2] == '>') {
            if (op_pos != std::string::npos) throw SvaParseError(line, "more than one implication");
            op_pos = i;
            nonoverlap = text[i + 1] == '=';
        }
    }
    if (op_pos == std::string::npos)
        throw SvaParseError(line, "no implication operator in property body");
    ImplicationParts parts;
    parts.antecedent = trim(text.substr(0, op_pos));
    std::string rest = trim(text.substr(op_pos + 3));
    parts.op = nonoverlap ? ImplOp::Nonoverlap : ImplOp::Overlap;
    static const std::regex delay_re(R"(^##\s*(\d+))");
    std::smatch mm;
    if (!nonoverlap && std::regex_search(rest, mm, delay_re)) {
        parts.op = ImplOp::OverlapDelay;
        parts.delay = std::stoi(mm[1].str());
        rest = trim(mm.suffix().str());
    }
    if (!rest.empty() && rest.back() == ';') rest.pop_back();
    parts.consequent = trim(rest);
    if (parts.antecedent.empty() || parts.consequent.empty())
        throw SvaParseError(line, "empty antecedent or consequent");
    return parts;
}

// Parses a property body: [@(edge sig)] [disable iff (expr)] ante OP [##N] cons [;]
SvaProperty parse_body(const RawBlock& block, const std::vector<SvaMacro>& macros) {
    SvaProperty p;
    p.name = block.name;
    std::string body = block.body;

    // Remember an un-expanded clock macro for round-tripping.
    static const std::regex clock_macro_re(R"(^\s*(`\w+))");
    std::smatch mm;
    std::string trimmed = trim(body);
    if (std::regex_search(trimmed, mm, clock_macro_re)) {
        std::string macro_name = mm[1].str().substr(1);
        for (const SvaMacro& m : macros)
            if (m.name == macro_name && m.body.find('@') != std::string::npos)
                p.clock_expr = "`" + macro_name;
    }

    std::string text = expand_macros(body, macros);
    static const std::regex clock_re(R"(@\s*\(\s*(posedge|negedge)\s+(\w+)\s*\))");
    if (std::regex_search(text, mm, clock_re)) {
        if (p.clock_expr.empty())
            p.clock_expr = "@(" + mm[1].str() + " " + mm[2].str() + ")";
        text = mm.prefix().str() + " " + mm.suffix().str();
    }
    static const std::regex disable_re(R"(disable\s+iff\s*\()");
    if (std::regex_search(text, mm, disable_re)) {
        std::size_t open = static_cast<std::size_t>(mm.position(0)) + mm.length(0) - 1;
        int depth = 0;
        std::size_t close = open;
        for (std::size_t i = open; i < text.size(); ++i) {
            if (text[i] == '(') ++depth;
            if (text[i] == ')' && --depth == 0) {
                close = i;
                break;
            }
        }
        if (depth != 0) throw SvaParseError(block.line, "unbalanced disable iff");
        p.disable_expr = trim(text.substr(open + 1, close - open - 1));
        text = text.substr(0, static_cast<std::size_t>(mm.position(0))) + " " +
               text.substr(close + 1);
    }

    ImplicationParts parts = split_implication(text, block.line);
    p.antecedent = parts.antecedent;
    p.op = parts.op;
    p.delay = parts.delay;
    p.consequent = parts.consequent;
    return p;
}

std::string suffix_alphabet() { return "0123456789abcdefghjkmnpqrstvwxyz"; }

} // namespace

std::string to_string(ImplOp op) {
    switch (op) {
        case ImplOp::Overlap: return "|->";
        case ImplOp::Nonoverlap: return "|=>";
        case ImplOp::OverlapDelay: return "|->";
    }
    return "|->";
}

bool SvaResources::has_signal(const std::string& n) const {
    return std::find(signals.begin(), signals.end(), n) != signals.end();
}
bool SvaResources::has_macro(const std::string& n) const {
    for (const SvaMacro& m : macros)
        if (m.name == n) return true;
    return false;
}
bool SvaResources::has_parameter(const std::string& n) const {
    for (const SvaParameter& p : parameters)
        if (p.name == n) return true;
    return false;
}
bool SvaResources::has_property_name(const std::string& n) const {
    for (const ExistingProperty& p : existing_properties)
        if (p.name == n) return true;
    return false;
}
bool SvaResources::identifier_available(const std::string& n) const {
    return has_signal(n) || has_macro(n) || has_parameter(n);
}

void SvaResources::add_design(const SignalTable& table) {
    for (const auto& [name, info] : table.signals)
        if (!has_signal(name)) signals.push_back(name);
    for (const auto& [name, value] : table.params)
        if (!has_parameter(name)) parameters.push_back({name, std::to_string(value)});
}

SvaResources scan_resources(const std::string& sva_text) {
    ScanState st = scan_text(sva_text);
    SvaResources res;
    for (const std::string& s : st.signals)
        if (!res.has_signal(s)) res.signals.push_back(s);
    for (const SvaMacro& m : st.macros)
        if (!res.has_macro(m.name)) res.macros.push_back(m);
    for (const SvaParameter& p : st.parameters)
        if (!res.has_parameter(p.name)) res.parameters.push_back(p);
    for (const RawBlock& b : st.blocks) {
        if (res.has_property_name(b.name)) continue;
        SvaProperty parsed = parse_body(b, st.macros);
        for (const auto& [name, kind] : st.bindings)
            if (name == b.name) parsed.kind = kind;
        res.existing_properties.push_back({b.name, normalize_property_body(parsed)});
    }
    return res;
}

std::vector<SvaProperty> parse_sva_properties(const std::string& sva_text) {
    ScanState st = scan_text(sva_text);
    std::vector<SvaProperty> out;
    for (const RawBlock& b : st.blocks) {
        SvaProperty p = parse_body(b, st.macros);
        p.kind = PropertyKind::Assert;
        for (const auto& [name, kind] : st.bindings)
            if (name == b.name) p.kind = kind;
        out.push_back(std::move(p));
    }
    return out;
}

std::string normalize_body_text(const std::string& kind, const std::string& clock,
                                const std::string& disable, const std::string& body) {
    std::string full = kind + " " + clock + " ";
    if (!disable.empty()) full += "disable iff ( " + disable + " ) ";
    full += body;
    return join_tokens(canonicalize_parens(light_tokens(full)));
}

std::string normalize_property_body(const SvaProperty& p) {
    std::string body = p.antecedent + " " + to_string(p.op) + " " +
                       (p.op == ImplOp::OverlapDelay ? "##" + std::to_string(p.delay) + " " : "") +
                       p.consequent;
    std::string clock = p.clock_expr;
    if (!clock.empty() && clock[0] == '`') clock = clock.substr(1); // macro name only
    return normalize_body_text(p.kind == PropertyKind::Cover ? "cover" : "assert", clock,
                               p.disable_expr, body);
}

void validate_property(const SvaProperty& p, const SvaResources& res) {
    if (p.antecedent.find("|->") != std::string::npos ||
        p.antecedent.find("|=>") != std::string::npos ||
        p.consequent.find("|->") != std::string::npos ||
        p.consequent.find("|=>") != std::string::npos)
        throw SvaParseError(0, "nested implication in '" + p.name + "'");
    if (p.consequent.find(';') != std::string::npos || p.antecedent.find(';') != std::string::npos)
        throw SvaParseError(0, "multi-statement body in '" + p.name + "'");
    if (p.op == ImplOp::OverlapDelay && p.delay < 1)
        throw SvaParseError(0, "##N delay must be at least 1");

    Expr ante, cons;
    try {
        ante = parse_expr_text(p.antecedent, /*allow_past=*/false);
        cons = parse_expr_text(p.consequent, /*allow_past=*/true);
    } catch (const UnsupportedConstruct& e) {
        throw SvaParseError(0, std::string("unsupported expression in '") + p.name +
                                   "': " + e.construct);
    } catch (const SyntaxError&) {
        throw SvaParseError(0, "malformed expression in '" + p.name + "'");
    }
    // single outcome: the consequent is one relational/equality comparison or
    // one atomic expression, never a logical chain
    if (cons.kind == Expr::Kind::Binary && (cons.name == "&&" || cons.name == "||"))
        throw SvaParseError(0, "consequent of '" + p.name + "' is not a single outcome");

    std::vector<std::string> ids;
    collect_refs(ante, ids);
    collect_refs(cons, ids);
    if (!p.disable_expr.empty()) {
        Expr dis = parse_expr_text(p.disable_expr, false);
        collect_refs(dis, ids);
    }
    for (const std::string& id : ids)
        if (!res.identifier_available(id)) throw UnavailableSignal(id);
}

std::vector<SvaProperty> generate_property(const HoleContext& ctx, const SvaResources& res,
                                           const GenerateOptions& opts) {
    if (ctx.timing != "always_ff" && ctx.timing != "always_comb" && ctx.timing != "always" &&
        ctx.timing != "assign")
        throw UnsupportedTiming(ctx.timing);

    // Signals the context touches must exist in the resources.
    for (const std::string& s : ctx.signals_in)
        if (!res.identifier_available(s)) throw UnavailableSignal(s);
    for (const std::string& s : ctx.signals_out)
        if (!res.identifier_available(s)) throw UnavailableSignal(s);

    bool clocked = ctx.clock.has_value();
    SvaProperty p;
    p.kind = PropertyKind::Assert;

    // Clocking: an SVA-file macro that expands to a clocking event wins over
    // the RTL-derived clock.
    std::string macro_clock;
    for (const SvaMacro& m : res.macros)
        if (m.body.find("posedge") != std::string::npos ||
            m.body.find("negedge") != std::string::npos) {
            macro_clock = "`" + m.name;
            break;
        }
    if (!macro_clock.empty() && clocked) {
        p.clock_expr = macro_clock;
    } else if (clocked) {
        p.clock_expr =
            std::string("@(") + (ctx.clock->posedge ? "posedge " : "negedge ") + ctx.clock->signal + ")";
    }
    if (ctx.reset) p.disable_expr = (ctx.reset->active_low ? "!" : "") + ctx.reset->signal;

    std::string ante = ctx.precondition.empty() ? "1'b1" : ctx.precondition;
    if (ctx.preconditions.size() > 1) {
        std::vector<std::string> wrapped;
        for (const std::string& pre : ctx.preconditions) wrapped.push_back("(" + pre + ")");
        ante.clear();
        for (std::size_t i = 0; i < wrapped.size(); ++i) ante += (i ? " || " : "") + wrapped[i];
    }
    p.antecedent = ante;

    if (clocked) {
        p.op = ImplOp::Nonoverlap;
        if (ctx.hold_semantics) {
            if (ctx.lhs.empty()) throw UnsupportedTiming("hold with no driven signal");
            p.consequent = ctx.lhs + " == $past(" + ctx.lhs + ")";
        } else {
            // constants need no $past
            bool rhs_constant = true;
            try {
                Expr rhs = parse_expr_text(ctx.rhs_text, false);
                std::vector<std::string> refs;
                collect_refs(rhs, refs);
                for (const std::string& r : refs)
                    if (!res.has_parameter(r)) rhs_constant = false;
            } catch (...) {
                rhs_constant = false;
            }
            p.consequent = ctx.lhs + " == " +
                           (rhs_constant ? ctx.rhs_text : "$past(" + ctx.rhs_text + ")");
        }
    } else {
        p.op = ImplOp::Overlap;
        if (ctx.hold_semantics) throw UnsupportedTiming("combinational hold");
        p.consequent = ctx.lhs + " == (" + ctx.rhs_text + ")";
    }
    p.trace.iteration = 0;
    p.trace.locations = ctx.locations;
    p.name = "p_" + behavior_slug(ctx.behavior);

    std::vector<SvaProperty> out;
    out.push_back(p);

    if (opts.emit_cover && ctx.type == "BRANCH") {
        SvaProperty c = p;
        c.kind = PropertyKind::Cover;
        c.op = ImplOp::Overlap;
        c.delay = 1;
        c.consequent = "1'b1";
        c.name = "c_" + behavior_slug(ctx.behavior);
        out.push_back(std::move(c));
    }
    for (SvaProperty& prop : out) validate_property(prop, res);
    return out;
}

std::vector<SvaProperty> name_and_dedup(std::vector<SvaProperty> props, const SvaResources& res,
                                        std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const std::string alphabet = suffix_alphabet();
    std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);

    std::vector<SvaProperty> out;
    std::vector<std::string> bodies_seen;
    for (const ExistingProperty& e : res.existing_properties) bodies_seen.push_back(e.normalized_body);
    std::vector<std::string> names_taken;
    for (const ExistingProperty& e : res.existing_properties) names_taken.push_back(e.name);

    for (SvaProperty& p : props) {
        std::string body = normalize_property_body(p);
        if (std::find(bodies_seen.begin(), bodies_seen.end(), body) != bodies_seen.end())
            continue; // the behavior is already in the file; reuse implies no emission
        bodies_seen.push_back(body);

        std::string base = p.name.empty() ? "p_prop" : p.name;
        std::string name;
        do {
            std::string suffix;
            for (int i = 0; i < 4; ++i) suffix += alphabet[pick(rng)];
            name = base + "_" + suffix;
        } while (std::find(names_taken.begin(), names_taken.end(), name) != names_taken.end());
        names_taken.push_back(name);
        p.name = name;
        out.push_back(std::move(p));
    }
    return out;
}

std::string render_property(const SvaProperty& p) {
    std::ostringstream out;
    out << "property " << p.name << ";\n";
    std::string head;
    if (!p.clock_expr.empty()) head = p.clock_expr;
    if (!p.disable_expr.empty())
        head += (head.empty() ? "" : " ") + std::string("disable iff (") + p.disable_expr + ")";
    if (!head.empty()) out << "  " << head << "\n";
    out << "  (" << p.antecedent << ") " << to_string(p.op) << " ";
    if (p.op == ImplOp::OverlapDelay) out << "##" << p.delay << " ";
    out << "(" << p.consequent << ");\n";
    out << "endproperty\n";
    out << (p.kind == PropertyKind::Cover ? "cover" : "assert") << " property (" << p.name
        << ");\n";
    return out.str();
}

ImplicationParts parse_implication(const std::string& body) {
    return split_implication(body, 0);
}

std::string merge_into_file(const std::string& sva_text, const std::vector<SvaProperty>& props) {
    SvaResources res = scan_resources(sva_text); // validates the existing file
    std::string out = sva_text;
    for (const SvaProperty& p : props) {
        std::string body = normalize_property_body(p);
        bool dup = false;
        for (const ExistingProperty& e : res.existing_properties)
            if (e.normalized_body == body) dup = true;
        if (dup || res.has_property_name(p.name)) continue;
        if (!out.empty() && out.back() != '\n') out += "\n";
        if (!out.empty()) out += "\n";
        for (const SourceSpan& loc : p.trace.locations)
            out += "// COV " + p.trace.file + ":" + loc.str() + " iter=" +
                   std::to_string(p.trace.iteration) + "\n";
        out += render_property(p);
        res.existing_properties.push_back({p.name, body});
    }
    return out;
}

} // namespace covloop
