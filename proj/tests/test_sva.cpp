// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <regex>
#include <set>

#include "covloop/errors.hpp"
#include "covloop/parser.hpp"
#include "covloop/sva.hpp"
#include "support/paths.hpp"

using namespace covloop;

namespace {

SvaResources design_resources(const std::string& path, const std::string& sva_text = "") {
    std::vector<DesignUnit> units = parse_source(testpaths::slurp(path), path);
    SignalTable table = resolve_signals(units[0]);
    SvaResources res = scan_resources(sva_text);
    res.add_design(table);
    return res;
}

HoleContext selector_line3_context() {
    std::vector<DesignUnit> units =
        parse_source(testpaths::slurp(testpaths::corpus("selector.v")), "selector.v");
    SignalTable table = resolve_signals(units[0]);
    std::vector<CoverageTarget> targets = enumerate_targets(units[0], table);
    for (const CoverageTarget& t : targets)
        if (t.kind == TargetKind::Branch && t.span.start_line == 3)
            return derive_context(t, units[0], table);
    REQUIRE(false);
    return {};
}

} // namespace

TEST_CASE("resource scan inventories an existing property file") {
    SvaResources res = scan_resources(testpaths::slurp(testpaths::data("selector.sva")));
    REQUIRE(res.existing_properties.size() == 1);
    CHECK(res.existing_properties[0].name == "branch_captures_d1");
    CHECK(res.has_property_name("branch_captures_d1"));
}

TEST_CASE("resource scan of an empty file is empty, and scanning is idempotent") {
    SvaResources res = scan_resources("");
    CHECK(res.signals.empty());
    CHECK(res.macros.empty());
    CHECK(res.parameters.empty());
    CHECK(res.existing_properties.empty());

    std::string text = testpaths::slurp(testpaths::data("selector.sva"));
    SvaResources once = scan_resources(text);
    SvaResources twice = scan_resources(text);
    CHECK(once.existing_properties[0].normalized_body ==
          twice.existing_properties[0].normalized_body);
}

TEST_CASE("macros, parameters and signals are extracted; a line scanner agrees") {
    std::string text =
        "`define CLK @(posedge clk)\n"
        "`define RST_OFF disable iff (!rst_n)\n"
        "parameter WIDTH = 4;\n"
        "localparam DEPTH = 8;\n"
        "wire [3:0] bus;\n"
        "logic valid, ready;\n"
        "property p0;\n"
        "  `CLK (valid) |=> (ready);\n"
        "endproperty\n"
        "assert property (p0);\n";
    SvaResources res = scan_resources(text);
    CHECK(res.has_macro("CLK"));
    CHECK(res.has_macro("RST_OFF"));
    CHECK(res.has_parameter("WIDTH"));
    CHECK(res.has_parameter("DEPTH"));
    CHECK(res.has_signal("bus"));
    CHECK(res.has_signal("valid"));
    CHECK(res.has_signal("ready"));
    REQUIRE(res.existing_properties.size() == 1);

    // reference scanner: independent line-oriented regexes
    std::set<std::string> ref_macros, ref_params, ref_props;
    std::regex macro_re(R"(`define\s+(\w+))");
    std::regex param_re(R"((?:parameter|localparam)\s+(\w+))");
    std::regex prop_re(R"(property\s+(\w+))");
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::smatch m;
        if (std::regex_search(line, m, macro_re)) ref_macros.insert(m[1].str());
        else if (std::regex_search(line, m, param_re)) ref_params.insert(m[1].str());
        else if (std::regex_search(line, m, prop_re)) ref_props.insert(m[1].str());
    }
    CHECK(ref_macros == std::set<std::string>{"CLK", "RST_OFF"});
    for (const SvaMacro& m : res.macros) CHECK(ref_macros.count(m.name) == 1);
    for (const SvaParameter& p : res.parameters) CHECK(ref_params.count(p.name) == 1);
    for (const ExistingProperty& p : res.existing_properties) CHECK(ref_props.count(p.name) == 1);
}

TEST_CASE("missing endproperty raises SvaParseError with the line") {
    try {
        scan_resources("property broken;\n  (a) |=> (b);\n");
        FAIL("expected SvaParseError");
    } catch (const SvaParseError& e) {
        CHECK(e.line == 1);
    }
}

TEST_CASE("clocked branch hole generates the expected nonoverlap property") {
    HoleContext ctx = selector_line3_context();
    SvaResources res = design_resources(testpaths::corpus("selector.v"));
    std::vector<SvaProperty> props = generate_property(ctx, res);
    REQUIRE(props.size() == 1);
    const SvaProperty& p = props[0];
    CHECK(p.kind == PropertyKind::Assert);
    CHECK(p.clock_expr == "@(posedge clk)");
    CHECK(p.antecedent == "a && b");
    CHECK(p.op == ImplOp::Nonoverlap);
    CHECK(p.consequent == "c == $past(d1)");
    // byte-equivalent to the known-good hand-written property
    SvaResources ref = scan_resources(testpaths::slurp(testpaths::data("selector.sva")));
    CHECK(normalize_property_body(p) == ref.existing_properties[0].normalized_body);
}

TEST_CASE("true-precondition clocked adder hole generates the canonical sum property") {
    HoleContext ctx;
    ctx.module = "alu";
    ctx.input_type = "BRANCH_STRUCTURE";
    ctx.locations.push_back({60, 34, 60, 45});
    ctx.type = "BRANCH";
    ctx.code = "c <= a + b";
    ctx.behavior = "sum of a and b";
    ctx.statement_type = "case_statement";
    ctx.signals_in = {"a", "b"};
    ctx.signals_out = {"c"};
    ctx.timing = "always_ff";
    ctx.precondition = "1'b1";
    ctx.preconditions = {"1'b1"};
    ctx.clock = ClockSpec{"clk", true};
    ctx.reset = ResetSpec{"rst", true, false};
    ctx.lhs = "c";
    ctx.rhs_text = "a + b";
    ctx.has_assign = true;

    SvaResources res;
    res.signals = {"clk", "rst", "a", "b", "c"};
    std::vector<SvaProperty> props = generate_property(ctx, res);
    REQUIRE(props.size() == 1);
    CHECK(props[0].disable_expr == "!rst");
    std::string want = normalize_body_text("assert", "@(posedge clk)", "!rst",
                                           "1'b1 |=> c == $past(a + b)");
    CHECK(normalize_property_body(props[0]) == want);
}

TEST_CASE("combinational holes use same-cycle overlap implication") {
    std::vector<DesignUnit> units = parse_source(
        "module m(input x, input mask, output y); assign y = x & mask; endmodule", "m.v");
    SignalTable table = resolve_signals(units[0]);
    std::vector<CoverageTarget> targets = enumerate_targets(units[0], table);
    HoleContext ctx = derive_context(targets[0], units[0], table);
    SvaResources res;
    res.add_design(table);
    std::vector<SvaProperty> props = generate_property(ctx, res);
    REQUIRE(props.size() == 1);
    CHECK(props[0].op == ImplOp::Overlap);
    CHECK(props[0].clock_expr.empty());
    CHECK(props[0].antecedent == "1'b1");
    CHECK(props[0].consequent == "y == (x & mask)");
}

TEST_CASE("signals missing from the resources are an error") {
    HoleContext ctx = selector_line3_context();
    SvaResources res; // deliberately empty
    CHECK_THROWS_AS(generate_property(ctx, res), UnavailableSignal);
}

TEST_CASE("cover witnesses are emitted for branch holes on request") {
    HoleContext ctx = selector_line3_context();
    SvaResources res = design_resources(testpaths::corpus("selector.v"));
    GenerateOptions opts;
    opts.emit_cover = true;
    std::vector<SvaProperty> props = generate_property(ctx, res, opts);
    REQUIRE(props.size() == 2);
    CHECK(props[1].kind == PropertyKind::Cover);
    CHECK(props[1].antecedent == "a && b");
    CHECK(props[1].consequent == "1'b1");
    CHECK(props[1].op == ImplOp::Overlap);
}

TEST_CASE("a clocking macro in the SVA file takes precedence over the RTL clock") {
    HoleContext ctx = selector_line3_context();
    std::string sva = "`define CLK @(posedge clk)\n";
    SvaResources res = design_resources(testpaths::corpus("selector.v"), sva);
    std::vector<SvaProperty> props = generate_property(ctx, res);
    REQUIRE(props.size() == 1);
    CHECK(props[0].clock_expr == "`CLK");
}

TEST_CASE("regenerating a property already in the file emits nothing") {
    HoleContext ctx = selector_line3_context();
    std::string sva_text = testpaths::slurp(testpaths::data("selector.sva"));
    SvaResources res = design_resources(testpaths::corpus("selector.v"), sva_text);
    std::vector<SvaProperty> props = generate_property(ctx, res);
    std::vector<SvaProperty> named = name_and_dedup(props, res, 1);
    CHECK(named.empty());
}

TEST_CASE("colliding slugs get distinct suffixes across ten thousand generations") {
    SvaResources res;
    res.signals = {"a", "b"};
    std::vector<SvaProperty> props;
    for (int i = 0; i < 10'000; ++i) {
        SvaProperty p;
        p.name = "p_same_slug";
        p.antecedent = "a";
        p.op = ImplOp::Nonoverlap;
        // distinct bodies so dedup keeps all of them
        p.consequent = "b == " + std::to_string(i);
        props.push_back(std::move(p));
    }
    std::vector<SvaProperty> named = name_and_dedup(props, res, 42);
    REQUIRE(named.size() == 10'000);
    std::set<std::string> names;
    for (const SvaProperty& p : named) {
        CHECK(p.name.rfind("p_same_slug_", 0) == 0);
        CHECK(names.insert(p.name).second);
    }
}

TEST_CASE("a fixed seed reproduces identical names") {
    SvaResources res;
    res.signals = {"a", "b"};
    auto make = [&] {
        std::vector<SvaProperty> props;
        for (int i = 0; i < 5; ++i) {
            SvaProperty p;
            p.name = "p_x";
            p.antecedent = "a";
            p.consequent = "b == " + std::to_string(i);
            props.push_back(std::move(p));
        }
        return name_and_dedup(props, res, 99);
    };
    std::vector<SvaProperty> a = make(), b = make();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].name == b[i].name);
}

TEST_CASE("merging into an empty file produces exactly the property plus its trace") {
    SvaProperty p;
    p.name = "sum_of_a_and_b";
    p.kind = PropertyKind::Assert;
    p.clock_expr = "@(posedge clk)";
    p.disable_expr = "!rst";
    p.antecedent = "1'b1";
    p.op = ImplOp::Nonoverlap;
    p.consequent = "c == $past(a + b)";
    p.trace.file = "alu.v";
    p.trace.locations.push_back({60, 34, 60, 45});
    p.trace.iteration = 1;

    std::string merged = merge_into_file("", {p});
    CHECK(merged == "// COV alu.v:60.34-60.45 iter=1\n"
                    "property sum_of_a_and_b;\n"
                    "  @(posedge clk) disable iff (!rst)\n"
                    "  (1'b1) |=> (c == $past(a + b));\n"
                    "endproperty\n"
                    "assert property (sum_of_a_and_b);\n");

    SUBCASE("merging the same property again is a no-op") {
        CHECK(merge_into_file(merged, {p}) == merged);
    }
    SUBCASE("the merged file reparses and lists the inserted name") {
        SvaResources res = scan_resources(merged);
        REQUIRE(res.existing_properties.size() == 1);
        CHECK(res.existing_properties[0].name == "sum_of_a_and_b");
        std::vector<SvaProperty> back = parse_sva_properties(merged);
        REQUIRE(back.size() == 1);
        CHECK(back[0].antecedent == "1'b1");
        CHECK(back[0].op == ImplOp::Nonoverlap);
        CHECK(back[0].consequent == "c == $past(a + b)");
        CHECK(back[0].disable_expr == "!rst");
    }
}

TEST_CASE("merge refuses malformed existing files") {
    SvaProperty p;
    p.name = "q";
    p.antecedent = "a";
    p.consequent = "b";
    CHECK_THROWS_AS(merge_into_file("property broken;\n (a) |=> (b);\n", {p}), SvaParseError);
}

TEST_CASE("validation enforces the single-statement rules") {
    SvaResources res;
    res.signals = {"a", "b", "c"};
    SvaProperty p;
    p.name = "p";
    p.antecedent = "a";
    p.op = ImplOp::Nonoverlap;
    p.consequent = "b == $past(c)";
    CHECK_NOTHROW(validate_property(p, res));

    SvaProperty chain = p;
    chain.consequent = "b && c"; // conjunction chain, not a single outcome
    CHECK_THROWS_AS(validate_property(chain, res), SvaParseError);

    SvaProperty nested = p;
    nested.consequent = "b |=> c";
    CHECK_THROWS_AS(validate_property(nested, res), SvaParseError);

    SvaProperty unknown = p;
    unknown.consequent = "zz == 1";
    CHECK_THROWS_AS(validate_property(unknown, res), UnavailableSignal);

    SvaProperty bad_delay = p;
    bad_delay.op = ImplOp::OverlapDelay;
    bad_delay.delay = 0;
    CHECK_THROWS_AS(validate_property(bad_delay, res), SvaParseError);
}

TEST_CASE("normalization treats whitespace and wrapping parens as equal") {
    auto norm = [](const std::string& body) {
        return normalize_body_text("assert", "@(posedge clk)", "", body);
    };
    CHECK(norm("(a && b) |=> (c == $past(d1))") == norm("a && b |=> c == $past( d1 )"));
    CHECK(norm("(1'b1) |=> (c)") == norm("1'b1 |=> c"));
    CHECK(norm("a |-> b") != norm("a |=> b"));
    // cover and assert of the same body stay distinct
    CHECK(normalize_body_text("cover", "", "", "a |-> b") !=
          normalize_body_text("assert", "", "", "a |-> b"));
}

TEST_CASE("implication splitter handles the three forms") {
    ImplicationParts a = parse_implication("(x) |-> (y)");
    CHECK(a.op == ImplOp::Overlap);
    ImplicationParts b = parse_implication("x |=> y == $past(z)");
    CHECK(b.op == ImplOp::Nonoverlap);
    CHECK(b.consequent == "y == $past(z)");
    ImplicationParts c = parse_implication("x |-> ##3 y");
    CHECK(c.op == ImplOp::OverlapDelay);
    CHECK(c.delay == 3);
    CHECK_THROWS_AS(parse_implication("x == y"), SvaParseError);
    CHECK_THROWS_AS(parse_implication("a |-> b |=> c"), SvaParseError);
}
