// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "covloop/errors.hpp"
#include "covloop/llm.hpp"
#include "covloop/parser.hpp"
#include "support/paths.hpp"

using namespace covloop;

namespace {

const char* kSumPropertyText =
    "property sum_of_a_and_b;\n"
    "@(posedge clk) disable iff (!rst)\n"
    "1'b1 |=> c == $past(a + b);\n"
    "endproperty\n"
    "assert property (sum_of_a_and_b);\n";

HoleContext adder_context() {
    HoleContext ctx;
    ctx.module = "alu";
    ctx.input_type = "BRANCH_STRUCTURE";
    ctx.locations.push_back({60, 34, 60, 45});
    ctx.type = "BRANCH";
    ctx.code = "c <= a + b";
    ctx.behavior = "sum of inputs registered into c";
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
    return ctx;
}

SvaResources adder_resources() {
    SvaResources res;
    res.signals = {"clk", "rst", "a", "b", "c"};
    return res;
}

GenerationBackend stub_backend(LlmTransport transport, int retries = 3) {
    GenerationBackend b;
    b.mode = GenerationBackend::Mode::Llm;
    b.config.endpoint = "http://stub.invalid/v1/chat";
    b.config.model = "stub";
    b.config.max_retries = retries;
    b.transport = std::move(transport);
    return b;
}

} // namespace

TEST_CASE("a stub echoing a well-formed property is accepted and parsed") {
    int calls = 0;
    GenerationBackend backend = stub_backend([&](const std::string&) {
        ++calls;
        return std::string(kSumPropertyText);
    });
    std::vector<SvaProperty> props =
        llm_generate_strict(adder_context(), adder_resources(), backend);
    REQUIRE(props.size() == 1);
    CHECK(calls == 1);
    CHECK(props[0].name == "sum_of_a_and_b");
    CHECK(props[0].op == ImplOp::Nonoverlap);
    CHECK(props[0].antecedent == "1'b1");
    CHECK(props[0].consequent == "c == $past(a + b)");
    CHECK(props[0].disable_expr == "!rst");
}

TEST_CASE("a JSON-wrapped response parses the same way") {
    nlohmann::json wrapper = {{"properties", {kSumPropertyText}}};
    GenerationBackend backend = stub_backend([&](const std::string&) { return wrapper.dump(); });
    std::vector<SvaProperty> props =
        llm_generate_strict(adder_context(), adder_resources(), backend);
    REQUIRE(props.size() == 1);
    CHECK(props[0].name == "sum_of_a_and_b");
}

TEST_CASE("an unknown signal is rejected and the backend is retried with a critique") {
    int calls = 0;
    std::string last_prompt;
    GenerationBackend backend = stub_backend(
        [&](const std::string& prompt) -> std::string {
            ++calls;
            last_prompt = prompt;
            if (calls < 3)
                return "property bad;\n@(posedge clk)\n(1'b1) |=> (q == 1);\nendproperty\n"
                       "assert property (bad);\n";
            return kSumPropertyText;
        },
        5);
    std::vector<SvaProperty> props =
        llm_generate_strict(adder_context(), adder_resources(), backend);
    CHECK(calls == 3);
    REQUIRE(props.size() == 1);
    CHECK(props[0].name == "sum_of_a_and_b");
    CHECK(last_prompt.find("rejected") != std::string::npos); // critique fed back
}

TEST_CASE("retry exhaustion throws with every rejected candidate attached") {
    int calls = 0;
    GenerationBackend backend = stub_backend(
        [&](const std::string&) {
            ++calls;
            return std::string("no property here at all");
        },
        4);
    try {
        llm_generate_strict(adder_context(), adder_resources(), backend);
        FAIL("expected ValidationExhausted");
    } catch (const ValidationExhausted& e) {
        CHECK(calls == 4);
        CHECK(e.rejected.size() == 4);
    }
}

TEST_CASE("after exhaustion the pipeline path falls back to the template output") {
    GenerationBackend bad = stub_backend(
        [](const std::string&) {
            // multi-outcome consequent: violates single-statement enforcement
            return std::string("property chain;\n@(posedge clk)\n"
                               "(1'b1) |=> (c == 1 && a == 0);\nendproperty\n"
                               "assert property (chain);\n");
        },
        3);
    HoleContext ctx = adder_context();
    SvaResources res = adder_resources();
    LlmResult result = llm_generate(ctx, res, bad);
    CHECK(result.used_fallback);
    CHECK(result.fallback_reason == "validation_exhausted");
    CHECK(result.rejected.size() == 3);

    GenerationBackend template_only; // Mode::Template
    LlmResult direct = llm_generate(ctx, res, template_only);
    REQUIRE(result.properties.size() == direct.properties.size());
    for (std::size_t i = 0; i < result.properties.size(); ++i)
        CHECK(render_property(result.properties[i]) == render_property(direct.properties[i]));
}

TEST_CASE("transport failure surfaces as BackendUnavailable and the pipeline falls back") {
    GenerationBackend down = stub_backend(
        [](const std::string&) -> std::string { throw BackendUnavailable("connection refused"); },
        3);
    CHECK_THROWS_AS(llm_generate_strict(adder_context(), adder_resources(), down),
                    BackendUnavailable);
    LlmResult result = llm_generate(adder_context(), adder_resources(), down);
    CHECK(result.used_fallback);
    CHECK(result.fallback_reason.rfind("backend_unavailable", 0) == 0);
    CHECK_FALSE(result.properties.empty());
}

TEST_CASE("the prompt carries the context record and the resource inventory") {
    std::string seen;
    GenerationBackend backend = stub_backend([&](const std::string& prompt) {
        seen = prompt;
        return std::string(kSumPropertyText);
    });
    llm_generate_strict(adder_context(), adder_resources(), backend);
    CHECK(seen.find("\"module\": \"alu\"") != std::string::npos);
    CHECK(seen.find("\"c <= a + b\"") != std::string::npos);
    CHECK(seen.find("\"signals\"") != std::string::npos);
    CHECK(seen.find("single_outcome") != std::string::npos); // generator rules present
}

TEST_CASE("llm config files parse and validate") {
    std::string path =
        (std::filesystem::temp_directory_path() / "covloop_llm.json").string();
    {
        std::ofstream out(path);
        out << R"({"endpoint": "http://localhost:9999/v1/chat", "model": "m", "max_retries": 2})";
    }
    LlmConfig cfg = llm_config_from_file(path);
    CHECK(cfg.endpoint == "http://localhost:9999/v1/chat");
    CHECK(cfg.max_retries == 2);
    CHECK(cfg.api_key_env == "COVLOOP_API_KEY");
    std::remove(path.c_str());
    CHECK_THROWS_AS(llm_config_from_file("/nonexistent/llm.json"), ConfigError);
}
