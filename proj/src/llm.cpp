// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#include "covloop/llm.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "httplib.h"
#include "json.hpp"

#include "covloop/errors.hpp"

namespace covloop {

namespace {

std::string read_file_or(const std::string& path, const std::string& fallback) {
    if (path.empty()) return fallback;
    std::ifstream in(path);
    if (!in) return fallback;
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::string replace_all(std::string text, const std::string& key, const std::string& value) {
    std::size_t pos = 0;
    while ((pos = text.find(key, pos)) != std::string::npos) {
        text.replace(pos, key.size(), value);
        pos += value.size();
    }
    return text;
}

std::string resources_inventory(const SvaResources& res) {
    nlohmann::ordered_json j;
    j["signals"] = res.signals;
    nlohmann::ordered_json macros = nlohmann::ordered_json::array();
    for (const SvaMacro& m : res.macros) macros.push_back({{"name", m.name}, {"body", m.body}});
    j["macros"] = std::move(macros);
    nlohmann::ordered_json params = nlohmann::ordered_json::array();
    for (const SvaParameter& p : res.parameters)
        params.push_back({{"name", p.name}, {"value", p.value}});
    j["parameters"] = std::move(params);
    std::vector<std::string> names;
    for (const ExistingProperty& e : res.existing_properties) names.push_back(e.name);
    j["existing_properties"] = names;
    return j.dump(2);
}

LlmTransport http_transport(const LlmConfig& config) {
    return [config](const std::string& prompt) -> std::string {
        std::string url = config.endpoint;
        std::size_t scheme = url.find("://");
        if (scheme == std::string::npos) throw BackendUnavailable("endpoint has no scheme");
        std::size_t host_start = scheme + 3;
        std::size_t path_start = url.find('/', host_start);
        std::string host = url.substr(0, path_start == std::string::npos ? url.size() : path_start);
        std::string path = path_start == std::string::npos ? "/" : url.substr(path_start);

        httplib::Client client(host);
        client.set_read_timeout(120, 0);
        httplib::Headers headers;
        if (!config.api_key_env.empty()) {
            const char* key = std::getenv(config.api_key_env.c_str());
            if (key && *key) headers.emplace("Authorization", std::string("Bearer ") + key);
        }
        nlohmann::json body;
        body["model"] = config.model;
        body["messages"] = {{{"role", "user"}, {"content", prompt}}};
        auto result = client.Post(path, headers, body.dump(), "application/json");
        if (!result) throw BackendUnavailable("no response from " + config.endpoint);
        if (result->status / 100 != 2)
            throw BackendUnavailable("HTTP " + std::to_string(result->status));
        try {
            nlohmann::json j = nlohmann::json::parse(result->body);
            if (j.contains("choices") && !j["choices"].empty())
                return j["choices"][0]["message"]["content"].get<std::string>();
            if (j.contains("content")) return j["content"].get<std::string>();
        } catch (const nlohmann::json::exception&) {
            return result->body; // a plain-text completion is acceptable
        }
        return result->body;
    };
}

} // namespace

LlmConfig llm_config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open LLM config '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("invalid LLM config JSON: ") + e.what());
    }
    LlmConfig c;
    c.endpoint = j.value("endpoint", "");
    c.model = j.value("model", "");
    c.max_retries = j.value("max_retries", 5);
    c.api_key_env = j.value("api_key_env", "COVLOOP_API_KEY");
    c.prompt_dir = j.value("prompt_dir", "");
    if (c.endpoint.empty()) throw ConfigError("LLM config needs an endpoint");
    return c;
}

std::string default_analyzer_prompt() {
    return "You are an RTL coverage hole analyzer with code-extraction duties.\n"
           "Goal: turn coordinate-based hole locations into a behavioral record.\n"
           "Step 1 - code extraction: take the exact RTL slice for each location.\n"
           "Step 2 - single behavior: one location maps to one behavior and one\n"
           "future property.\n"
           "Step 3 - pattern and consolidation: derive a logic_signature of\n"
           "{operation_pattern, signal_relation, timing_pattern} and merge holes\n"
           "whose signatures match.\n"
           "\n"
           "Hole record under analysis:\n"
           "{{CONTEXT_JSON}}\n";
}

std::string default_generator_prompt() {
    return "You write SystemVerilog properties for uncovered RTL locations from\n"
           "the JSON analysis record, using only the signals listed below.\n"
           "Step 1 - resource scan: the signals, macros and parameters available\n"
           "to the property are exactly these:\n"
           "{{RESOURCES}}\n"
           "Step 2 - single statement: the only allowed forms are\n"
           "(antecedent) |-> (single_outcome), (antecedent) |=> (single_outcome),\n"
           "or (antecedent) |-> ##N (single_outcome).\n"
           "Step 3 - timing style: for always_ff prefer |=> when an antecedent\n"
           "exists; for always_comb or continuous assignments use |-> in the\n"
           "same cycle.\n"
           "Reply with a complete property block:\n"
           "property <name>; ... endproperty\n"
           "assert property (<name>);\n";
}

std::string build_prompt(const HoleContext& ctx, const SvaResources& res, const LlmConfig& config) {
    std::string analyzer = read_file_or(
        config.prompt_dir.empty() ? "" : config.prompt_dir + "/hole_analyzer.txt",
        default_analyzer_prompt());
    std::string generator = read_file_or(
        config.prompt_dir.empty() ? "" : config.prompt_dir + "/sva_generator.txt",
        default_generator_prompt());
    std::string prompt = analyzer + "\n" + generator;
    prompt = replace_all(prompt, "{{CONTEXT_JSON}}", context_to_json(ctx).dump(2));
    prompt = replace_all(prompt, "{{RESOURCES}}", resources_inventory(res));
    return prompt;
}

std::vector<SvaProperty> parse_llm_response(const std::string& response) {
    std::string text = response;
    // JSON wrapper: {"properties": ["property ...", ...]}
    try {
        nlohmann::json j = nlohmann::json::parse(response);
        if (j.is_object() && j.contains("properties") && j["properties"].is_array()) {
            text.clear();
            for (const auto& p : j["properties"]) text += p.get<std::string>() + "\n";
        }
    } catch (const nlohmann::json::exception&) {
        // raw SVA text
    }
    std::vector<SvaProperty> props = parse_sva_properties(text);
    if (props.empty()) throw SvaParseError(1, "no property block found in response");
    return props;
}

std::vector<SvaProperty> llm_generate_strict(const HoleContext& ctx, const SvaResources& res,
                                             const GenerationBackend& backend,
                                             const GenerateOptions& opts) {
    if (backend.mode != GenerationBackend::Mode::Llm)
        return generate_property(ctx, res, opts);

    LlmTransport transport = backend.transport;
    if (!transport) transport = http_transport(backend.config);

    std::string prompt = build_prompt(ctx, res, backend.config);
    std::vector<std::string> rejected;
    int retries = backend.config.max_retries < 1 ? 1 : backend.config.max_retries;
    std::string critique;

    for (int attempt = 0; attempt < retries; ++attempt) {
        std::string response = transport(critique.empty() ? prompt : prompt + critique);
        try {
            std::vector<SvaProperty> props = parse_llm_response(response);
            for (SvaProperty& p : props) {
                validate_property(p, res);
                p.trace.iteration = 0;
                p.trace.locations = ctx.locations;
            }
            return props;
        } catch (const Error& e) {
            rejected.push_back(response);
            critique = "\nThe previous attempt was rejected: " + std::string(e.what()) +
                       "\nRegenerate a compliant property.\n";
        }
    }
    throw ValidationExhausted(retries, std::move(rejected));
}

LlmResult llm_generate(const HoleContext& ctx, const SvaResources& res,
                       const GenerationBackend& backend, const GenerateOptions& opts) {
    LlmResult out;
    if (backend.mode != GenerationBackend::Mode::Llm) {
        out.properties = generate_property(ctx, res, opts);
        return out;
    }
    try {
        out.properties = llm_generate_strict(ctx, res, backend, opts);
        return out;
    } catch (const ValidationExhausted& e) {
        out.rejected = e.rejected;
        out.used_fallback = true;
        out.fallback_reason = "validation_exhausted";
    } catch (const BackendUnavailable& e) {
        out.used_fallback = true;
        out.fallback_reason = std::string("backend_unavailable: ") + e.what();
    }
    out.properties = generate_property(ctx, res, opts);
    return out;
}

} // namespace covloop
