// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <string>
#include <vector>

#include "covloop/sva.hpp"

namespace covloop {

struct LlmConfig {
    std::string endpoint;  // chat-completion style HTTP endpoint
    std::string model;
    int max_retries = 5;
    std::string api_key_env = "COVLOOP_API_KEY"; // credential comes from the environment
    std::string prompt_dir;                      // overrides the built-in prompt templates
};

LlmConfig llm_config_from_file(const std::string& path);

/// Sends one prompt, returns the raw completion text. Throws
/// BackendUnavailable on transport failure.
using LlmTransport = std::function<std::string(const std::string& prompt)>;

struct GenerationBackend {
    enum class Mode { Template, Llm };

    Mode mode = Mode::Template;
    LlmConfig config;
    LlmTransport transport; // injection point; defaults to HTTP when empty
};

/// Builds the full prompt for one hole: the analyzer record and the resource
/// inventory substituted into the prompt templates.
std::string build_prompt(const HoleContext& ctx, const SvaResources& res, const LlmConfig& config);

std::string default_analyzer_prompt();
std::string default_generator_prompt();

/// Parses a completion into candidate properties. Accepts raw SVA text with
/// property blocks or a JSON object {"properties": ["...", ...]}.
std::vector<SvaProperty> parse_llm_response(const std::string& response);

struct LlmResult {
    std::vector<SvaProperty> properties;
    bool used_fallback = false;
    std::string fallback_reason;
    std::vector<std::string> rejected; // every rejected candidate, for audit
};

/// Propose-critique-repair loop: validates each candidate set, feeds the
/// failure back to the backend, and retries up to max_retries. Throws
/// ValidationExhausted once retries are spent.
std::vector<SvaProperty> llm_generate_strict(const HoleContext& ctx, const SvaResources& res,
                                             const GenerationBackend& backend,
                                             const GenerateOptions& opts = {});

/// Like llm_generate_strict, but retry exhaustion or transport failure falls
/// back to the deterministic template path and records that it did.
LlmResult llm_generate(const HoleContext& ctx, const SvaResources& res,
                       const GenerationBackend& backend, const GenerateOptions& opts = {});

} // namespace covloop
