// SPDX-FileCopyrightText: The covloop Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "covloop/span.hpp"

namespace covloop {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class SyntaxError : public Error {
public:
    SourceSpan span;
    std::vector<std::string> expected;

    SyntaxError(SourceSpan s, std::string got, std::vector<std::string> exp)
        : Error("syntax error at " + s.str() + ": got " + got + ", expected " + join(exp)),
          span(s), expected(std::move(exp)) {}

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out;
        for (size_t i = 0; i < v.size(); ++i) out += (i ? " | " : "") + v[i];
        return out.empty() ? "<nothing>" : out;
    }
};

class UnsupportedConstruct : public Error {
public:
    SourceSpan span;
    std::string construct;

    UnsupportedConstruct(SourceSpan s, std::string name)
        : Error("unsupported construct at " + s.str() + ": " + name),
          span(s), construct(std::move(name)) {}
};

class UndeclaredSignal : public Error {
public:
    std::string name;
    SourceSpan span;

    UndeclaredSignal(std::string n, SourceSpan s)
        : Error("undeclared signal '" + n + "' at " + s.str()), name(std::move(n)), span(s) {}
};

class SpanOutOfRange : public Error {
public:
    SourceSpan span;

    explicit SpanOutOfRange(SourceSpan s)
        : Error("span " + s.str() + " lies outside the source text"), span(s) {}
};

class SchemaError : public Error {
public:
    std::string pointer; // JSON pointer to the offending element
    std::string reason;

    SchemaError(std::string ptr, std::string why)
        : Error("schema error at '" + ptr + "': " + why),
          pointer(std::move(ptr)), reason(std::move(why)) {}
};

class UnknownTarget : public Error {
public:
    std::string id;

    explicit UnknownTarget(std::string target_id)
        : Error("coverage target '" + target_id + "' has no AST anchor"), id(std::move(target_id)) {}
};

class SvaParseError : public Error {
public:
    int line;

    SvaParseError(int l, const std::string& why)
        : Error("SVA parse error at line " + std::to_string(l) + ": " + why), line(l) {}
};

class UnavailableSignal : public Error {
public:
    std::string name;

    explicit UnavailableSignal(std::string n)
        : Error("signal '" + n + "' is not available in the SVA resources"), name(std::move(n)) {}
};

class UnsupportedTiming : public Error {
public:
    std::string timing;

    explicit UnsupportedTiming(std::string t)
        : Error("no property template for timing class '" + t + "'"), timing(std::move(t)) {}
};

class StateBudgetExceeded : public Error {
public:
    int bits_required;
    int budget;

    StateBudgetExceeded(std::string what, int required, int limit)
        : Error(what + " needs " + std::to_string(required) + " bits, budget is " +
                std::to_string(limit)),
          bits_required(required), budget(limit) {}
};

class UnknownSignal : public Error {
public:
    std::string name;

    explicit UnknownSignal(std::string n)
        : Error("property references unknown signal '" + n + "'"), name(std::move(n)) {}
};

class RecordingExhausted : public Error {
public:
    explicit RecordingExhausted(int iterations)
        : Error("replay recording exhausted after " + std::to_string(iterations) + " iterations") {}
};

class BackendUnavailable : public Error {
public:
    explicit BackendUnavailable(const std::string& why) : Error("LLM backend unavailable: " + why) {}
};

class ValidationExhausted : public Error {
public:
    std::vector<std::string> rejected; // every rejected candidate, for audit

    ValidationExhausted(int retries, std::vector<std::string> candidates)
        : Error("LLM output failed validation after " + std::to_string(retries) + " attempts"),
          rejected(std::move(candidates)) {}
};

class InvalidEdit : public Error {
public:
    std::string property_name;

    InvalidEdit(std::string prop, const std::string& why)
        : Error("edit of '" + prop + "' rejected: " + why), property_name(std::move(prop)) {}
};

class ReviewTimeout : public Error {
public:
    explicit ReviewTimeout(const std::string& path)
        : Error("timed out waiting for decisions file '" + path + "'") {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& why) : Error("configuration error: " + why) {}
};

} // namespace covloop
