// Copyright 2026 The kgap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "kgap/config.hpp"

#include <fstream>
#include <set>

#include "kgap/errors.hpp"

namespace kgap {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view to_string(EngineMode mode) {
    return mode == EngineMode::Offline ? "offline" : "live";
}

namespace {

void reject_unknown(const json& j, std::string_view where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(std::string(where) + " must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!allowed.count(key)) throw ConfigError("unknown config key '" + std::string(where) + "." + key + "'");
    }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
    if (auto it = j.find(key); it != j.end() && !it->is_null()) {
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config key '") + key + "' has the wrong type");
        }
    }
}

void read_path(const json& j, const char* key, const fs::path& base, std::optional<fs::path>& out) {
    std::string text;
    read(j, key, text);
    if (text.empty()) return;
    fs::path p(text);
    out = std::filesystem::absolute(p.is_absolute() ? p : base / p).lexically_normal();
}

void read_retry(const json& j, RetryPolicy& retry) {
    reject_unknown(j, "retry", {"timeout_ms", "max_retries", "initial_backoff_ms", "backoff_multiplier"});
    long long timeout = retry.timeout.count();
    long long backoff = retry.initial_backoff.count();
    read(j, "timeout_ms", timeout);
    read(j, "initial_backoff_ms", backoff);
    read(j, "max_retries", retry.max_retries);
    read(j, "backoff_multiplier", retry.backoff_multiplier);
    if (timeout <= 0 || backoff < 0 || retry.max_retries < 0 || retry.backoff_multiplier < 1.0) {
        throw ConfigError("retry policy values out of range");
    }
    retry.timeout = std::chrono::milliseconds(timeout);
    retry.initial_backoff = std::chrono::milliseconds(backoff);
}

json retry_json(const RetryPolicy& r) {
    return {{"timeout_ms", r.timeout.count()},
            {"max_retries", r.max_retries},
            {"initial_backoff_ms", r.initial_backoff.count()},
            {"backoff_multiplier", r.backoff_multiplier}};
}

SearchEndpoint read_search_endpoint(const json& j) {
    reject_unknown(j, "search.endpoint",
                   {"url", "query_param", "count_param", "credential_env", "credential_header", "mapping", "retry"});
    SearchEndpoint e;
    read(j, "url", e.url);
    read(j, "query_param", e.query_param);
    read(j, "count_param", e.count_param);
    read(j, "credential_env", e.credential_env);
    read(j, "credential_header", e.credential_header);
    if (auto it = j.find("mapping"); it != j.end()) {
        reject_unknown(*it, "search.endpoint.mapping", {"results", "id", "title", "snippet"});
        read(*it, "results", e.mapping.results);
        read(*it, "id", e.mapping.id);
        read(*it, "title", e.mapping.title);
        read(*it, "snippet", e.mapping.snippet);
    }
    if (auto it = j.find("retry"); it != j.end()) read_retry(*it, e.retry);
    if (e.url.empty()) throw ConfigError("search.endpoint.url is required");
    return e;
}

GenerationEndpoint read_generation_endpoint(const json& j) {
    reject_unknown(j, "generation.endpoint",
                   {"url", "model", "credential_env", "credential_header", "credential_prefix", "completion_path",
                    "refusal_path", "finish_reason_path", "retry"});
    GenerationEndpoint e;
    read(j, "url", e.url);
    read(j, "model", e.model);
    read(j, "credential_env", e.credential_env);
    read(j, "credential_header", e.credential_header);
    read(j, "credential_prefix", e.credential_prefix);
    read(j, "completion_path", e.completion_path);
    read(j, "refusal_path", e.refusal_path);
    read(j, "finish_reason_path", e.finish_reason_path);
    if (auto it = j.find("retry"); it != j.end()) read_retry(*it, e.retry);
    if (e.url.empty()) throw ConfigError("generation.endpoint.url is required");
    return e;
}

json opt_path(const std::optional<fs::path>& p) {
    return p ? json(p->generic_string()) : json(nullptr);
}

}  // namespace

EngineConfig EngineConfig::from_json(const json& j, const fs::path& base_dir) {
    reject_unknown(j, "config",
                   {"mode", "paths", "loop", "answerer", "no_answer", "prompts", "reformulator", "classifier",
                    "generation", "search", "concurrency"});
    EngineConfig c;

    std::string mode = "offline";
    read(j, "mode", mode);
    if (mode == "offline") c.mode = EngineMode::Offline;
    else if (mode == "live") c.mode = EngineMode::Live;
    else throw ConfigError("mode must be 'offline' or 'live', got '" + mode + "'");

    if (auto it = j.find("paths"); it != j.end()) {
        reject_unknown(*it, "paths", {"corpus", "index", "queries", "qrels", "traces", "annotations", "output_dir"});
        read_path(*it, "corpus", base_dir, c.paths.corpus);
        read_path(*it, "index", base_dir, c.paths.index);
        read_path(*it, "queries", base_dir, c.paths.queries);
        read_path(*it, "qrels", base_dir, c.paths.qrels);
        read_path(*it, "traces", base_dir, c.paths.traces);
        read_path(*it, "annotations", base_dir, c.paths.annotations);
        read_path(*it, "output_dir", base_dir, c.paths.output_dir);
    }

    if (auto it = j.find("loop"); it != j.end()) {
        reject_unknown(*it, "loop",
                       {"top_k_initial", "alt_queries_max", "docs_per_alt", "branching", "max_depth",
                        "followups_requested"});
        read(*it, "top_k_initial", c.loop.top_k_initial);
        read(*it, "alt_queries_max", c.loop.alt_queries_max);
        read(*it, "docs_per_alt", c.loop.docs_per_alt);
        read(*it, "branching", c.loop.branching);
        read(*it, "max_depth", c.loop.max_depth);
        read(*it, "followups_requested", c.loop.followups_requested);
    }

    if (auto it = j.find("answerer"); it != j.end()) {
        reject_unknown(*it, "answerer", {"kind", "min_overlap"});
        std::string kind = "extractive";
        read(*it, "kind", kind);
        if (kind == "extractive") c.answerer = AnswererKind::Extractive;
        else if (kind == "generative") c.answerer = AnswererKind::Generative;
        else throw ConfigError("answerer.kind must be 'extractive' or 'generative'");
        read(*it, "min_overlap", c.min_overlap);
    }

    if (auto it = j.find("no_answer"); it != j.end()) {
        reject_unknown(*it, "no_answer", {"mode", "sentinel", "lexicon"});
        std::string m{to_string(c.no_answer_mode)};
        read(*it, "mode", m);
        c.no_answer_mode = no_answer_mode_from_string(m);
        read(*it, "sentinel", c.sentinel);
        read_path(*it, "lexicon", base_dir, c.no_answer_lexicon);
    }

    if (auto it = j.find("prompts"); it != j.end()) {
        reject_unknown(*it, "prompts", {"followup", "reformulation"});
        read(*it, "followup", c.followup_prompt);
        read(*it, "reformulation", c.reformulation_prompt);
    }

    if (auto it = j.find("reformulator"); it != j.end() && !it->is_null()) {
        std::string kind;
        read(j, "reformulator", kind);
        if (kind == "subquery") c.reformulator = ReformulatorKind::Subquery;
        else if (kind == "generation") c.reformulator = ReformulatorKind::Generation;
        else throw ConfigError("reformulator must be 'subquery' or 'generation'");
    }

    if (auto it = j.find("classifier"); it != j.end()) {
        reject_unknown(*it, "classifier", {"jargon_lexicon", "common_words", "judge"});
        read_path(*it, "jargon_lexicon", base_dir, c.jargon_lexicon);
        read_path(*it, "common_words", base_dir, c.common_words);
        read(*it, "judge", c.classifier_judge);
    }

    if (auto it = j.find("generation"); it != j.end()) {
        reject_unknown(*it, "generation", {"temperature", "max_tokens", "fixture", "endpoint"});
        read(*it, "temperature", c.generation_params.temperature);
        read(*it, "max_tokens", c.generation_params.max_tokens);
        read_path(*it, "fixture", base_dir, c.generation_fixture);
        if (auto e = it->find("endpoint"); e != it->end() && !e->is_null()) {
            c.generation_endpoint = read_generation_endpoint(*e);
        }
    }

    if (auto it = j.find("search"); it != j.end()) {
        reject_unknown(*it, "search", {"endpoint"});
        if (auto e = it->find("endpoint"); e != it->end() && !e->is_null()) {
            c.search_endpoint = read_search_endpoint(*e);
        }
    }

    read(j, "concurrency", c.concurrency);
    return c;
}

EngineConfig EngineConfig::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
    json j;
    try {
        j = json::parse(in);
    } catch (const json::exception& e) {
        throw ConfigError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return from_json(j, path.parent_path());
}

json EngineConfig::to_json() const {
    json j;
    j["mode"] = std::string(kgap::to_string(mode));
    j["paths"] = {{"corpus", opt_path(paths.corpus)},
                  {"index", opt_path(paths.index)},
                  {"queries", opt_path(paths.queries)},
                  {"qrels", opt_path(paths.qrels)},
                  {"traces", opt_path(paths.traces)},
                  {"annotations", opt_path(paths.annotations)},
                  {"output_dir", opt_path(paths.output_dir)}};
    j["loop"] = {{"top_k_initial", loop.top_k_initial},
                 {"alt_queries_max", loop.alt_queries_max},
                 {"docs_per_alt", loop.docs_per_alt},
                 {"branching", loop.branching},
                 {"max_depth", loop.max_depth},
                 {"followups_requested", loop.followups_requested}};
    j["answerer"] = {{"kind", answerer == AnswererKind::Extractive ? "extractive" : "generative"},
                     {"min_overlap", min_overlap}};
    j["no_answer"] = {{"mode", std::string(kgap::to_string(no_answer_mode))},
                      {"sentinel", sentinel},
                      {"lexicon", opt_path(no_answer_lexicon)}};
    j["prompts"] = {{"followup", followup_prompt}, {"reformulation", reformulation_prompt}};
    j["reformulator"] = effective_reformulator() == ReformulatorKind::Subquery ? "subquery" : "generation";
    j["classifier"] = {{"jargon_lexicon", opt_path(jargon_lexicon)},
                       {"common_words", opt_path(common_words)},
                       {"judge", classifier_judge}};
    json gen = {{"temperature", generation_params.temperature},
                {"max_tokens", generation_params.max_tokens},
                {"fixture", opt_path(generation_fixture)},
                {"endpoint", nullptr}};
    if (generation_endpoint) {
        const auto& e = *generation_endpoint;
        gen["endpoint"] = {{"url", e.url},
                           {"model", e.model},
                           {"credential_env", e.credential_env},
                           {"credential_header", e.credential_header},
                           {"credential_prefix", e.credential_prefix},
                           {"completion_path", e.completion_path},
                           {"refusal_path", e.refusal_path},
                           {"finish_reason_path", e.finish_reason_path},
                           {"retry", retry_json(e.retry)}};
    }
    j["generation"] = gen;
    json search = {{"endpoint", nullptr}};
    if (search_endpoint) {
        const auto& e = *search_endpoint;
        search["endpoint"] = {{"url", e.url},
                              {"query_param", e.query_param},
                              {"count_param", e.count_param},
                              {"credential_env", e.credential_env},
                              {"credential_header", e.credential_header},
                              {"mapping",
                               {{"results", e.mapping.results},
                                {"id", e.mapping.id},
                                {"title", e.mapping.title},
                                {"snippet", e.mapping.snippet}}},
                              {"retry", retry_json(e.retry)}};
    }
    j["search"] = search;
    j["concurrency"] = concurrency;
    return j;
}

EngineConfig::ReformulatorKind EngineConfig::effective_reformulator() const {
    if (reformulator) return *reformulator;
    return mode == EngineMode::Offline ? ReformulatorKind::Subquery : ReformulatorKind::Generation;
}

NoAnswerPolicy EngineConfig::no_answer_policy() const {
    NoAnswerPolicy policy;
    policy.mode = no_answer_mode;
    policy.sentinel = sentinel;
    if (no_answer_lexicon) policy.lexicon = load_phrase_list(*no_answer_lexicon);
    return policy;
}

void EngineConfig::validate() const {
    loop.validate();
    if (concurrency == 0) throw ConfigError("concurrency must be at least 1");
    if (min_overlap < 0.0 || min_overlap > 1.0) throw ConfigError("answerer.min_overlap must lie in [0, 1]");
    if (sentinel.empty() && no_answer_mode != NoAnswerMode::LexiconScan) {
        throw ConfigError("no_answer.sentinel is empty");
    }
    PromptTemplate{followup_prompt};
    PromptTemplate{reformulation_prompt};
    if (mode == EngineMode::Offline) {
        if (search_endpoint || generation_endpoint) {
            throw ConfigError("offline mode forbids live endpoints; remove search.endpoint and generation.endpoint");
        }
        if (!paths.corpus && !paths.index) throw ConfigError("offline mode requires paths.corpus or paths.index");
    } else {
        if (!search_endpoint) throw ConfigError("live mode requires search.endpoint");
        if (!generation_endpoint) throw ConfigError("live mode requires generation.endpoint");
    }
}

}  // namespace kgap
