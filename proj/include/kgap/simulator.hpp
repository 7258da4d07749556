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

#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgap/answer.hpp"
#include "kgap/providers.hpp"
#include "kgap/queries.hpp"

namespace kgap {

/// Retrieval budgets of one session. The defaults give a per-node source
/// budget of 10 + 4 * 2 = 18.
struct LoopConfig {
    std::size_t top_k_initial = 10;
    std::size_t alt_queries_max = 4;
    std::size_t docs_per_alt = 2;
    std::size_t branching = 1;
    /// Nodes at this depth are answered but not expanded. 0 answers the seed only.
    std::size_t max_depth = 10;
    std::size_t followups_requested = 4;

    std::size_t source_budget() const noexcept { return top_k_initial + alt_queries_max * docs_per_alt; }
    /// Throws ConfigError on a zero top_k_initial, branching or followups_requested.
    void validate() const;

    friend bool operator==(const LoopConfig&, const LoopConfig&) = default;
};

class QueryReformulator {
public:
    virtual ~QueryReformulator() = default;
    virtual std::vector<std::string> reformulate(const std::string& query, std::size_t max_n) = 0;
};

/// {0} = query, {1} = maximum number of alternatives.
inline constexpr std::string_view kReformulationTemplate =
    "Suggest up to {1} alternative search queries that a user might try instead of '{0}'. "
    "Reply with one query per line.";

/// Prompts for reformulations; returns at most `max_n` distinct candidates,
/// none equal to `query` (compared case- and whitespace-insensitively).
std::vector<std::string> generate_alt_queries(const std::string& query, GenerationProvider& provider,
                                              std::size_t max_n,
                                              const PromptTemplate& prompt = PromptTemplate(std::string(kReformulationTemplate)),
                                              const GenerationParams& params = {});

class PromptedReformulator final : public QueryReformulator {
public:
    explicit PromptedReformulator(GenerationProvider& provider,
                                  PromptTemplate prompt = PromptTemplate(std::string(kReformulationTemplate)),
                                  GenerationParams params = {})
        : provider_(provider), prompt_(std::move(prompt)), params_(params) {}

    std::vector<std::string> reformulate(const std::string& query, std::size_t max_n) override {
        return generate_alt_queries(query, provider_, max_n, prompt_, params_);
    }

private:
    GenerationProvider& provider_;
    PromptTemplate prompt_;
    GenerationParams params_;
};

/// Offline reformulation: the query with one word dropped, for each word in
/// turn, skipping repeats and candidates without searchable tokens.
class SubqueryReformulator final : public QueryReformulator {
public:
    std::vector<std::string> reformulate(const std::string& query, std::size_t max_n) override;
};

struct NodeAttempt {
    Answer answer;
    std::vector<std::string> sources_consulted;  // distinct ids, consultation order
    std::vector<std::string> alt_queries_used;
};

/// Phase 1 answers from the top `top_k_initial` hits. If that fails, phase 2
/// retrieves `docs_per_alt` hits for each of up to `alt_queries_max`
/// reformulations, drops ids already seen, and answers once over the
/// combined pool. Provider errors are rethrown with the phase named.
NodeAttempt attempt_answer(const std::string& query, SearchProvider& search, Answerer& answerer,
                           QueryReformulator& reformulator, const LoopConfig& config);

struct ExplorationNode {
    std::string query;
    Answer answer;
    std::size_t depth = 0;
    std::vector<std::string> sources_consulted;
    std::vector<std::string> alt_queries_used;
    std::vector<ExplorationNode> children;
};

struct PathStep {
    std::string query;
    std::string answer;

    friend bool operator==(const PathStep&, const PathStep&) = default;
};

/// Where descent stopped: the chain from the seed to the unanswerable query.
struct KnowledgeGapRecord {
    std::vector<PathStep> path;
    std::string failing_query;
    std::size_t depth = 0;
    std::size_t sources_exhausted = 0;

    friend bool operator==(const KnowledgeGapRecord&, const KnowledgeGapRecord&) = default;
};

struct TraceTotals {
    std::size_t nodes = 0;
    std::size_t answers = 0;  // Answered nodes only
    std::size_t sources = 0;  // distinct over the whole trace
    std::size_t max_depth_reached = 0;

    friend bool operator==(const TraceTotals&, const TraceTotals&) = default;
};

struct SimulationTrace {
    std::string seed_query;
    std::string query_id;
    std::optional<std::string> category;
    std::optional<std::string> difficulty;
    std::optional<ExplorationNode> root;
    std::vector<KnowledgeGapRecord> gap_records;  // depth-first order
    TraceTotals totals;
    std::size_t max_depth = 0;  // the budget in force
    std::string sentinel{kDefaultSentinel};
    bool complete = true;
    std::string error;  // set when !complete
};

TraceTotals recompute_totals(const SimulationTrace& trace);

/// Structural invariants a trace must satisfy under `config`; returns one
/// message per violation, empty when the trace is well formed.
std::vector<std::string> check_trace(const SimulationTrace& trace, const LoopConfig& config);

struct SimulationProviders {
    SearchProvider& search;
    Answerer& answerer;
    QueryReformulator& reformulator;
    /// May be null only when config.max_depth == 0.
    GenerationProvider* followups = nullptr;
    PromptTemplate followup_prompt{std::string(kFollowupTemplate)};
    GenerationParams params{};
};

/// Depth-first descent from the seed. NoAnswer nodes close their branch and
/// add a gap record; Answered nodes above max_depth expand into the first
/// `branching` follow-ups. A provider error stops the run and returns the
/// partial trace with complete = false.
SimulationTrace run_simulation(const QueryRecord& seed, const SimulationProviders& providers,
                               const LoopConfig& config);
SimulationTrace run_simulation(const std::string& seed_query, const SimulationProviders& providers,
                               const LoopConfig& config);

struct TopicDepth {
    std::size_t depth = 0;
    bool censored = false;  // no gap: stopped by budget or by running out of follow-ups

    friend bool operator==(const TopicDepth&, const TopicDepth&) = default;
};

TopicDepth topic_depth(const SimulationTrace& trace);

/// Line-delimited trace format: one "node" record per node in depth-first
/// order followed by one "summary" record per simulation.
void write_trace(std::ostream& out, const SimulationTrace& trace);
std::vector<SimulationTrace> read_traces(std::istream& in, std::string_view source_name = "<traces>");
std::vector<SimulationTrace> load_traces(const std::filesystem::path& path);

/// Thread-safe collection of finished traces keyed by query id.
class TraceStore {
public:
    void put(SimulationTrace trace);
    std::optional<SimulationTrace> get(const std::string& query_id) const;
    std::size_t size() const;
    /// Traces in the order of `query_ids`; ids without a trace are skipped.
    std::vector<SimulationTrace> ordered(const std::vector<std::string>& query_ids) const;

private:
    mutable std::mutex mutex_;
    std::map<std::string, SimulationTrace> traces_;
};

}  // namespace kgap
