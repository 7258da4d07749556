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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgap/answer.hpp"
#include "kgap/corpus.hpp"
#include "kgap/queries.hpp"
#include "kgap/simulator.hpp"

namespace kgap {

/// Relevance judgments: query id -> (doc id -> grade >= 1).
class Qrels {
public:
    /// Whitespace-separated "query doc grade" or TREC "query iter doc grade"
    /// lines. Grade 0 judgments are read and dropped.
    static Qrels parse(std::istream& in, std::string_view source_name = "<qrels>");
    static Qrels load(const std::filesystem::path& path);

    void add(const std::string& query_id, const std::string& doc_id, int grade);
    const std::map<std::string, std::map<std::string, int>>& judgments() const noexcept { return judgments_; }
    bool has_query(const std::string& query_id) const { return judgments_.count(query_id) != 0; }
    /// Relevant doc ids for a query, ascending.
    std::vector<std::string> relevant(const std::string& query_id) const;

    /// Throws DataError if a doc id is not in the corpus or a query id is not in `queries`.
    void validate(const Corpus& corpus, std::span<const QueryRecord> queries) const;
    void write(std::ostream& out) const;

private:
    std::map<std::string, std::map<std::string, int>> judgments_;
};

class Removal {
public:
    static Removal all() { return Removal(1.0, true); }
    /// f in (0, 1]; throws ConfigError otherwise.
    static Removal fraction(double f);

    bool is_all() const noexcept { return all_; }
    double value() const noexcept { return fraction_; }
    /// Documents removed out of `relevant`: all, or ceil(f * n).
    std::size_t count_for(std::size_t relevant) const;
    std::string describe() const;

private:
    Removal(double f, bool all) : fraction_(f), all_(all) {}
    double fraction_;
    bool all_;
};

struct AblationPlan {
    std::set<std::string> ablated_query_ids;
    Removal removal = Removal::all();
    /// Per ablated query, the doc ids to remove (lowest ids first).
    std::map<std::string, std::vector<std::string>> removed_docs;

    std::set<std::string> all_removed() const;
};

/// Throws DataError for a query id absent from the qrels.
AblationPlan plan_ablation(const Qrels& qrels, std::span<const std::string> query_ids, Removal removal);

struct McqOptions {
    LoopConfig loop{};
    /// Run the full descent instead of answering the seed only; a gap
    /// anywhere in the trace then counts as a predicted gap.
    bool full_depth = false;
    /// Include the alternative-query round (offline sub-query reformulation).
    bool use_alt_queries = true;
    double min_overlap = kDefaultMinOverlap;
    NoAnswerPolicy policy{};
    /// Needed only with full_depth.
    GenerationProvider* followups = nullptr;
};

struct McqRow {
    std::string query_id;
    bool ablated = false;
    bool predicted_gap = false;
    std::size_t removed_docs = 0;
    std::string root_answer;

    friend bool operator==(const McqRow&, const McqRow&) = default;
};

struct McqResult {
    std::vector<McqRow> rows;  // query file order
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t false_negatives = 0;
    std::size_t true_negatives = 0;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f1;
    std::optional<double> false_positive_rate;

    friend bool operator==(const McqResult&, const McqResult&) = default;
};

/// Fills the counts and derived rates from `rows`.
void score_mcq(McqResult& result);

/// Offline missing-content evaluation: index the corpus, tombstone the
/// planned documents, simulate every query with the index adapter and the
/// extractive answerer, and score predicted gaps against the ablated labels.
McqResult run_mcq_eval(const Corpus& corpus, const Qrels& qrels, std::span<const QueryRecord> queries,
                       const AblationPlan& plan, const McqOptions& options = {});

std::string render_mcq_json(const McqResult& result, const AblationPlan& plan);
std::string render_mcq_table(const McqResult& result);

struct SyntheticSpec {
    std::size_t queries = 20;
    std::size_t distractors = 200;
    std::size_t relevant_per_query = 1;
    std::uint64_t seed = 7;
};

struct SyntheticCollection {
    Corpus corpus;
    std::vector<QueryRecord> queries;
    Qrels qrels;
};

/// Each query asks for an attribute of a made-up entity. Its relevant
/// documents are the only ones stating that attribute of that entity;
/// distractors reuse the vocabulary without ever pairing the two.
SyntheticCollection generate_synthetic_collection(const SyntheticSpec& spec = {});

}  // namespace kgap
