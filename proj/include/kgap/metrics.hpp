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

#include <compare>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgap/simulator.hpp"

namespace kgap {

enum class ReviewVerdict { Correct, Incorrect };
std::string_view to_string(ReviewVerdict verdict);
ReviewVerdict review_verdict_from_string(std::string_view text);

/// Identifies a trace node: the simulation's seed query and the node depth.
/// With branching > 1 the first node at that depth (depth-first) is meant.
struct AnswerKey {
    std::string seed_query;
    std::size_t depth = 0;

    auto operator<=>(const AnswerKey&) const = default;
};

struct AnnotationRecord {
    AnswerKey key;
    ReviewVerdict verdict = ReviewVerdict::Correct;
    std::string reviewer;
    std::string timestamp;  // ISO-8601
};

bool is_iso8601_timestamp(std::string_view text);
std::string utc_timestamp_now();

/// The node `key` names, or null.
const ExplorationNode* resolve_answer_key(const AnswerKey& key, std::span<const SimulationTrace> traces);

/// Append-only manual-review store; the latest record per key wins.
class AnnotationStore {
public:
    /// Throws DataError when the key does not resolve, resolves to a
    /// NoAnswer node, or the timestamp is not ISO-8601.
    void record(AnnotationRecord annotation, std::span<const SimulationTrace> traces);

    std::size_t size() const noexcept { return records_.size(); }
    const std::vector<AnnotationRecord>& records() const noexcept { return records_; }
    std::map<AnswerKey, ReviewVerdict> effective() const;

    /// Replays a store file, validating each record against `traces`.
    static AnnotationStore load(const std::filesystem::path& path, std::span<const SimulationTrace> traces);
    static void append_to(const std::filesystem::path& path, const AnnotationRecord& annotation);
    static std::string to_line(const AnnotationRecord& annotation);

private:
    std::vector<AnnotationRecord> records_;
};

/// correct / annotated Answered nodes. Throws UndefinedMetric with no annotations.
double accuracy(const AnnotationStore& store, std::span<const SimulationTrace> traces);

enum class Grouping { Overall, ByDifficulty, ByCategory };

/// Mean distinct sources per simulation, per group. Traces without the
/// grouping label are left out (noted in `notes` when given). The overall
/// group is keyed "overall".
std::map<std::string, double> avg_sources(std::span<const SimulationTrace> traces, Grouping grouping,
                                          std::vector<std::string>* notes = nullptr);

struct DepthSummary {
    std::optional<double> mean;  // over uncensored traces
    std::size_t uncensored = 0;
    std::size_t censored = 0;
};

DepthSummary avg_depth(std::span<const SimulationTrace> traces);

struct GroupSummary {
    std::size_t simulations = 0;
    std::size_t answers = 0;
    std::size_t sources = 0;
    double avg_sources = 0.0;
    std::optional<double> avg_topic_depth;
    std::size_t censored = 0;
    std::size_t annotated = 0;
    std::size_t correct = 0;
    std::optional<double> accuracy;
};

struct ReportSummary {
    std::optional<double> accuracy;
    std::size_t annotated = 0;
    std::size_t correct = 0;
    std::optional<double> avg_topic_depth;
    std::size_t censored_simulations = 0;
    double avg_sources_per_simulation = 0.0;
    std::size_t simulations = 0;
    std::size_t answers = 0;
    std::size_t sources = 0;
    std::map<std::string, GroupSummary> by_difficulty;
    std::map<std::string, GroupSummary> by_category;
    std::vector<std::string> notes;
};

/// Aggregates complete traces (incomplete ones are skipped with a note).
/// Accuracy fields stay empty when `store` is null or holds nothing.
ReportSummary summarize(std::span<const SimulationTrace> traces, const AnnotationStore* store);

/// Two decimals with trailing zeros trimmed, keeping at least one: 10.9, 11.23, 11.0.
std::string format_ratio(double value);
/// Integer percent: 0.9288 -> "93%".
std::string format_percent(double fraction);
/// Value rounded to two decimals, for machine-readable output.
double round2(double value);

enum class ReportFormat { Json, Table };

std::string render_report(const ReportSummary& summary, ReportFormat format);
void emit_report(const ReportSummary& summary, ReportFormat format, const std::filesystem::path& path);

}  // namespace kgap
