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

#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgap/providers.hpp"

namespace kgap {

enum class Criterion { Length, Specificity, Jargon, Ambiguity, Intent, KnowledgeLevel, Format };
enum class Verdict { Easy, Difficult, Indeterminate };

std::string_view to_string(Criterion criterion);
std::string_view to_string(Verdict verdict);

struct CriterionVerdict {
    Criterion criterion = Criterion::Length;
    Verdict verdict = Verdict::Indeterminate;
    std::string evidence;

    friend bool operator==(const CriterionVerdict&, const CriterionVerdict&) = default;
};

/// Case-insensitive term list. Entries with spaces match as phrases on word
/// boundaries; single words match whole words.
class Lexicon {
public:
    Lexicon() = default;
    explicit Lexicon(const std::vector<std::string>& entries);
    static Lexicon load(const std::filesystem::path& path);

    bool contains_word(std::string_view word) const;
    /// First entry found in `query`, or empty.
    std::string first_match(std::string_view query) const;
    std::size_t size() const noexcept { return words_.size() + phrases_.size(); }

private:
    std::set<std::string> words_;
    std::vector<std::string> phrases_;
};

std::vector<std::string> default_jargon_terms();
std::vector<std::string> default_common_words();

struct JargonOptions {
    Lexicon jargon{default_jargon_terms()};
    Lexicon common{default_common_words()};
    /// Minimum run of uppercase letters that marks an acronym.
    std::size_t acronym_min_run = 2;
};

/// Words are whitespace-separated: 1-3 Easy, more than 6 Difficult, 4-6 Indeterminate.
CriterionVerdict classify_length(std::string_view query);

/// Difficult on a lexicon hit or an acronym (an uppercase run of at least
/// `acronym_min_run` letters; ignored when the whole query is upper case).
/// Easy when every word is common. Indeterminate otherwise.
CriterionVerdict classify_jargon(std::string_view query, const JargonOptions& options = {});

/// Difficult on a hypothetical marker or on two or more clauses that each
/// carry a question word. Easy for a keyword search (no question word and no
/// auxiliary verb) or a single wh-question. Indeterminate otherwise.
CriterionVerdict classify_format(std::string_view query);

/// Majority over non-Indeterminate verdicts; a tie or no evidence is Easy.
Verdict combine_verdicts(std::span<const CriterionVerdict> verdicts);

/// {0} = query, {1} = rubric for the criterion.
inline constexpr std::string_view kJudgmentTemplate =
    "Classify the search query '{0}' as Easy or Difficult. {1} Reply with one word: Easy or Difficult.";

/// Rubric line used in the judgment prompt for an LLM-judged criterion.
std::string_view judgment_rubric(Criterion criterion);

/// Reads "Easy"/"Difficult" from the first word of a judge completion.
Verdict parse_judgment(std::string_view completion);

struct ClassifierConfig {
    JargonOptions jargon;
    /// When set, Specificity, Ambiguity, Intent and KnowledgeLevel are judged
    /// by prompting this provider.
    GenerationProvider* judge = nullptr;
    GenerationParams params{};
};

struct ComplexityReport {
    std::string query;
    std::vector<CriterionVerdict> verdicts;
    Verdict final = Verdict::Easy;
    std::vector<std::string> warnings;
};

ComplexityReport classify(std::string_view query, const ClassifierConfig& config = {});

/// One JSON line: {"query_id", "query", "final", "verdicts": {...}, "warnings"}.
void write_complexity_record(std::ostream& out, std::string_view query_id, const ComplexityReport& report);

}  // namespace kgap
