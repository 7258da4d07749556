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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kgap/providers.hpp"

namespace kgap {

enum class NoAnswerMode { SentinelToken, LexiconScan, Both };

std::string_view to_string(NoAnswerMode mode);
NoAnswerMode no_answer_mode_from_string(std::string_view text);

inline constexpr std::string_view kDefaultSentinel = "NO_ANSWER";

std::vector<std::string> default_no_answer_lexicon();

/// How "cannot answer" is recognised: an instructed sentinel token, a scan
/// for natural uncertainty phrases, or both.
struct NoAnswerPolicy {
    NoAnswerMode mode = NoAnswerMode::Both;
    std::string sentinel{kDefaultSentinel};
    std::vector<std::string> lexicon = default_no_answer_lexicon();
};

/// One phrase per line; blank lines and lines starting with '#' skipped.
std::vector<std::string> load_phrase_list(const std::filesystem::path& path);

bool detect_no_answer(std::string_view text, const NoAnswerPolicy& policy);

enum class AnswerStatus { Answered, NoAnswer };
std::string_view to_string(AnswerStatus status);

class Answer {
public:
    /// Throws std::invalid_argument when `text` is blank or trips the policy.
    static Answer answered(std::string question, std::string text, std::vector<std::string> cited_sources,
                           const NoAnswerPolicy& policy);
    static Answer no_answer(std::string question, std::string text = {},
                            std::vector<std::string> cited_sources = {});

    const std::string& question() const noexcept { return question_; }
    const std::string& text() const noexcept { return text_; }
    AnswerStatus status() const noexcept { return status_; }
    bool is_answered() const noexcept { return status_ == AnswerStatus::Answered; }
    const std::vector<std::string>& cited_sources() const noexcept { return cited_; }

    friend bool operator==(const Answer&, const Answer&) = default;

private:
    Answer() = default;
    std::string question_;
    std::string text_;
    AnswerStatus status_ = AnswerStatus::NoAnswer;
    std::vector<std::string> cited_;
};

/// A template holding "{0}" and "{1}" exactly once each. Substitution is a
/// single pass, so placeholder-like text inside arguments is left alone.
class PromptTemplate {
public:
    explicit PromptTemplate(std::string text);
    std::string render(std::string_view arg0, std::string_view arg1) const;
    const std::string& text() const noexcept { return text_; }

private:
    std::string text_;
    std::size_t pos0_ = 0;
    std::size_t pos1_ = 0;
};

/// {0} = answer text, {1} = question.
inline constexpr std::string_view kFollowupTemplate =
    "Based on the answer '{0}' and the question '{1}', what are some potential short follow-up questions?";

/// {0} = question, {1} = newline-separated numbered documents.
inline constexpr std::string_view kGroundedAnswerTemplate =
    "Answer the question using only the numbered documents below. Cite the documents you use "
    "as [n].\n\nQuestion: {0}\n\nDocuments:\n{1}";

inline constexpr std::string_view kSentinelInstruction =
    "\n\nIf the documents do not contain the answer, reply with exactly ";

/// "[1] title\nsnippet" blocks separated by blank lines.
std::string format_numbered_documents(std::span<const SearchHit> docs);

/// The grounded prompt synthesize_answer sends.
std::string build_grounded_prompt(std::string_view question, std::span<const SearchHit> docs,
                                  const NoAnswerPolicy& policy);

/// Ids of hits referenced as [n] (1-based) in `completion`, first-mention order.
std::vector<std::string> parse_citations(std::string_view completion, std::span<const SearchHit> docs);

Answer synthesize_answer(const std::string& question, std::span<const SearchHit> docs,
                         GenerationProvider& provider, const NoAnswerPolicy& policy,
                         const GenerationParams& params = {});

/// One candidate per line with bullets and numbering stripped; lines without
/// any alphanumeric character are dropped.
std::vector<std::string> parse_question_list(std::string_view completion);

/// Requires answer.is_answered().
std::vector<std::string> generate_followups(const std::string& question, const Answer& answer,
                                            GenerationProvider& provider, std::size_t max_n,
                                            const PromptTemplate& prompt = PromptTemplate(std::string(kFollowupTemplate)),
                                            const GenerationParams& params = {});

/// |question tokens ∩ sentence tokens| / |question tokens| over distinct tokens.
double token_overlap(std::string_view question, std::string_view sentence);

inline constexpr double kDefaultMinOverlap = 0.5;

/// Picks the best-overlapping sentence across the hits (content when present,
/// else snippet); earlier hits and sentences win ties. Sentences that trip
/// the no-answer policy are never chosen.
Answer extractive_answer(const std::string& question, std::span<const SearchHit> docs,
                         double min_overlap, const NoAnswerPolicy& policy);

/// Turns a question plus retrieved hits into an Answer.
class Answerer {
public:
    virtual ~Answerer() = default;
    virtual Answer answer(const std::string& question, std::span<const SearchHit> docs) = 0;
};

class ExtractiveAnswerer final : public Answerer {
public:
    explicit ExtractiveAnswerer(double min_overlap = kDefaultMinOverlap, NoAnswerPolicy policy = {})
        : min_overlap_(min_overlap), policy_(std::move(policy)) {}

    Answer answer(const std::string& question, std::span<const SearchHit> docs) override {
        return extractive_answer(question, docs, min_overlap_, policy_);
    }

private:
    double min_overlap_;
    NoAnswerPolicy policy_;
};

class GenerativeAnswerer final : public Answerer {
public:
    GenerativeAnswerer(GenerationProvider& provider, NoAnswerPolicy policy = {}, GenerationParams params = {})
        : provider_(provider), policy_(std::move(policy)), params_(params) {}

    Answer answer(const std::string& question, std::span<const SearchHit> docs) override {
        return synthesize_answer(question, docs, provider_, policy_, params_);
    }

private:
    GenerationProvider& provider_;
    NoAnswerPolicy policy_;
    GenerationParams params_;
};

}  // namespace kgap
