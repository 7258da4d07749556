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

#include "kgap/answer.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <stdexcept>

#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

std::string_view to_string(NoAnswerMode mode) {
    switch (mode) {
        case NoAnswerMode::SentinelToken: return "sentinel";
        case NoAnswerMode::LexiconScan: return "lexicon";
        case NoAnswerMode::Both: return "both";
    }
    return "both";
}

NoAnswerMode no_answer_mode_from_string(std::string_view text) {
    if (text == "sentinel") return NoAnswerMode::SentinelToken;
    if (text == "lexicon") return NoAnswerMode::LexiconScan;
    if (text == "both") return NoAnswerMode::Both;
    throw ConfigError("unknown no-answer mode '" + std::string(text) + "' (expected sentinel, lexicon or both)");
}

std::vector<std::string> default_no_answer_lexicon() {
    return {
        "i don't know",
        "i do not know",
        "cannot find",
        "unable to find",
        "no information available",
    };
}

std::vector<std::string> load_phrase_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read phrase list '" + path.string() + "'");
    std::vector<std::string> phrases;
    std::string line;
    while (std::getline(in, line)) {
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        phrases.emplace_back(t);
    }
    return phrases;
}

bool detect_no_answer(std::string_view text, const NoAnswerPolicy& policy) {
    const bool use_sentinel = policy.mode != NoAnswerMode::LexiconScan;
    const bool use_lexicon = policy.mode != NoAnswerMode::SentinelToken;
    if (use_sentinel && !policy.sentinel.empty() && text.find(policy.sentinel) != std::string_view::npos) {
        return true;
    }
    if (use_lexicon) {
        const std::string haystack = normalize_for_match(text);
        for (const auto& phrase : policy.lexicon) {
            const std::string needle = normalize_for_match(phrase);
            if (!needle.empty() && haystack.find(needle) != std::string::npos) return true;
        }
    }
    return false;
}

std::string_view to_string(AnswerStatus status) {
    return status == AnswerStatus::Answered ? "answered" : "no_answer";
}

Answer Answer::answered(std::string question, std::string text, std::vector<std::string> cited_sources,
                        const NoAnswerPolicy& policy) {
    if (trim(text).empty()) throw std::invalid_argument("an Answered answer needs non-empty text");
    if (detect_no_answer(text, policy)) {
        throw std::invalid_argument("an Answered answer must not match the no-answer detector");
    }
    Answer a;
    a.question_ = std::move(question);
    a.text_ = std::move(text);
    a.status_ = AnswerStatus::Answered;
    a.cited_ = std::move(cited_sources);
    return a;
}

Answer Answer::no_answer(std::string question, std::string text, std::vector<std::string> cited_sources) {
    Answer a;
    a.question_ = std::move(question);
    a.text_ = std::move(text);
    a.status_ = AnswerStatus::NoAnswer;
    a.cited_ = std::move(cited_sources);
    return a;
}

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
    auto once = [&](std::string_view placeholder) {
        auto first = text_.find(placeholder);
        if (first == std::string::npos || text_.find(placeholder, first + 1) != std::string::npos) {
            throw ConfigError("prompt template must contain " + std::string(placeholder) + " exactly once: '" +
                              text_ + "'");
        }
        return first;
    };
    pos0_ = once("{0}");
    pos1_ = once("{1}");
}

std::string PromptTemplate::render(std::string_view arg0, std::string_view arg1) const {
    const bool zero_first = pos0_ < pos1_;
    const std::size_t a = zero_first ? pos0_ : pos1_;
    const std::size_t b = zero_first ? pos1_ : pos0_;
    std::string out;
    out.reserve(text_.size() + arg0.size() + arg1.size());
    out.append(text_, 0, a);
    out.append(zero_first ? arg0 : arg1);
    out.append(text_, a + 3, b - a - 3);
    out.append(zero_first ? arg1 : arg0);
    out.append(text_, b + 3);
    return out;
}

std::string format_numbered_documents(std::span<const SearchHit> docs) {
    std::string out;
    for (std::size_t i = 0; i < docs.size(); ++i) {
        if (i > 0) out += "\n\n";
        out += "[" + std::to_string(i + 1) + "] " + docs[i].title + "\n" + docs[i].snippet;
    }
    if (docs.empty()) out = "(no documents)";
    return out;
}

std::string build_grounded_prompt(std::string_view question, std::span<const SearchHit> docs,
                                  const NoAnswerPolicy& policy) {
    static const PromptTemplate grounded{std::string(kGroundedAnswerTemplate)};
    std::string prompt = grounded.render(question, format_numbered_documents(docs));
    if (policy.mode != NoAnswerMode::LexiconScan) {
        prompt += std::string(kSentinelInstruction) + policy.sentinel + ".";
    }
    return prompt;
}

std::vector<std::string> parse_citations(std::string_view completion, std::span<const SearchHit> docs) {
    std::vector<std::string> cited;
    auto add = [&](std::size_t n) {
        if (n == 0 || n > docs.size()) return;
        const auto& id = docs[n - 1].id;
        if (std::find(cited.begin(), cited.end(), id) == cited.end()) cited.push_back(id);
    };
    std::size_t i = 0;
    while ((i = completion.find('[', i)) != std::string_view::npos) {
        auto close = completion.find(']', i);
        if (close == std::string_view::npos) break;
        auto inner = completion.substr(i + 1, close - i - 1);
        bool valid = !inner.empty() &&
                     std::all_of(inner.begin(), inner.end(), [](char c) {
                         return std::isdigit(static_cast<unsigned char>(c)) || c == ',' || c == ' ';
                     });
        if (valid) {
            std::size_t n = 0;
            bool have = false;
            for (char c : inner) {
                if (std::isdigit(static_cast<unsigned char>(c))) {
                    n = n * 10 + static_cast<std::size_t>(c - '0');
                    have = true;
                } else if (have) {
                    add(n);
                    n = 0;
                    have = false;
                }
            }
            if (have) add(n);
        }
        i = close + 1;
    }
    return cited;
}

Answer synthesize_answer(const std::string& question, std::span<const SearchHit> docs,
                         GenerationProvider& provider, const NoAnswerPolicy& policy,
                         const GenerationParams& params) {
    if (trim(question).empty()) throw std::invalid_argument("question is empty");
    std::string completion = provider.generate(build_grounded_prompt(question, docs, policy), params);
    if (trim(completion).empty() || detect_no_answer(completion, policy)) {
        return Answer::no_answer(question, std::move(completion));
    }
    auto cited = parse_citations(completion, docs);
    if (cited.empty()) {
        for (const auto& d : docs) cited.push_back(d.id);
    }
    return Answer::answered(question, std::move(completion), std::move(cited), policy);
}

namespace {

std::string_view strip_list_marker(std::string_view line) {
    line = trim(line);
    // Bullets: -, *, +, and U+2022.
    if (line.starts_with("\xE2\x80\xA2")) return trim(line.substr(3));
    if (!line.empty() && (line[0] == '-' || line[0] == '*' || line[0] == '+')) return trim(line.substr(1));
    // Numbering: "1." "1)" "1:" "(1)" "Q1:" "Q1."
    std::size_t i = 0;
    bool paren = false;
    if (i < line.size() && line[i] == '(') {
        paren = true;
        ++i;
    }
    if (i < line.size() && (line[i] == 'Q' || line[i] == 'q') && i + 1 < line.size() &&
        std::isdigit(static_cast<unsigned char>(line[i + 1]))) {
        ++i;
    }
    std::size_t digits = i;
    while (digits < line.size() && std::isdigit(static_cast<unsigned char>(line[digits]))) ++digits;
    if (digits > i && digits < line.size()) {
        char c = line[digits];
        if ((paren && c == ')') || (!paren && (c == '.' || c == ')' || c == ':'))) {
            return trim(line.substr(digits + 1));
        }
    }
    return line;
}

}  // namespace

std::vector<std::string> parse_question_list(std::string_view completion) {
    std::vector<std::string> out;
    for (const auto& line : split_lines(completion)) {
        auto q = strip_list_marker(line);
        if (q.empty() || !has_alnum(q)) continue;
        out.emplace_back(q);
    }
    return out;
}

std::vector<std::string> generate_followups(const std::string& question, const Answer& answer,
                                            GenerationProvider& provider, std::size_t max_n,
                                            const PromptTemplate& prompt, const GenerationParams& params) {
    if (!answer.is_answered()) throw std::invalid_argument("follow-ups need an Answered answer");
    auto questions = parse_question_list(provider.generate(prompt.render(answer.text(), question), params));
    if (questions.size() > max_n) questions.resize(max_n);
    return questions;
}

double token_overlap(std::string_view question, std::string_view sentence) {
    auto q = tokenize(question);
    std::set<std::string> qset(q.begin(), q.end());
    if (qset.empty()) return 0.0;
    auto s = tokenize(sentence);
    std::set<std::string> sset(s.begin(), s.end());
    std::size_t shared = 0;
    for (const auto& t : qset) shared += sset.count(t);
    return static_cast<double>(shared) / static_cast<double>(qset.size());
}

Answer extractive_answer(const std::string& question, std::span<const SearchHit> docs, double min_overlap,
                         const NoAnswerPolicy& policy) {
    double best = -1.0;
    std::string best_sentence;
    std::string best_source;
    for (const auto& hit : docs) {
        const std::string& text = hit.content ? *hit.content : hit.snippet;
        for (auto& sentence : split_sentences(text)) {
            if (detect_no_answer(sentence, policy)) continue;
            const double score = token_overlap(question, sentence);
            if (score > best) {
                best = score;
                best_sentence = std::move(sentence);
                best_source = hit.id;
            }
        }
    }
    if (best < 0.0 || best < min_overlap) return Answer::no_answer(question, policy.sentinel);
    return Answer::answered(question, std::move(best_sentence), {std::move(best_source)}, policy);
}

}  // namespace kgap
