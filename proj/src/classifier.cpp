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

#include "kgap/classifier.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "kgap/answer.hpp"
#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

std::string_view to_string(Criterion criterion) {
    switch (criterion) {
        case Criterion::Length: return "Length";
        case Criterion::Specificity: return "Specificity";
        case Criterion::Jargon: return "Jargon";
        case Criterion::Ambiguity: return "Ambiguity";
        case Criterion::Intent: return "Intent";
        case Criterion::KnowledgeLevel: return "KnowledgeLevel";
        case Criterion::Format: return "Format";
    }
    return "Length";
}

std::string_view to_string(Verdict verdict) {
    switch (verdict) {
        case Verdict::Easy: return "Easy";
        case Verdict::Difficult: return "Difficult";
        case Verdict::Indeterminate: return "Indeterminate";
    }
    return "Indeterminate";
}

namespace {

bool is_word_byte(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

/// Lowercased word with leading and trailing punctuation removed.
std::string clean_word(std::string_view word) {
    std::size_t b = 0;
    std::size_t e = word.size();
    while (b < e && !is_word_byte(static_cast<unsigned char>(word[b]))) ++b;
    while (e > b && !is_word_byte(static_cast<unsigned char>(word[e - 1]))) --e;
    return to_lower_ascii(word.substr(b, e - b));
}

std::vector<std::string> clean_words(std::string_view text) {
    std::vector<std::string> out;
    for (const auto& w : split_words(text)) {
        auto c = clean_word(w);
        if (!c.empty()) out.push_back(std::move(c));
    }
    return out;
}

std::string joined(const std::vector<std::string>& words) {
    std::string out = " ";
    for (const auto& w : words) out += w + " ";
    return out;
}

}  // namespace

Lexicon::Lexicon(const std::vector<std::string>& entries) {
    for (const auto& entry : entries) {
        auto words = clean_words(entry);
        if (words.empty()) continue;
        if (words.size() == 1) {
            words_.insert(words.front());
        } else {
            std::string phrase = joined(words);
            if (std::find(phrases_.begin(), phrases_.end(), phrase) == phrases_.end()) phrases_.push_back(phrase);
        }
    }
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return Lexicon(load_phrase_list(path)); }

bool Lexicon::contains_word(std::string_view word) const { return words_.count(clean_word(word)) != 0; }

std::string Lexicon::first_match(std::string_view query) const {
    const auto words = clean_words(query);
    for (const auto& w : words) {
        if (words_.count(w)) return w;
    }
    const std::string text = joined(words);
    for (const auto& p : phrases_) {
        if (text.find(p) != std::string::npos) return std::string(trim(p));
    }
    return {};
}

std::vector<std::string> default_jargon_terms() {
    return {
        "algorithm", "api", "bandwidth", "blockchain", "compiler", "cryptocurrency", "derivative",
        "encryption", "firmware", "genome", "hypervisor", "inhibitor", "inhibitors", "kernel",
        "kubernetes", "latency", "middleware", "mitochondria", "neural network", "pharmacokinetics",
        "polymorphism", "protocol", "quantum", "recursion", "regression", "serialization",
        "stochastic", "thermodynamics", "websockets", "amortization", "arbitrage", "hedging", "epigenetics",
        "photosynthesis", "substrate", "microservices", "containerization", "overclocking",
    };
}

std::vector<std::string> default_common_words() {
    return {
        "a", "about", "after", "all", "also", "an", "and", "any", "are", "as", "at", "baby", "bad",
        "be", "beach", "because", "bed", "best", "big", "bike", "bird", "birds", "black", "blue",
        "book", "books", "boy", "bread", "breakfast", "buy", "by", "cake", "can", "car", "cars", "cat",
        "cats", "cheap", "chicken", "child", "children", "city", "clean", "coffee", "cold", "color",
        "cook", "could", "day", "days", "dinner", "do", "does", "dog", "dogs", "door", "dress", "drink",
        "easy", "eat", "egg", "eggs", "family", "fast", "find", "fish", "flower", "flowers", "food",
        "for", "free", "friend", "friends", "from", "fun", "funny", "game", "games", "garden", "get",
        "gift", "girl", "go", "good", "green", "grow", "hair", "happy", "has", "have", "health",
        "healthy", "help", "her", "his", "holiday", "home", "hot", "hotel", "house", "how", "i", "ice",
        "idea", "ideas", "if", "in", "is", "it", "its", "job", "jobs", "just", "kids", "kitchen",
        "learn", "like", "live", "local", "long", "love", "lunch", "make", "man", "many", "map", "me",
        "money", "more", "morning", "most", "movie", "movies", "much", "music", "my", "near", "new",
        "news", "nice", "night", "no", "not", "now", "of", "old", "on", "one", "online", "open", "or",
        "our", "out", "park", "party", "people", "phone", "pizza", "place", "places", "plant", "plants",
        "play", "price", "recipe", "recipes", "red", "rain", "read", "room", "run", "school", "sell",
        "shoes", "shop", "should", "show", "simple", "sky", "sleep", "small", "snow", "so", "song",
        "songs", "sport", "sports", "store", "summer", "sun", "tea", "team", "tell", "that", "the",
        "their", "them", "there", "these", "they", "thing", "things", "this", "time", "tips", "to",
        "today", "tomorrow", "top", "town", "toy", "toys", "train", "travel", "tree", "trees", "tv",
        "up", "use", "vacation", "was", "watch", "water", "way", "we", "weather", "week", "weekend",
        "what", "when", "where", "which", "white", "who", "why", "will", "winter", "with", "woman",
        "word", "work", "world", "would", "write", "year", "yellow", "you", "your",
    };
}

CriterionVerdict classify_length(std::string_view query) {
    if (trim(query).empty()) throw std::invalid_argument("query is empty");
    const std::size_t n = split_words(query).size();
    const std::string count = std::to_string(n) + (n == 1 ? " word" : " words");
    if (n <= 3) return {Criterion::Length, Verdict::Easy, count + " (1-3)"};
    if (n > 6) return {Criterion::Length, Verdict::Difficult, count + " (more than 6)"};
    return {Criterion::Length, Verdict::Indeterminate, count + " (between the easy and difficult bands)"};
}

CriterionVerdict classify_jargon(std::string_view query, const JargonOptions& options) {
    const bool has_lower = std::any_of(query.begin(), query.end(),
                                       [](char c) { return std::islower(static_cast<unsigned char>(c)) != 0; });
    if (has_lower && options.acronym_min_run > 0) {
        for (const auto& word : split_words(query)) {
            std::size_t run = 0;
            for (char c : word) {
                run = std::isupper(static_cast<unsigned char>(c)) ? run + 1 : 0;
                if (run >= options.acronym_min_run) {
                    return {Criterion::Jargon, Verdict::Difficult, "acronym in '" + word + "'"};
                }
            }
        }
    }
    if (auto term = options.jargon.first_match(query); !term.empty()) {
        return {Criterion::Jargon, Verdict::Difficult, "jargon term '" + term + "'"};
    }
    std::vector<std::string> uncommon;
    for (const auto& w : clean_words(query)) {
        if (!options.common.contains_word(w)) uncommon.push_back(w);
    }
    if (uncommon.empty()) return {Criterion::Jargon, Verdict::Easy, "all words are common"};
    std::string list;
    for (const auto& w : uncommon) list += (list.empty() ? "" : ", ") + w;
    return {Criterion::Jargon, Verdict::Indeterminate, "no jargon found; uncommon words: " + list};
}

namespace {

const std::set<std::string>& question_words() {
    static const std::set<std::string> words{"what", "why", "how", "when", "where", "who", "whom", "whose", "which"};
    return words;
}

const std::set<std::string>& auxiliary_verbs() {
    static const std::set<std::string> words{"am",    "is",   "are",    "was",   "were",  "be",   "do",
                                             "does",  "did",  "can",    "could", "shall", "should",
                                             "will",  "would", "may",   "might", "must",  "has",  "have",
                                             "had"};
    return words;
}

const std::set<std::string>& clause_conjunctions() {
    static const std::set<std::string> words{"and", "or", "but", "then"};
    return words;
}

const std::vector<std::vector<std::string>>& hypothetical_markers() {
    static const std::vector<std::vector<std::string>> markers{
        {"what", "if"}, {"suppose"}, {"supposing"}, {"assuming"}, {"hypothetically"}};
    return markers;
}

}  // namespace

CriterionVerdict classify_format(std::string_view query) {
    if (trim(query).empty()) throw std::invalid_argument("query is empty");
    const auto tokens = tokenize(query);

    for (const auto& marker : hypothetical_markers()) {
        for (std::size_t i = 0; i + marker.size() <= tokens.size(); ++i) {
            if (std::equal(marker.begin(), marker.end(), tokens.begin() + static_cast<std::ptrdiff_t>(i))) {
                std::string text;
                for (const auto& m : marker) text += (text.empty() ? "" : " ") + m;
                return {Criterion::Format, Verdict::Difficult, "hypothetical marker '" + text + "'"};
            }
        }
    }

    // Clauses split at ',', ';' and coordinating conjunctions.
    std::vector<std::vector<std::string>> clauses(1);
    for (const auto& word : split_words(query)) {
        const auto cleaned = clean_word(word);
        if (clause_conjunctions().count(cleaned)) {
            clauses.emplace_back();
            continue;
        }
        for (auto& t : tokenize(word)) clauses.back().push_back(std::move(t));
        if (word.back() == ',' || word.back() == ';') clauses.emplace_back();
    }
    std::erase_if(clauses, [](const auto& c) { return c.empty(); });

    std::size_t question_clauses = 0;
    for (const auto& clause : clauses) {
        if (std::any_of(clause.begin(), clause.end(), [](const auto& t) { return question_words().count(t) != 0; })) {
            ++question_clauses;
        }
    }
    if (question_clauses >= 2) {
        return {Criterion::Format, Verdict::Difficult,
                std::to_string(question_clauses) + " clauses with question words"};
    }
    const bool has_question = question_clauses > 0;
    const bool has_aux =
        std::any_of(tokens.begin(), tokens.end(), [](const auto& t) { return auxiliary_verbs().count(t) != 0; });
    if (!has_question && !has_aux) return {Criterion::Format, Verdict::Easy, "keyword search"};
    if (!tokens.empty() && question_words().count(tokens.front())) {
        return {Criterion::Format, Verdict::Easy, "single simple '" + tokens.front() + "' question"};
    }
    return {Criterion::Format, Verdict::Indeterminate,
            has_question ? "question word not leading the query" : "question without a question word"};
}

Verdict combine_verdicts(std::span<const CriterionVerdict> verdicts) {
    std::size_t easy = 0;
    std::size_t difficult = 0;
    for (const auto& v : verdicts) {
        if (v.verdict == Verdict::Easy) ++easy;
        if (v.verdict == Verdict::Difficult) ++difficult;
    }
    return difficult > easy ? Verdict::Difficult : Verdict::Easy;
}

std::string_view judgment_rubric(Criterion criterion) {
    switch (criterion) {
        case Criterion::Specificity:
            return "Judge specificity: Easy if the query asks for something broad or general, Difficult if it "
                   "targets a narrow, niche or very detailed need.";
        case Criterion::Ambiguity:
            return "Judge clarity: Easy if the query reads one obvious way, Difficult if it needs extra context "
                   "to know what is meant.";
        case Criterion::Intent:
            return "Judge search intent: Easy for everyday lookups on popular topics, Difficult for deep "
                   "research, contested subjects or very detailed questions.";
        case Criterion::KnowledgeLevel:
            return "Judge the knowledge needed: Easy if anyone could follow the answer, Difficult if it takes "
                   "expertise in the field.";
        default:
            return "";
    }
}

Verdict parse_judgment(std::string_view completion) {
    auto tokens = tokenize(completion);
    if (tokens.empty()) return Verdict::Indeterminate;
    if (tokens.front() == "easy") return Verdict::Easy;
    if (tokens.front() == "difficult" || tokens.front() == "hard") return Verdict::Difficult;
    return Verdict::Indeterminate;
}

ComplexityReport classify(std::string_view query, const ClassifierConfig& config) {
    ComplexityReport report;
    report.query = std::string(query);
    report.verdicts.push_back(classify_length(query));
    report.verdicts.push_back(classify_jargon(query, config.jargon));
    report.verdicts.push_back(classify_format(query));

    if (config.judge != nullptr) {
        static const PromptTemplate judgment{std::string(kJudgmentTemplate)};
        for (Criterion c : {Criterion::Specificity, Criterion::Ambiguity, Criterion::Intent, Criterion::KnowledgeLevel}) {
            CriterionVerdict v{c, Verdict::Indeterminate, {}};
            try {
                const std::string reply = config.judge->generate(judgment.render(query, judgment_rubric(c)), config.params);
                v.verdict = parse_judgment(reply);
                if (v.verdict == Verdict::Indeterminate) {
                    report.warnings.push_back(std::string(to_string(c)) + ": unparseable judgment '" +
                                              std::string(trim(reply)) + "'");
                } else {
                    v.evidence = "judged " + std::string(to_string(v.verdict));
                }
            } catch (const ProviderError& e) {
                report.warnings.push_back(std::string(to_string(c)) + ": " + e.what());
            }
            report.verdicts.push_back(std::move(v));
        }
    }
    report.final = combine_verdicts(report.verdicts);
    return report;
}

void write_complexity_record(std::ostream& out, std::string_view query_id, const ComplexityReport& report) {
    json verdicts = json::object();
    for (const auto& v : report.verdicts) {
        verdicts[std::string(to_string(v.criterion))] = {{"verdict", to_string(v.verdict)}, {"evidence", v.evidence}};
    }
    json record = {
        {"query_id", query_id},
        {"query", report.query},
        {"final", to_string(report.final)},
        {"verdicts", std::move(verdicts)},
        {"warnings", report.warnings},
    };
    out << record.dump() << '\n';
}

}  // namespace kgap
