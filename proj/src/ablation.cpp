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

#include "kgap/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/metrics.hpp"
#include "kgap/providers.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

Qrels Qrels::parse(std::istream& in, std::string_view source_name) {
    Qrels qrels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        auto t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
        const auto fields = split_words(t);
        if (fields.size() != 3 && fields.size() != 4) {
            throw DataError(where + ": expected 'query doc grade' or 'query iter doc grade'");
        }
        const std::string& query = fields[0];
        const std::string& doc = fields.size() == 4 ? fields[2] : fields[1];
        const std::string& grade_text = fields.back();
        int grade = 0;
        try {
            std::size_t used = 0;
            grade = std::stoi(grade_text, &used);
            if (used != grade_text.size()) throw std::invalid_argument(grade_text);
        } catch (const std::exception&) {
            throw DataError(where + ": grade '" + grade_text + "' is not an integer");
        }
        if (grade < 0) throw DataError(where + ": negative grade");
        if (grade == 0) continue;
        qrels.add(query, doc, grade);
    }
    return qrels;
}

Qrels Qrels::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read qrels file '" + path.string() + "'");
    return parse(in, path.string());
}

void Qrels::add(const std::string& query_id, const std::string& doc_id, int grade) {
    if (grade < 1) throw DataError("qrels grade must be at least 1");
    judgments_[query_id][doc_id] = grade;
}

std::vector<std::string> Qrels::relevant(const std::string& query_id) const {
    std::vector<std::string> out;
    auto it = judgments_.find(query_id);
    if (it == judgments_.end()) return out;
    for (const auto& [doc, grade] : it->second) out.push_back(doc);
    return out;
}

void Qrels::validate(const Corpus& corpus, std::span<const QueryRecord> queries) const {
    std::set<std::string> ids;
    for (const auto& q : queries) ids.insert(q.id);
    for (const auto& [query, docs] : judgments_) {
        if (!ids.count(query)) throw DataError("qrels names query '" + query + "' missing from the query file");
        for (const auto& [doc, grade] : docs) {
            if (corpus.find(doc) == nullptr) {
                throw DataError("qrels names document '" + doc + "' missing from the corpus");
            }
        }
    }
}

void Qrels::write(std::ostream& out) const {
    for (const auto& [query, docs] : judgments_) {
        for (const auto& [doc, grade] : docs) out << query << " 0 " << doc << " " << grade << "\n";
    }
}

Removal Removal::fraction(double f) {
    if (!(f > 0.0 && f <= 1.0)) throw ConfigError("removal fraction must be in (0, 1]");
    return Removal(f, false);
}

std::size_t Removal::count_for(std::size_t relevant) const {
    if (all_) return relevant;
    const double raw = fraction_ * static_cast<double>(relevant);
    return std::min(relevant, static_cast<std::size_t>(std::ceil(raw - 1e-9)));
}

std::string Removal::describe() const {
    if (all_) return "all";
    return "fraction " + format_ratio(fraction_);
}

std::set<std::string> AblationPlan::all_removed() const {
    std::set<std::string> out;
    for (const auto& [query, docs] : removed_docs) out.insert(docs.begin(), docs.end());
    return out;
}

AblationPlan plan_ablation(const Qrels& qrels, std::span<const std::string> query_ids, Removal removal) {
    AblationPlan plan;
    plan.removal = removal;
    for (const auto& id : query_ids) {
        if (!qrels.has_query(id)) throw DataError("cannot ablate query '" + id + "': it has no relevance judgments");
        plan.ablated_query_ids.insert(id);
        auto docs = qrels.relevant(id);
        docs.resize(removal.count_for(docs.size()));
        plan.removed_docs[id] = std::move(docs);
    }
    return plan;
}

void score_mcq(McqResult& r) {
    r.true_positives = r.false_positives = r.false_negatives = r.true_negatives = 0;
    for (const auto& row : r.rows) {
        if (row.predicted_gap && row.ablated) ++r.true_positives;
        else if (row.predicted_gap) ++r.false_positives;
        else if (row.ablated) ++r.false_negatives;
        else ++r.true_negatives;
    }
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
        if (den == 0) return std::nullopt;
        return static_cast<double>(num) / static_cast<double>(den);
    };
    r.precision = ratio(r.true_positives, r.true_positives + r.false_positives);
    r.recall = ratio(r.true_positives, r.true_positives + r.false_negatives);
    r.false_positive_rate = ratio(r.false_positives, r.false_positives + r.true_negatives);
    r.f1.reset();
    if (r.precision && r.recall && *r.precision + *r.recall > 0.0) {
        r.f1 = 2.0 * *r.precision * *r.recall / (*r.precision + *r.recall);
    }
}

namespace {

class NoReformulation final : public QueryReformulator {
public:
    std::vector<std::string> reformulate(const std::string&, std::size_t) override { return {}; }
};

}  // namespace

McqResult run_mcq_eval(const Corpus& corpus, const Qrels& qrels, std::span<const QueryRecord> queries,
                       const AblationPlan& plan, const McqOptions& options) {
    qrels.validate(corpus, queries);
    for (const auto& id : plan.ablated_query_ids) {
        if (!qrels.has_query(id)) throw DataError("plan ablates query '" + id + "' without relevance judgments");
    }
    auto removal = Index::build(corpus).remove_documents(plan.all_removed());
    IndexSearchAdapter search(std::move(removal.index));
    ExtractiveAnswerer answerer(options.min_overlap, options.policy);
    SubqueryReformulator subqueries;
    NoReformulation none;

    LoopConfig loop = options.loop;
    if (!options.full_depth) loop.max_depth = 0;
    if (!options.use_alt_queries) loop.alt_queries_max = 0;
    SimulationProviders providers{search, answerer,
                                  options.use_alt_queries ? static_cast<QueryReformulator&>(subqueries) : none,
                                  options.followups};

    McqResult result;
    for (const auto& query : queries) {
        SimulationTrace trace = run_simulation(query, providers, loop);
        if (!trace.complete) throw DataError("simulation for '" + query.id + "' failed: " + trace.error);
        McqRow row;
        row.query_id = query.id;
        row.ablated = plan.ablated_query_ids.count(query.id) != 0;
        if (auto it = plan.removed_docs.find(query.id); it != plan.removed_docs.end()) {
            row.removed_docs = it->second.size();
        }
        row.predicted_gap = options.full_depth ? !trace.gap_records.empty() : !trace.root->answer.is_answered();
        row.root_answer = trace.root->answer.text();
        result.rows.push_back(std::move(row));
    }
    score_mcq(result);
    return result;
}

namespace {

json optional_json(const std::optional<double>& v) { return v ? json(round2(*v)) : json("n/a"); }

}  // namespace

std::string render_mcq_json(const McqResult& result, const AblationPlan& plan) {
    json rows = json::array();
    for (const auto& r : result.rows) {
        rows.push_back({{"query_id", r.query_id},
                        {"label", r.ablated ? "ablated" : "intact"},
                        {"predicted", r.predicted_gap ? "gap" : "answered"},
                        {"removed_docs", r.removed_docs},
                        {"root_answer", r.root_answer}});
    }
    json out = {
        {"format", "kgap-mcq"},
        {"version", 1},
        {"removal", plan.removal.describe()},
        {"ablated_queries", plan.ablated_query_ids.size()},
        {"removed_documents", plan.all_removed().size()},
        {"rows", std::move(rows)},
        {"summary",
         {{"true_positives", result.true_positives},
          {"false_positives", result.false_positives},
          {"false_negatives", result.false_negatives},
          {"true_negatives", result.true_negatives},
          {"precision", optional_json(result.precision)},
          {"recall", optional_json(result.recall)},
          {"f1", optional_json(result.f1)},
          {"false_positive_rate", optional_json(result.false_positive_rate)}}},
    };
    return out.dump(2) + "\n";
}

std::string render_mcq_table(const McqResult& result) {
    std::ostringstream out;
    auto cell = [](const std::optional<double>& v) { return v ? format_ratio(*v) : std::string("n/a"); };
    out << "query_id\tlabel\tpredicted\tremoved_docs\n";
    for (const auto& r : result.rows) {
        out << r.query_id << '\t' << (r.ablated ? "ablated" : "intact") << '\t'
            << (r.predicted_gap ? "gap" : "answered") << '\t' << r.removed_docs << '\n';
    }
    out << "\nprecision\t" << cell(result.precision) << "\nrecall\t" << cell(result.recall) << "\nf1\t"
        << cell(result.f1) << "\nfalse_positive_rate\t" << cell(result.false_positive_rate) << "\n";
    return out.str();
}

namespace {

class WordMaker {
public:
    explicit WordMaker(std::uint64_t seed) : rng_(seed) {}

    std::string fresh(std::size_t syllables) {
        static constexpr std::string_view consonants = "bdfgklmnprstvz";
        static constexpr std::string_view vowels = "aeiou";
        for (;;) {
            std::string word;
            for (std::size_t i = 0; i < syllables; ++i) {
                word.push_back(consonants[pick(consonants.size())]);
                word.push_back(vowels[pick(vowels.size())]);
            }
            if (used_.insert(word).second) return word;
        }
    }

    std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }

private:
    std::mt19937_64 rng_;
    std::set<std::string> used_;
};

std::string capitalized(std::string word) {
    if (!word.empty()) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
    return word;
}

std::string padded(std::size_t n, std::size_t width) {
    std::string s = std::to_string(n);
    return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

}  // namespace

SyntheticCollection generate_synthetic_collection(const SyntheticSpec& spec) {
    WordMaker words(spec.seed);
    std::vector<std::string> entities, attributes, values;
    for (std::size_t i = 0; i < spec.queries; ++i) {
        entities.push_back(words.fresh(3));
        attributes.push_back(words.fresh(3));
        values.push_back(words.fresh(2));
    }
    std::vector<std::string> filler;
    for (std::size_t i = 0; i < 40; ++i) filler.push_back(words.fresh(2));
    auto filler_phrase = [&](std::size_t n) {
        std::string out;
        for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + filler[words.pick(filler.size())];
        return out;
    };

    SyntheticCollection c;
    std::vector<Document> docs;
    for (std::size_t i = 0; i < spec.queries; ++i) {
        const std::string id = "mcq" + padded(i + 1, 2);
        c.queries.push_back({id, attributes[i] + " of " + entities[i], std::nullopt, std::nullopt});
        for (std::size_t r = 0; r < spec.relevant_per_query; ++r) {
            const std::string doc_id = "rel-" + id + "-" + std::to_string(r + 1);
            std::string body = "The " + attributes[i] + " of " + entities[i] + " is " + values[i] + ". " +
                               capitalized(entities[i]) + " appears beside " + filler_phrase(3) + ".";
            docs.push_back({doc_id, capitalized(entities[i]), std::move(body), std::nullopt, std::nullopt});
            c.qrels.add(id, doc_id, 1);
        }
    }
    // Each distractor sentence names at most one query word, so its overlap
    // with any query stays at 1/3.
    for (std::size_t d = 0; d < spec.distractors; ++d) {
        std::string body;
        const std::size_t sentences = 2 + words.pick(2);
        for (std::size_t s = 0; s < sentences; ++s) {
            const std::size_t q = spec.queries == 0 ? 0 : words.pick(spec.queries);
            std::string subject = spec.queries == 0 ? filler[words.pick(filler.size())]
                                  : words.pick(2) == 0 ? entities[q]
                                                       : attributes[q];
            body += (s ? " " : "") + capitalized(subject) + " " + filler_phrase(4) + ".";
        }
        docs.push_back({"dis-" + padded(d + 1, 4), "Note " + std::to_string(d + 1), std::move(body), std::nullopt,
                        std::nullopt});
    }
    c.corpus = Corpus(std::move(docs));
    return c;
}

}  // namespace kgap
