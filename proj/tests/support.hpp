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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "kgap/answer.hpp"
#include "kgap/corpus.hpp"
#include "kgap/metrics.hpp"
#include "kgap/providers.hpp"
#include "kgap/simulator.hpp"

namespace kgap::test {

inline std::filesystem::path source_dir() { return KGAP_SOURCE_DIR; }
inline std::filesystem::path fixture_dir() { return source_dir() / "data" / "fixture"; }

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("kgap-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}
    std::size_t below(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
    std::size_t between(std::size_t lo, std::size_t hi) {
        return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
    }
    bool chance(double p) { return std::bernoulli_distribution(p)(engine_); }
    template <typename T>
    const T& pick(const std::vector<T>& v) { return v[below(v.size())]; }
    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

// ------------------------------------------------------------------ BM25

/// Lowercase, split on anything that is not an ASCII letter or digit
/// (bytes >= 0x80 stay inside tokens).
inline std::vector<std::string> oracle_tokens(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : text) {
        const auto c = static_cast<unsigned char>(ch);
        const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80;
        if (keep) {
            cur.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : ch);
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

/// Scores every live document from scratch: N, df and the average length
/// are recounted over the live documents on each call.
inline std::vector<ScoredDoc> brute_force_bm25(const std::vector<Document>& docs,
                                               const std::set<std::string>& removed, const std::string& query,
                                               std::size_t k, double k1 = 1.2, double b = 0.75) {
    std::vector<const Document*> live;
    for (const auto& d : docs) {
        if (!removed.count(d.id)) live.push_back(&d);
    }
    std::vector<std::vector<std::string>> toks;
    double total = 0;
    for (const auto* d : live) {
        toks.push_back(oracle_tokens(d->body));
        total += static_cast<double>(toks.back().size());
    }
    const double n = static_cast<double>(live.size());
    const double avgdl = live.empty() ? 0.0 : total / n;
    std::set<std::string> terms;
    for (auto& t : oracle_tokens(query)) terms.insert(t);

    std::map<std::string, double> df;
    for (const auto& term : terms) {
        for (const auto& other : toks) df[term] += std::count(other.begin(), other.end(), term) > 0 ? 1 : 0;
    }

    std::vector<ScoredDoc> scored;
    for (std::size_t i = 0; i < live.size(); ++i) {
        double s = 0.0;
        bool matched = false;
        for (const auto& term : terms) {  // ascending term order
            const double tf = static_cast<double>(std::count(toks[i].begin(), toks[i].end(), term));
            if (tf == 0) continue;
            matched = true;
            const double idf = std::log((n - df[term] + 0.5) / (df[term] + 0.5) + 1.0);
            const double dl = static_cast<double>(toks[i].size());
            s += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / avgdl));
        }
        if (matched) scored.push_back({live[i]->id, s});
    }
    std::sort(scored.begin(), scored.end(), [](const ScoredDoc& a, const ScoredDoc& c) {
        if (a.score != c.score) return a.score > c.score;
        return a.doc_id < c.doc_id;
    });
    if (scored.size() > k) scored.resize(k);
    return scored;
}

/// Small vocabulary so terms repeat, df varies and exact ties occur.
inline std::vector<Document> random_documents(Rng& rng, std::size_t n_docs, std::size_t vocab = 60) {
    std::vector<std::string> words;
    for (std::size_t i = 0; i < vocab; ++i) words.push_back("w" + std::to_string(i));
    words.push_back("the");
    words.push_back("Caf\xc3\xa9");
    std::vector<Document> docs;
    for (std::size_t i = 0; i < n_docs; ++i) {
        Document d;
        d.id = "d" + std::to_string(rng.below(1'000'000)) + "-" + std::to_string(i);
        d.title = "doc " + std::to_string(i);
        if (i > 0 && rng.chance(0.05)) {
            d.body = docs[rng.below(docs.size())].body;  // duplicate body forces score ties
        } else {
            const std::size_t len = rng.between(1, 40);
            for (std::size_t w = 0; w < len; ++w) {
                if (w) d.body += rng.chance(0.1) ? ", " : " ";
                // Skewed choice: low-numbered words are frequent.
                const std::size_t idx = std::min(rng.below(words.size()), rng.below(words.size()));
                d.body += rng.chance(0.2) ? std::string("The") : words[idx];
            }
        }
        docs.push_back(std::move(d));
    }
    return docs;
}

inline std::string random_query(Rng& rng, std::size_t vocab = 60) {
    std::string q;
    const std::size_t len = rng.between(1, 5);
    for (std::size_t i = 0; i < len; ++i) {
        if (i) q += " ";
        q += rng.chance(0.1) ? std::string("THE") : "w" + std::to_string(rng.below(vocab + 10));
    }
    return q;
}

// ------------------------------------------------------------ simulation

/// Hit lists fixed per query by a hash, drawn from a shared id pool so
/// phase-2 retrieval overlaps phase 1.
class RandomSearch final : public SearchProvider {
public:
    RandomSearch(std::uint64_t seed, std::size_t pool) : seed_(seed), pool_(pool) {}
    std::vector<SearchHit> search(const std::string& query, std::size_t k) override {
        Rng rng(seed_ ^ std::hash<std::string>{}(query));
        const std::size_t n = std::min(k, rng.between(0, 14));
        std::vector<SearchHit> hits;
        for (std::size_t i = 0; i < n; ++i) {
            const std::string id = "s" + std::to_string(rng.below(pool_));
            hits.push_back({id, "title " + id, "snippet for " + id, std::nullopt, std::nullopt});
        }
        return hits;
    }

private:
    std::uint64_t seed_;
    std::size_t pool_;
};

/// Unique ids per query: every call returns fresh, never-seen documents.
class DisjointSearch final : public SearchProvider {
public:
    std::vector<SearchHit> search(const std::string& query, std::size_t k) override {
        std::vector<SearchHit> hits;
        for (std::size_t i = 0; i < k; ++i) {
            const std::string id = query + "#" + std::to_string(i);
            hits.push_back({id, id, "text " + id, std::nullopt, std::nullopt});
        }
        return hits;
    }
};

/// Answers with a probability fixed per (query, pool size).
class RandomAnswerer final : public Answerer {
public:
    RandomAnswerer(std::uint64_t seed, double p_answer) : seed_(seed), p_(p_answer) {}
    Answer answer(const std::string& question, std::span<const SearchHit> docs) override {
        Rng rng(seed_ ^ std::hash<std::string>{}(question) ^ (docs.size() * 0x9e3779b97f4a7c15ULL));
        if (docs.empty() || !rng.chance(p_)) return Answer::no_answer(question, "NO_ANSWER");
        return Answer::answered(question, "answer to " + question, {docs.front().id}, NoAnswerPolicy{});
    }

private:
    std::uint64_t seed_;
    double p_;
};

class NeverAnswerer final : public Answerer {
public:
    Answer answer(const std::string& question, std::span<const SearchHit>) override {
        return Answer::no_answer(question, "NO_ANSWER");
    }
};

/// Answers every question except those at the listed depths (read from
/// the "L<depth>" prefix each scripted question carries).
class DepthAnswerer final : public Answerer {
public:
    explicit DepthAnswerer(std::set<std::size_t> failing) : failing_(std::move(failing)) {}
    Answer answer(const std::string& question, std::span<const SearchHit> docs) override {
        std::size_t depth = 0;
        if (question.size() > 1 && question[0] == 'L') depth = std::stoul(question.substr(1));
        if (failing_.count(depth)) return Answer::no_answer(question, "NO_ANSWER");
        return Answer::answered(question, "fact about " + question,
                                docs.empty() ? std::vector<std::string>{} : std::vector<std::string>{docs[0].id},
                                NoAnswerPolicy{});
    }

private:
    std::set<std::size_t> failing_;
};

/// Follow-ups "L<d+1> <n> about <question>" for a question at depth d.
class LevelFollowups final : public GenerationProvider {
public:
    explicit LevelFollowups(std::size_t per_call = 3) : per_call_(per_call) {}
    std::string generate(const std::string& prompt, const GenerationParams&) override {
        prompts.push_back(prompt);
        const auto q0 = prompt.find("the question '") + 14;
        const auto q1 = prompt.find("', what are", q0);
        const std::string question = prompt.substr(q0, q1 - q0);
        std::size_t depth = 0;
        if (question.size() > 1 && question[0] == 'L') depth = std::stoul(question.substr(1));
        std::string out;
        for (std::size_t i = 0; i < per_call_; ++i) {
            out += std::to_string(i + 1) + ". L" + std::to_string(depth + 1) + " q" + std::to_string(i) + " of " +
                   question.substr(0, 40) + "\n";
        }
        return out;
    }
    std::vector<std::string> prompts;

private:
    std::size_t per_call_;
};

/// Random number of follow-ups (possibly none) per prompt.
class RandomFollowups final : public GenerationProvider {
public:
    explicit RandomFollowups(std::uint64_t seed) : seed_(seed) {}
    std::string generate(const std::string& prompt, const GenerationParams&) override {
        Rng rng(seed_ ^ std::hash<std::string>{}(prompt));
        std::string out;
        const std::size_t n = rng.between(0, 6);
        for (std::size_t i = 0; i < n; ++i) out += "- follow-up " + std::to_string(rng.below(100000)) + "?\n";
        if (rng.chance(0.1)) out += "\n   \n";
        return out;
    }

private:
    std::uint64_t seed_;
};

/// Alternatives "alt i of <query>", up to max_n (sometimes fewer).
class CountingReformulator final : public QueryReformulator {
public:
    std::vector<std::string> reformulate(const std::string& query, std::size_t max_n) override {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < max_n; ++i) out.push_back("alt " + std::to_string(i) + " of " + query);
        return out;
    }
};

// --------------------------------------------------------------- metrics

struct OracleMetrics {
    std::optional<double> accuracy;
    std::size_t annotated = 0;
    std::size_t correct = 0;
    std::map<std::string, double> avg_sources_overall;
    std::map<std::string, double> avg_sources_by_difficulty;
    std::map<std::string, double> avg_sources_by_category;
    std::optional<double> avg_depth;
    std::size_t censored = 0;
};

inline void oracle_collect(const ExplorationNode& n, std::vector<const ExplorationNode*>& out) {
    out.push_back(&n);
    for (const auto& c : n.children) oracle_collect(c, out);
}

/// Straight recomputation from the trees and the raw annotation list.
inline OracleMetrics oracle_metrics(const std::vector<SimulationTrace>& traces,
                                    const std::vector<AnnotationRecord>& annotations) {
    OracleMetrics m;
    // Latest verdict per key: scan backwards, first hit wins.
    std::map<std::pair<std::string, std::size_t>, ReviewVerdict> latest;
    for (auto it = annotations.rbegin(); it != annotations.rend(); ++it) {
        latest.emplace(std::make_pair(it->key.seed_query, it->key.depth), it->verdict);
    }
    for (const auto& [key, verdict] : latest) {
        const ExplorationNode* target = nullptr;
        for (const auto& t : traces) {
            if (t.seed_query != key.first || !t.root) continue;
            std::vector<const ExplorationNode*> nodes;
            oracle_collect(*t.root, nodes);
            for (const auto* n : nodes) {
                if (n->depth == key.second) {
                    target = n;
                    break;
                }
            }
            if (target) break;
        }
        if (!target || !target->answer.is_answered()) continue;
        ++m.annotated;
        if (verdict == ReviewVerdict::Correct) ++m.correct;
    }
    if (m.annotated) m.accuracy = static_cast<double>(m.correct) / static_cast<double>(m.annotated);

    auto distinct_sources = [](const SimulationTrace& t) {
        std::set<std::string> s;
        if (!t.root) return std::size_t{0};
        std::vector<const ExplorationNode*> nodes;
        oracle_collect(*t.root, nodes);
        for (const auto* n : nodes) s.insert(n->sources_consulted.begin(), n->sources_consulted.end());
        return s.size();
    };
    std::map<std::string, std::pair<double, double>> overall, by_diff, by_cat;
    double depth_sum = 0, uncensored = 0;
    for (const auto& t : traces) {
        const double src = static_cast<double>(distinct_sources(t));
        overall["overall"].first += src;
        overall["overall"].second += 1;
        if (t.difficulty) {
            by_diff[*t.difficulty].first += src;
            by_diff[*t.difficulty].second += 1;
        }
        if (t.category) {
            by_cat[*t.category].first += src;
            by_cat[*t.category].second += 1;
        }
        std::vector<const ExplorationNode*> nodes;
        if (t.root) oracle_collect(*t.root, nodes);
        const ExplorationNode* first_gap = nullptr;
        for (const auto* n : nodes) {  // depth-first order
            if (!n->answer.is_answered()) {
                first_gap = n;
                break;
            }
        }
        if (first_gap) {
            depth_sum += static_cast<double>(first_gap->depth);
            uncensored += 1;
        } else {
            ++m.censored;
        }
    }
    for (auto& [k, v] : overall) m.avg_sources_overall[k] = v.first / v.second;
    for (auto& [k, v] : by_diff) m.avg_sources_by_difficulty[k] = v.first / v.second;
    for (auto& [k, v] : by_cat) m.avg_sources_by_category[k] = v.first / v.second;
    if (uncensored > 0) m.avg_depth = depth_sum / uncensored;
    return m;
}

/// Runs `n` random scripted simulations with labels drawn from small sets.
inline std::vector<SimulationTrace> random_traces(Rng& rng, std::size_t n, LoopConfig config = {}) {
    std::vector<SimulationTrace> traces;
    const std::vector<std::string> difficulties{"easy", "difficult"};
    const std::vector<std::string> categories{"health", "travel", "tech"};
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t seed = rng.engine()();
        RandomSearch search(seed, rng.between(5, 60));
        RandomAnswerer answerer(seed + 1, 0.5 + 0.45 * static_cast<double>(rng.below(100)) / 100.0);
        CountingReformulator reformulator;
        RandomFollowups followups(seed + 2);
        SimulationProviders providers{search, answerer, reformulator, &followups};
        QueryRecord seed_query{"r" + std::to_string(i), "seed query " + std::to_string(i), std::nullopt,
                               std::nullopt};
        if (rng.chance(0.9)) seed_query.difficulty = rng.pick(difficulties);
        if (rng.chance(0.9)) seed_query.category = rng.pick(categories);
        traces.push_back(run_simulation(seed_query, providers, config));
    }
    return traces;
}

}  // namespace kgap::test
