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

#include "kgap/simulator.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

void LoopConfig::validate() const {
    if (top_k_initial == 0) throw ConfigError("loop.top_k_initial must be positive");
    if (branching == 0) throw ConfigError("loop.branching must be positive");
    if (followups_requested == 0) throw ConfigError("loop.followups_requested must be positive");
}

std::vector<std::string> generate_alt_queries(const std::string& query, GenerationProvider& provider,
                                              std::size_t max_n, const PromptTemplate& prompt,
                                              const GenerationParams& params) {
    if (trim(query).empty()) throw std::invalid_argument("query is empty");
    std::vector<std::string> out;
    if (max_n == 0) return out;
    const std::string completion = provider.generate(prompt.render(query, std::to_string(max_n)), params);
    std::set<std::string> seen{normalize_for_match(query)};
    for (auto& candidate : parse_question_list(completion)) {
        if (!seen.insert(normalize_for_match(candidate)).second) continue;
        out.push_back(std::move(candidate));
        if (out.size() == max_n) break;
    }
    return out;
}

std::vector<std::string> SubqueryReformulator::reformulate(const std::string& query, std::size_t max_n) {
    const auto words = split_words(query);
    std::vector<std::string> out;
    std::set<std::string> seen{normalize_for_match(query)};
    for (std::size_t drop = 0; drop < words.size() && out.size() < max_n; ++drop) {
        std::string candidate;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i == drop) continue;
            if (!candidate.empty()) candidate.push_back(' ');
            candidate += words[i];
        }
        if (tokenize(candidate).empty()) continue;
        if (!seen.insert(normalize_for_match(candidate)).second) continue;
        out.push_back(std::move(candidate));
    }
    return out;
}

namespace {

template <typename Fn>
auto in_phase(std::string_view phase, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const ProviderError& e) {
        throw e.annotated(phase);
    }
}

}  // namespace

NodeAttempt attempt_answer(const std::string& query, SearchProvider& search, Answerer& answerer,
                           QueryReformulator& reformulator, const LoopConfig& config) {
    if (trim(query).empty()) throw std::invalid_argument("query is empty");

    std::vector<SearchHit> pool;
    std::vector<std::string> sources;
    std::set<std::string> seen;
    auto absorb = [&](std::vector<SearchHit> hits) {
        for (auto& hit : hits) {
            if (!seen.insert(hit.id).second) continue;
            sources.push_back(hit.id);
            pool.push_back(std::move(hit));
        }
    };

    absorb(in_phase("phase 1 search", [&] { return search.search(query, config.top_k_initial); }));
    Answer first = in_phase("phase 1 answer", [&] { return answerer.answer(query, pool); });
    if (first.is_answered() || config.alt_queries_max == 0 || config.docs_per_alt == 0) {
        return {std::move(first), std::move(sources), {}};
    }

    auto alternatives = in_phase("phase 2 reformulation",
                                 [&] { return reformulator.reformulate(query, config.alt_queries_max); });
    if (alternatives.size() > config.alt_queries_max) alternatives.resize(config.alt_queries_max);
    for (const auto& alt : alternatives) {
        absorb(in_phase("phase 2 search '" + alt + "'", [&] { return search.search(alt, config.docs_per_alt); }));
    }
    Answer second = in_phase("phase 2 answer", [&] { return answerer.answer(query, pool); });
    return {std::move(second), std::move(sources), std::move(alternatives)};
}

namespace {

class Runner {
public:
    Runner(const SimulationProviders& providers, const LoopConfig& config, SimulationTrace& trace)
        : providers_(providers), config_(config), trace_(trace) {}

    std::optional<ExplorationNode> visit(const std::string& query, std::size_t depth) {
        std::optional<NodeAttempt> attempt;
        try {
            attempt = attempt_answer(query, providers_.search, providers_.answerer, providers_.reformulator, config_);
        } catch (const ProviderError& e) {
            fail(e, depth);
            return std::nullopt;
        }
        ExplorationNode node{query, std::move(attempt->answer), depth, std::move(attempt->sources_consulted),
                             std::move(attempt->alt_queries_used), {}};
        path_.push_back({query, node.answer.text()});

        if (!node.answer.is_answered()) {
            trace_.gap_records.push_back({path_, query, depth, node.sources_consulted.size()});
        } else if (depth < config_.max_depth) {
            std::vector<std::string> followups;
            try {
                followups = generate_followups(query, node.answer, *providers_.followups,
                                               config_.followups_requested, providers_.followup_prompt,
                                               providers_.params);
            } catch (const ProviderError& e) {
                fail(e.annotated("follow-up generation"), depth);
            }
            if (followups.size() > config_.branching) followups.resize(config_.branching);
            for (const auto& next : followups) {
                if (failed_) break;
                if (auto child = visit(next, depth + 1)) node.children.push_back(std::move(*child));
            }
        }
        path_.pop_back();
        return node;
    }

private:
    void fail(const ProviderError& e, std::size_t depth) {
        failed_ = true;
        trace_.complete = false;
        trace_.error = "depth " + std::to_string(depth) + ": " + e.what();
    }

    const SimulationProviders& providers_;
    const LoopConfig& config_;
    SimulationTrace& trace_;
    std::vector<PathStep> path_;
    bool failed_ = false;
};

void walk(const ExplorationNode& node, const std::function<void(const ExplorationNode&)>& fn) {
    fn(node);
    for (const auto& child : node.children) walk(child, fn);
}

}  // namespace

SimulationTrace run_simulation(const QueryRecord& seed, const SimulationProviders& providers,
                               const LoopConfig& config) {
    config.validate();
    if (trim(seed.text).empty()) throw std::invalid_argument("seed query is empty");
    if (config.max_depth > 0 && providers.followups == nullptr) {
        throw ConfigError("a follow-up generation provider is required when max_depth > 0");
    }
    SimulationTrace trace;
    trace.seed_query = seed.text;
    trace.query_id = seed.id;
    trace.category = seed.category;
    trace.difficulty = seed.difficulty;
    trace.max_depth = config.max_depth;
    Runner runner(providers, config, trace);
    trace.root = runner.visit(seed.text, 0);
    trace.totals = recompute_totals(trace);
    return trace;
}

SimulationTrace run_simulation(const std::string& seed_query, const SimulationProviders& providers,
                               const LoopConfig& config) {
    return run_simulation(QueryRecord{seed_query, seed_query, std::nullopt, std::nullopt}, providers, config);
}

TraceTotals recompute_totals(const SimulationTrace& trace) {
    TraceTotals totals;
    if (!trace.root) return totals;
    std::set<std::string> sources;
    walk(*trace.root, [&](const ExplorationNode& node) {
        ++totals.nodes;
        if (node.answer.is_answered()) ++totals.answers;
        sources.insert(node.sources_consulted.begin(), node.sources_consulted.end());
        totals.max_depth_reached = std::max(totals.max_depth_reached, node.depth);
    });
    totals.sources = sources.size();
    return totals;
}

std::vector<std::string> check_trace(const SimulationTrace& trace, const LoopConfig& config) {
    std::vector<std::string> problems;
    auto complain = [&](const ExplorationNode& node, const std::string& what) {
        problems.push_back("node '" + node.query + "' at depth " + std::to_string(node.depth) + ": " + what);
    };
    std::size_t gaps_in_tree = 0;
    std::function<void(const ExplorationNode&, std::size_t)> check = [&](const ExplorationNode& node,
                                                                          std::size_t expected_depth) {
        if (node.depth != expected_depth) complain(node, "depth does not follow its parent");
        if (node.children.size() > config.branching) complain(node, "more children than the branching factor");
        if (!node.answer.is_answered()) {
            ++gaps_in_tree;
            if (!node.children.empty()) complain(node, "NoAnswer node has children");
        }
        if (node.sources_consulted.size() > config.source_budget()) {
            complain(node, "consulted " + std::to_string(node.sources_consulted.size()) +
                               " sources, budget is " + std::to_string(config.source_budget()));
        }
        std::set<std::string> distinct(node.sources_consulted.begin(), node.sources_consulted.end());
        if (distinct.size() != node.sources_consulted.size()) complain(node, "repeated source ids");
        if (node.answer.is_answered() && node.alt_queries_used.size() > config.alt_queries_max) {
            complain(node, "too many alternative queries");
        }
        if (node.depth > config.max_depth) complain(node, "deeper than max_depth");
        for (const auto& child : node.children) check(child, expected_depth + 1);
    };
    if (trace.root) check(*trace.root, 0);
    if (trace.complete && !trace.root) problems.push_back("complete trace without a root");
    if (gaps_in_tree != trace.gap_records.size()) problems.push_back("gap records do not match NoAnswer nodes");
    for (const auto& gap : trace.gap_records) {
        if (gap.path.empty() || gap.path.back().query != gap.failing_query) {
            problems.push_back("gap record path does not end at its failing query");
        }
        if (gap.path.size() != gap.depth + 1) problems.push_back("gap record depth does not match path length");
    }
    if (recompute_totals(trace) != trace.totals) problems.push_back("totals do not match the tree");
    return problems;
}

TopicDepth topic_depth(const SimulationTrace& trace) {
    if (!trace.complete) throw std::invalid_argument("topic depth of an incomplete trace");
    if (!trace.gap_records.empty()) return {trace.gap_records.front().depth, false};
    return {trace.totals.max_depth_reached, true};
}

namespace {

json opt(const std::optional<std::string>& value) { return value ? json(*value) : json(nullptr); }

std::optional<std::string> opt_from(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    return it->get<std::string>();
}

void write_nodes(std::ostream& out, const SimulationTrace& trace, const ExplorationNode& node,
                 std::vector<std::size_t>& path) {
    json record = {
        {"type", "node"},
        {"query_id", trace.query_id},
        {"seed_query", trace.seed_query},
        {"path", path},
        {"depth", node.depth},
        {"query", node.query},
        {"status", to_string(node.answer.status())},
        {"answer", node.answer.text()},
        {"cited_sources", node.answer.cited_sources()},
        {"sources_consulted", node.sources_consulted},
        {"alt_queries_used", node.alt_queries_used},
    };
    out << record.dump() << '\n';
    for (std::size_t i = 0; i < node.children.size(); ++i) {
        path.push_back(i);
        write_nodes(out, trace, node.children[i], path);
        path.pop_back();
    }
}

}  // namespace

void write_trace(std::ostream& out, const SimulationTrace& trace) {
    if (trace.root) {
        std::vector<std::size_t> path;
        write_nodes(out, trace, *trace.root, path);
    }
    json gaps = json::array();
    for (const auto& gap : trace.gap_records) {
        json steps = json::array();
        for (const auto& step : gap.path) steps.push_back({{"query", step.query}, {"answer", step.answer}});
        gaps.push_back({{"depth", gap.depth},
                        {"failing_query", gap.failing_query},
                        {"sources_exhausted", gap.sources_exhausted},
                        {"path", std::move(steps)}});
    }
    json summary = {
        {"type", "summary"},
        {"query_id", trace.query_id},
        {"seed_query", trace.seed_query},
        {"category", opt(trace.category)},
        {"difficulty", opt(trace.difficulty)},
        {"nodes", trace.totals.nodes},
        {"answers", trace.totals.answers},
        {"sources", trace.totals.sources},
        {"max_depth_reached", trace.totals.max_depth_reached},
        {"max_depth", trace.max_depth},
        {"sentinel", trace.sentinel},
        {"complete", trace.complete},
        {"error", trace.complete ? json(nullptr) : json(trace.error)},
        {"gaps", std::move(gaps)},
    };
    if (trace.complete) {
        auto td = topic_depth(trace);
        summary["topic_depth"] = td.depth;
        summary["censored"] = td.censored;
    } else {
        summary["topic_depth"] = nullptr;
        summary["censored"] = nullptr;
    }
    out << summary.dump() << '\n';
}

std::vector<SimulationTrace> read_traces(std::istream& in, std::string_view source_name) {
    std::vector<SimulationTrace> traces;
    std::vector<std::pair<json, std::string>> pending;  // node records with their location
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
        try {
            json record = json::parse(line);
            const std::string type = record.at("type").get<std::string>();
            if (type == "node") {
                pending.emplace_back(std::move(record), where);
                continue;
            }
            if (type != "summary") throw DataError(where + ": unknown record type '" + type + "'");

            SimulationTrace trace;
            trace.query_id = record.at("query_id").get<std::string>();
            trace.seed_query = record.at("seed_query").get<std::string>();
            trace.category = opt_from(record, "category");
            trace.difficulty = opt_from(record, "difficulty");
            trace.max_depth = record.at("max_depth").get<std::size_t>();
            trace.sentinel = record.at("sentinel").get<std::string>();
            trace.complete = record.at("complete").get<bool>();
            if (!trace.complete) trace.error = record.value("error", "");
            NoAnswerPolicy policy{NoAnswerMode::SentinelToken, trace.sentinel, {}};

            for (auto& [node_json, node_where] : pending) {
                if (node_json.at("query_id").get<std::string>() != trace.query_id) {
                    throw DataError(node_where + ": node record belongs to a different simulation");
                }
                const std::string query = node_json.at("query").get<std::string>();
                const std::string status = node_json.at("status").get<std::string>();
                auto cited = node_json.at("cited_sources").get<std::vector<std::string>>();
                std::string text = node_json.at("answer").get<std::string>();
                std::optional<Answer> answer;
                if (status == "answered") {
                    try {
                        answer = Answer::answered(query, std::move(text), std::move(cited), policy);
                    } catch (const std::invalid_argument& e) {
                        throw DataError(node_where + ": " + e.what());
                    }
                } else if (status == "no_answer") {
                    answer = Answer::no_answer(query, std::move(text), std::move(cited));
                } else {
                    throw DataError(node_where + ": unknown status '" + status + "'");
                }
                ExplorationNode node{query,
                                     std::move(*answer),
                                     node_json.at("depth").get<std::size_t>(),
                                     node_json.at("sources_consulted").get<std::vector<std::string>>(),
                                     node_json.at("alt_queries_used").get<std::vector<std::string>>(),
                                     {}};
                const auto path = node_json.at("path").get<std::vector<std::size_t>>();
                if (path.empty()) {
                    if (trace.root) throw DataError(node_where + ": second root node");
                    trace.root = std::move(node);
                    continue;
                }
                if (!trace.root) throw DataError(node_where + ": child node before its root");
                ExplorationNode* parent = &*trace.root;
                for (std::size_t i = 0; i + 1 < path.size(); ++i) {
                    if (path[i] >= parent->children.size()) throw DataError(node_where + ": dangling node path");
                    parent = &parent->children[path[i]];
                }
                if (path.back() != parent->children.size()) throw DataError(node_where + ": nodes out of order");
                parent->children.push_back(std::move(node));
            }
            pending.clear();

            for (const auto& g : record.at("gaps")) {
                KnowledgeGapRecord gap;
                gap.depth = g.at("depth").get<std::size_t>();
                gap.failing_query = g.at("failing_query").get<std::string>();
                gap.sources_exhausted = g.at("sources_exhausted").get<std::size_t>();
                for (const auto& step : g.at("path")) {
                    gap.path.push_back({step.at("query").get<std::string>(), step.at("answer").get<std::string>()});
                }
                trace.gap_records.push_back(std::move(gap));
            }
            trace.totals = recompute_totals(trace);
            const TraceTotals stated{record.at("nodes").get<std::size_t>(), record.at("answers").get<std::size_t>(),
                                     record.at("sources").get<std::size_t>(),
                                     record.at("max_depth_reached").get<std::size_t>()};
            if (stated != trace.totals) throw DataError(where + ": summary totals do not match its node records");
            traces.push_back(std::move(trace));
        } catch (const json::exception& e) {
            throw DataError(where + ": malformed trace record: " + e.what());
        }
    }
    if (!pending.empty()) throw DataError(pending.front().second + ": node records without a summary");
    return traces;
}

std::vector<SimulationTrace> load_traces(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read trace file '" + path.string() + "'");
    return read_traces(in, path.string());
}

void TraceStore::put(SimulationTrace trace) {
    std::lock_guard lock(mutex_);
    auto id = trace.query_id;
    traces_.insert_or_assign(std::move(id), std::move(trace));
}

std::optional<SimulationTrace> TraceStore::get(const std::string& query_id) const {
    std::lock_guard lock(mutex_);
    auto it = traces_.find(query_id);
    if (it == traces_.end()) return std::nullopt;
    return it->second;
}

std::size_t TraceStore::size() const {
    std::lock_guard lock(mutex_);
    return traces_.size();
}

std::vector<SimulationTrace> TraceStore::ordered(const std::vector<std::string>& query_ids) const {
    std::lock_guard lock(mutex_);
    std::vector<SimulationTrace> out;
    for (const auto& id : query_ids) {
        if (auto it = traces_.find(id); it != traces_.end()) out.push_back(it->second);
    }
    return out;
}

}  // namespace kgap
