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

#include "kgap/metrics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

std::string_view to_string(ReviewVerdict verdict) {
    return verdict == ReviewVerdict::Correct ? "correct" : "incorrect";
}

ReviewVerdict review_verdict_from_string(std::string_view text) {
    const auto v = to_lower_ascii(trim(text));
    if (v == "correct") return ReviewVerdict::Correct;
    if (v == "incorrect") return ReviewVerdict::Incorrect;
    throw DataError("unknown verdict '" + std::string(text) + "' (expected correct or incorrect)");
}

bool is_iso8601_timestamp(std::string_view text) {
    static const std::regex pattern(
        R"((\d{4})-(\d{2})-(\d{2})(T(\d{2}):(\d{2})(:(\d{2})(\.\d+)?)?(Z|[+-](\d{2}):?(\d{2}))?)?)");
    std::match_results<std::string_view::const_iterator> m;
    if (!std::regex_match(text.begin(), text.end(), m, pattern)) return false;
    auto num = [&](int group) { return m[group].matched ? std::stoi(m[group].str()) : 0; };
    const int year = num(1), month = num(2), day = num(3);
    if (month < 1 || month > 12 || day < 1) return false;
    static constexpr int days[] = {31, 29, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    if (day > days[month - 1] || (month == 2 && day == 29 && !leap)) return false;
    if (num(5) > 23 || num(6) > 59 || num(8) > 60) return false;
    if (num(11) > 23 || num(12) > 59) return false;
    return true;
}

std::string utc_timestamp_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

namespace {

const ExplorationNode* find_at_depth(const ExplorationNode& node, std::size_t depth) {
    if (node.depth == depth) return &node;
    for (const auto& child : node.children) {
        if (const auto* hit = find_at_depth(child, depth)) return hit;
    }
    return nullptr;
}

void each_node(const ExplorationNode& node, const std::function<void(const ExplorationNode&)>& fn) {
    fn(node);
    for (const auto& child : node.children) each_node(child, fn);
}

}  // namespace

const ExplorationNode* resolve_answer_key(const AnswerKey& key, std::span<const SimulationTrace> traces) {
    for (const auto& trace : traces) {
        if (trace.seed_query != key.seed_query || !trace.root) continue;
        if (const auto* node = find_at_depth(*trace.root, key.depth)) return node;
    }
    return nullptr;
}

void AnnotationStore::record(AnnotationRecord annotation, std::span<const SimulationTrace> traces) {
    const std::string name = "(" + annotation.key.seed_query + ", depth " + std::to_string(annotation.key.depth) + ")";
    const auto* node = resolve_answer_key(annotation.key, traces);
    if (node == nullptr) throw DataError("annotation names an unknown answer " + name);
    if (!node->answer.is_answered()) throw DataError("annotation targets a NoAnswer node " + name);
    if (!is_iso8601_timestamp(annotation.timestamp)) {
        throw DataError("annotation timestamp is not ISO-8601: '" + annotation.timestamp + "'");
    }
    records_.push_back(std::move(annotation));
}

std::map<AnswerKey, ReviewVerdict> AnnotationStore::effective() const {
    std::map<AnswerKey, ReviewVerdict> out;
    for (const auto& r : records_) out.insert_or_assign(r.key, r.verdict);
    return out;
}

std::string AnnotationStore::to_line(const AnnotationRecord& a) {
    return json{{"seed_query", a.key.seed_query},
                {"depth", a.key.depth},
                {"verdict", to_string(a.verdict)},
                {"reviewer", a.reviewer},
                {"timestamp", a.timestamp}}
        .dump();
}

AnnotationStore AnnotationStore::load(const std::filesystem::path& path, std::span<const SimulationTrace> traces) {
    AnnotationStore store;
    std::ifstream in(path);
    if (!in) return store;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(line_no);
        try {
            json j = json::parse(line);
            AnnotationRecord a{{j.at("seed_query").get<std::string>(), j.at("depth").get<std::size_t>()},
                               review_verdict_from_string(j.at("verdict").get<std::string>()),
                               j.value("reviewer", ""),
                               j.at("timestamp").get<std::string>()};
            store.record(std::move(a), traces);
        } catch (const json::exception& e) {
            throw DataError(where + ": malformed annotation: " + e.what());
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
    }
    return store;
}

void AnnotationStore::append_to(const std::filesystem::path& path, const AnnotationRecord& annotation) {
    std::ofstream out(path, std::ios::app | std::ios::binary);
    if (!out) throw DataError("cannot append to annotation store '" + path.string() + "'");
    out << to_line(annotation) << '\n';
    if (!out) throw DataError("failed writing annotation store '" + path.string() + "'");
}

double accuracy(const AnnotationStore& store, std::span<const SimulationTrace> traces) {
    std::size_t annotated = 0;
    std::size_t correct = 0;
    for (const auto& [key, verdict] : store.effective()) {
        const auto* node = resolve_answer_key(key, traces);
        if (node == nullptr || !node->answer.is_answered()) continue;
        ++annotated;
        correct += verdict == ReviewVerdict::Correct ? 1 : 0;
    }
    if (annotated == 0) throw UndefinedMetric("accuracy is undefined: no annotated answers");
    return static_cast<double>(correct) / static_cast<double>(annotated);
}

namespace {

std::optional<std::string> group_label(const SimulationTrace& trace, Grouping grouping) {
    switch (grouping) {
        case Grouping::Overall: return std::string("overall");
        case Grouping::ByDifficulty: return trace.difficulty;
        case Grouping::ByCategory: return trace.category;
    }
    return std::nullopt;
}

std::string_view grouping_name(Grouping grouping) {
    switch (grouping) {
        case Grouping::Overall: return "overall";
        case Grouping::ByDifficulty: return "difficulty";
        case Grouping::ByCategory: return "category";
    }
    return "overall";
}

}  // namespace

std::map<std::string, double> avg_sources(std::span<const SimulationTrace> traces, Grouping grouping,
                                          std::vector<std::string>* notes) {
    std::map<std::string, std::pair<std::size_t, std::size_t>> acc;  // label -> (sum, count)
    std::size_t unlabeled = 0;
    for (const auto& trace : traces) {
        auto label = group_label(trace, grouping);
        if (!label) {
            ++unlabeled;
            continue;
        }
        auto& [sum, count] = acc[*label];
        sum += trace.totals.sources;
        ++count;
    }
    if (unlabeled > 0 && notes != nullptr) {
        notes->push_back(std::to_string(unlabeled) + " simulation(s) without a " + std::string(grouping_name(grouping)) +
                         " label left out of the " + std::string(grouping_name(grouping)) + " breakdown");
    }
    std::map<std::string, double> out;
    for (const auto& [label, sc] : acc) {
        out[label] = static_cast<double>(sc.first) / static_cast<double>(sc.second);
    }
    return out;
}

DepthSummary avg_depth(std::span<const SimulationTrace> traces) {
    DepthSummary out;
    std::size_t sum = 0;
    for (const auto& trace : traces) {
        const auto td = topic_depth(trace);
        if (td.censored) {
            ++out.censored;
        } else {
            ++out.uncensored;
            sum += td.depth;
        }
    }
    if (out.uncensored > 0) out.mean = static_cast<double>(sum) / static_cast<double>(out.uncensored);
    return out;
}

namespace {

GroupSummary summarize_group(const std::vector<const SimulationTrace*>& members,
                             const std::map<AnswerKey, ReviewVerdict>& verdicts) {
    GroupSummary g;
    std::size_t depth_sum = 0;
    std::size_t uncensored = 0;
    for (const auto* t : members) {
        ++g.simulations;
        g.answers += t->totals.answers;
        g.sources += t->totals.sources;
        const auto td = topic_depth(*t);
        if (td.censored) {
            ++g.censored;
        } else {
            ++uncensored;
            depth_sum += td.depth;
        }
        each_node(*t->root, [&](const ExplorationNode& node) {
            if (!node.answer.is_answered()) return;
            auto it = verdicts.find({t->seed_query, node.depth});
            if (it == verdicts.end()) return;
            // The key resolves to the first node at that depth only.
            if (resolve_answer_key(it->first, std::span(t, 1)) != &node) return;
            ++g.annotated;
            g.correct += it->second == ReviewVerdict::Correct ? 1 : 0;
        });
    }
    if (g.simulations > 0) g.avg_sources = static_cast<double>(g.sources) / static_cast<double>(g.simulations);
    if (uncensored > 0) g.avg_topic_depth = static_cast<double>(depth_sum) / static_cast<double>(uncensored);
    if (g.annotated > 0) g.accuracy = static_cast<double>(g.correct) / static_cast<double>(g.annotated);
    return g;
}

}  // namespace

ReportSummary summarize(std::span<const SimulationTrace> traces, const AnnotationStore* store) {
    ReportSummary s;
    std::vector<const SimulationTrace*> complete;
    std::size_t incomplete = 0;
    for (const auto& t : traces) {
        if (t.complete && t.root) complete.push_back(&t);
        else ++incomplete;
    }
    if (incomplete > 0) s.notes.push_back(std::to_string(incomplete) + " incomplete simulation(s) left out");

    const auto verdicts = store ? store->effective() : std::map<AnswerKey, ReviewVerdict>{};
    const GroupSummary all = summarize_group(complete, verdicts);
    s.simulations = all.simulations;
    s.answers = all.answers;
    s.sources = all.sources;
    s.avg_sources_per_simulation = all.avg_sources;
    s.avg_topic_depth = all.avg_topic_depth;
    s.censored_simulations = all.censored;
    s.annotated = all.annotated;
    s.correct = all.correct;
    s.accuracy = all.accuracy;
    if (all.censored > 0) {
        s.notes.push_back(std::to_string(all.censored) +
                          " simulation(s) ended without a gap; their depth is censored and left out of the mean");
    }

    for (Grouping grouping : {Grouping::ByDifficulty, Grouping::ByCategory}) {
        std::map<std::string, std::vector<const SimulationTrace*>> groups;
        std::size_t unlabeled = 0;
        for (const auto* t : complete) {
            if (auto label = group_label(*t, grouping)) groups[*label].push_back(t);
            else ++unlabeled;
        }
        if (unlabeled > 0) {
            s.notes.push_back(std::to_string(unlabeled) + " simulation(s) without a " +
                              std::string(grouping_name(grouping)) + " label left out of the " +
                              std::string(grouping_name(grouping)) + " breakdown");
        }
        auto& target = grouping == Grouping::ByDifficulty ? s.by_difficulty : s.by_category;
        for (const auto& [label, members] : groups) target[label] = summarize_group(members, verdicts);
    }
    return s;
}

double round2(double value) { return std::round(value * 100.0) / 100.0; }

std::string format_ratio(double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", value);
    std::string s = buf;
    if (s == "-0.00") s = "0.00";
    while (s.size() > 1 && s.back() == '0' && s[s.size() - 2] != '.') s.pop_back();
    return s;
}

std::string format_percent(double fraction) { return std::to_string(std::lround(fraction * 100.0)) + "%"; }

namespace {

json optional_ratio(const std::optional<double>& v) { return v ? json(round2(*v)) : json(nullptr); }
json optional_percent(const std::optional<double>& v) { return v ? json(format_percent(*v)) : json(nullptr); }

json group_json(const GroupSummary& g) {
    return {
        {"simulations", g.simulations},
        {"answers", g.answers},
        {"sources", g.sources},
        {"avg_sources_per_simulation", round2(g.avg_sources)},
        {"avg_topic_depth", optional_ratio(g.avg_topic_depth)},
        {"censored_simulations", g.censored},
        {"annotated", g.annotated},
        {"correct", g.correct},
        {"accuracy", optional_percent(g.accuracy)},
    };
}

std::string cell(const std::optional<double>& v, bool percent) {
    if (!v) return "-";
    return percent ? format_percent(*v) : format_ratio(*v);
}

std::string pad(std::string text, std::size_t width) {
    if (text.size() < width) text.append(width - text.size(), ' ');
    return text;
}

}  // namespace

std::string render_report(const ReportSummary& s, ReportFormat format) {
    if (format == ReportFormat::Json) {
        json groups = json::object();
        groups["difficulty"] = json::object();
        groups["category"] = json::object();
        for (const auto& [label, g] : s.by_difficulty) groups["difficulty"][label] = group_json(g);
        for (const auto& [label, g] : s.by_category) groups["category"][label] = group_json(g);
        json out = {
            {"format", "kgap-report"},
            {"version", 1},
            {"accuracy", optional_percent(s.accuracy)},
            {"annotated", s.annotated},
            {"correct", s.correct},
            {"avg_topic_depth", optional_ratio(s.avg_topic_depth)},
            {"censored_simulations", s.censored_simulations},
            {"avg_sources_per_simulation", round2(s.avg_sources_per_simulation)},
            {"counts", {{"simulations", s.simulations}, {"answers", s.answers}, {"sources", s.sources}}},
            {"groups", std::move(groups)},
            {"notes", s.notes},
        };
        return out.dump(2) + "\n";
    }

    std::ostringstream out;
    out << pad("metric", 30) << "value\n";
    out << pad("accuracy", 30) << cell(s.accuracy, true);
    if (s.accuracy) out << " (" << s.correct << "/" << s.annotated << ")";
    out << "\n";
    out << pad("avg topic depth", 30) << cell(s.avg_topic_depth, false) << " (censored: " << s.censored_simulations
        << ")\n";
    out << pad("avg sources per simulation", 30) << format_ratio(s.avg_sources_per_simulation) << "\n";
    out << pad("simulations", 30) << s.simulations << "\n";
    out << pad("answers", 30) << s.answers << "\n";
    out << pad("sources", 30) << s.sources << "\n";

    auto table = [&](std::string_view title, const std::map<std::string, GroupSummary>& groups) {
        if (groups.empty()) return;
        out << "\n" << pad(std::string(title), 20) << pad("simulations", 13) << pad("answers", 9) << pad("sources", 9)
            << pad("avg sources", 13) << pad("avg depth", 11) << "accuracy\n";
        for (const auto& [label, g] : groups) {
            out << pad(label, 20) << pad(std::to_string(g.simulations), 13) << pad(std::to_string(g.answers), 9)
                << pad(std::to_string(g.sources), 9) << pad(format_ratio(g.avg_sources), 13)
                << pad(cell(g.avg_topic_depth, false), 11) << cell(g.accuracy, true) << "\n";
        }
    };
    table("difficulty", s.by_difficulty);
    table("category", s.by_category);
    if (!s.notes.empty()) {
        out << "\nnotes\n";
        for (const auto& n : s.notes) out << "- " << n << "\n";
    }
    return out.str();
}

void emit_report(const ReportSummary& summary, ReportFormat format, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write report '" + path.string() + "'");
    out << render_report(summary, format);
    if (!out) throw DataError("failed writing report '" + path.string() + "'");
}

}  // namespace kgap
