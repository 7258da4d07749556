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

#include "kgap/providers.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

namespace {

json hit_to_json(const SearchHit& hit) {
    json j = {{"id", hit.id}, {"title", hit.title}, {"snippet", hit.snippet}};
    if (hit.score) j["score"] = *hit.score;
    if (hit.content) j["content"] = *hit.content;
    return j;
}

SearchHit hit_from_json(const json& j) {
    SearchHit hit;
    hit.id = j.at("id").get<std::string>();
    hit.title = j.value("title", "");
    hit.snippet = j.value("snippet", "");
    if (auto it = j.find("score"); it != j.end() && !it->is_null()) hit.score = it->get<double>();
    if (auto it = j.find("content"); it != j.end() && !it->is_null()) {
        hit.content = it->get<std::string>();
    }
    if (hit.id.empty()) throw DataError("search hit with empty id");
    return hit;
}

template <typename Fn>
void for_each_record(std::istream& in, std::string_view source, Fn&& fn) {
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = std::string(source) + ":" + std::to_string(line_no);
        try {
            fn(json::parse(line), where);
        } catch (const json::exception& e) {
            throw DataError(where + ": malformed fixture record: " + e.what());
        } catch (const DataError& e) {
            throw DataError(where + ": " + e.what());
        }
    }
}

}  // namespace

ScriptedSearch::ScriptedSearch(std::vector<Entry> entries) {
    for (auto& [query, hits] : entries) add(std::move(query), std::move(hits));
}

ScriptedSearch ScriptedSearch::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read search fixture '" + path.string() + "'");
    return parse(in, path.string());
}

ScriptedSearch ScriptedSearch::parse(std::istream& in, std::string_view source_name) {
    ScriptedSearch fixture;
    for_each_record(in, source_name, [&](const json& record, const std::string&) {
        std::vector<SearchHit> hits;
        for (const auto& h : record.at("hits")) hits.push_back(hit_from_json(h));
        fixture.add(record.at("query").get<std::string>(), std::move(hits));
    });
    return fixture;
}

void ScriptedSearch::add(std::string query, std::vector<SearchHit> hits) {
    auto same = [&](const Entry& e) { return e.first == query; };
    if (std::any_of(entries_.begin(), entries_.end(), same)) {
        throw DataError("search fixture lists query '" + query + "' twice");
    }
    entries_.emplace_back(std::move(query), std::move(hits));
}

std::vector<SearchHit> ScriptedSearch::search(const std::string& query, std::size_t k) {
    {
        std::lock_guard lock(*mutex_);
        requests_.push_back(query);
    }
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.first == query; });
    if (it == entries_.end()) {
        throw ProviderError(ProviderErrorKind::FixtureMiss, "search fixture has no entry for query '" + query + "'");
    }
    const auto n = std::min(k, it->second.size());
    return {it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n)};
}

std::vector<std::string> ScriptedSearch::requests() const {
    std::lock_guard lock(*mutex_);
    return requests_;
}

ScriptedGeneration::ScriptedGeneration(std::vector<Entry> entries) {
    for (auto& [prompt, completion] : entries) add(std::move(prompt), std::move(completion));
}

ScriptedGeneration ScriptedGeneration::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read generation fixture '" + path.string() + "'");
    return parse(in, path.string());
}

ScriptedGeneration ScriptedGeneration::parse(std::istream& in, std::string_view source_name) {
    ScriptedGeneration fixture;
    for_each_record(in, source_name, [&](const json& record, const std::string&) {
        fixture.add(record.at("prompt").get<std::string>(), record.at("completion").get<std::string>());
    });
    return fixture;
}

void ScriptedGeneration::add(std::string prompt, std::string completion) {
    auto same = [&](const Entry& e) { return e.first == prompt; };
    if (std::any_of(entries_.begin(), entries_.end(), same)) {
        throw DataError("generation fixture lists a prompt twice: '" + prompt + "'");
    }
    entries_.emplace_back(std::move(prompt), std::move(completion));
}

std::string ScriptedGeneration::generate(const std::string& prompt, const GenerationParams&) {
    {
        std::lock_guard lock(*mutex_);
        requests_.push_back(prompt);
    }
    auto it = std::find_if(entries_.begin(), entries_.end(),
                           [&](const Entry& e) { return e.first == prompt; });
    if (it == entries_.end()) {
        throw ProviderError(ProviderErrorKind::FixtureMiss, "generation fixture has no entry for prompt '" + prompt + "'");
    }
    return it->second;
}

std::vector<std::string> ScriptedGeneration::requests() const {
    std::lock_guard lock(*mutex_);
    return requests_;
}

std::vector<SearchHit> IndexSearchAdapter::search(const std::string& query, std::size_t k) {
    std::vector<SearchHit> hits;
    for (auto& scored : index_.search(query, k)) {
        const Document* doc = index_.document(scored.doc_id);
        SearchHit hit;
        hit.id = std::move(scored.doc_id);
        hit.title = doc->title;
        hit.snippet = utf8_prefix(doc->body, kSnippetChars);
        hit.score = scored.score;
        hit.content = doc->body;
        hits.push_back(std::move(hit));
    }
    return hits;
}

std::vector<SearchHit> RecordingSearch::search(const std::string& query, std::size_t k) {
    auto hits = inner_.search(query, k);
    std::lock_guard lock(mutex_);
    auto it = std::find_if(transcript_.begin(), transcript_.end(),
                           [&](const ScriptedSearch::Entry& e) { return e.first == query; });
    if (it == transcript_.end()) {
        transcript_.emplace_back(query, hits);
    } else if (hits.size() > it->second.size()) {
        it->second = hits;
    }
    return hits;
}

std::vector<ScriptedSearch::Entry> RecordingSearch::transcript() const {
    std::lock_guard lock(mutex_);
    return transcript_;
}

void RecordingSearch::write(std::ostream& out) const {
    for (const auto& [query, hits] : transcript()) {
        json list = json::array();
        for (const auto& h : hits) list.push_back(hit_to_json(h));
        out << json{{"query", query}, {"hits", std::move(list)}}.dump() << '\n';
    }
}

}  // namespace kgap
