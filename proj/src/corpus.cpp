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

#include "kgap/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

namespace {

std::string at_line(std::string_view source, std::size_t line) {
    return std::string(source) + ":" + std::to_string(line);
}

std::optional<std::string> optional_string(const json& record, const char* key,
                                           const std::string& where) {
    auto it = record.find(key);
    if (it == record.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw DataError(where + ": field '" + key + "' must be a string");
    return it->get<std::string>();
}

std::string required_string(const json& record, const char* key, const std::string& where) {
    auto value = optional_string(record, key, where);
    if (!value) throw DataError(where + ": missing field '" + key + "'");
    return *value;
}

json document_to_json(const Document& doc) {
    json j = {{"id", doc.id}, {"title", doc.title}, {"body", doc.body}};
    j["url"] = doc.url ? json(*doc.url) : json(nullptr);
    j["category"] = doc.category ? json(*doc.category) : json(nullptr);
    return j;
}

Document document_from_json(const json& record, const std::string& where) {
    if (!record.is_object()) throw DataError(where + ": record must be a JSON object");
    Document doc;
    doc.id = required_string(record, "id", where);
    doc.title = optional_string(record, "title", where).value_or("");
    doc.body = required_string(record, "body", where);
    doc.url = optional_string(record, "url", where);
    doc.category = optional_string(record, "category", where);
    return doc;
}

void check_document(const Document& doc, const std::string& where) {
    if (trim(doc.id).empty()) throw DataError(where + ": document id is empty");
    if (trim(doc.body).empty()) throw DataError(where + ": document '" + doc.id + "' has a blank body");
}

}  // namespace

Corpus::Corpus(std::vector<Document> documents) : documents_(std::move(documents)) {
    std::size_t total_tokens = 0;
    for (std::size_t i = 0; i < documents_.size(); ++i) {
        const auto& doc = documents_[i];
        check_document(doc, "document #" + std::to_string(i + 1));
        if (!by_id_.emplace(doc.id, i).second) {
            throw DataError("duplicate document id '" + doc.id + "'");
        }
        total_tokens += tokenize(doc.body).size();
    }
    avg_doc_len_ = documents_.empty()
                       ? 0.0
                       : static_cast<double>(total_tokens) / static_cast<double>(documents_.size());
}

const Document* Corpus::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    return it == by_id_.end() ? nullptr : &documents_[it->second];
}

Corpus parse_corpus(std::istream& in, std::string_view source_name) {
    std::vector<Document> docs;
    std::map<std::string, std::size_t> first_seen;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto where = at_line(source_name, line_no);
        json record;
        try {
            record = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": malformed record: " + e.what());
        }
        Document doc = document_from_json(record, where);
        check_document(doc, where);
        auto [it, inserted] = first_seen.emplace(doc.id, line_no);
        if (!inserted) {
            throw DataError(where + ": duplicate document id '" + doc.id + "' (first seen on line " +
                            std::to_string(it->second) + ")");
        }
        docs.push_back(std::move(doc));
    }
    if (in.bad()) throw DataError(std::string(source_name) + ": read error");
    return Corpus(std::move(docs));
}

Corpus ingest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read corpus file '" + path.string() + "'");
    return parse_corpus(in, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& doc : corpus.documents()) out << document_to_json(doc).dump() << '\n';
}

double bm25_idf(std::size_t doc_count, std::size_t doc_freq) {
    const double n = static_cast<double>(doc_count);
    const double df = static_cast<double>(doc_freq);
    return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

struct Index::Data {
    Bm25Params params;
    std::vector<Document> documents;
    std::vector<std::uint32_t> lengths;
    std::unordered_map<std::string, std::uint32_t> ordinal;
    // std::map keeps term iteration and serialization ordered.
    std::map<std::string, std::vector<Posting>, std::less<>> postings;
};

Index::Index()
    : data_(std::make_shared<Data>()),
      dead_(std::make_shared<std::vector<bool>>()),
      tombstone_ids_(std::make_shared<std::set<std::string>>()) {}

Index Index::build(const Corpus& corpus, Bm25Params params) {
    auto data = std::make_shared<Data>();
    data->params = params;
    data->documents = corpus.documents();
    data->lengths.reserve(data->documents.size());
    for (std::uint32_t ord = 0; ord < data->documents.size(); ++ord) {
        const auto& doc = data->documents[ord];
        data->ordinal.emplace(doc.id, ord);
        std::map<std::string, std::uint32_t> tf;
        auto tokens = tokenize(doc.body);
        for (auto& token : tokens) ++tf[std::move(token)];
        data->lengths.push_back(static_cast<std::uint32_t>(tokens.size()));
        for (auto& [term, count] : tf) data->postings[term].push_back({ord, count});
    }
    Index index;
    index.dead_ = std::make_shared<std::vector<bool>>(data->documents.size(), false);
    index.data_ = std::move(data);
    index.refresh_live_stats();
    return index;
}

void Index::refresh_live_stats() {
    std::size_t count = 0;
    std::size_t total = 0;
    for (std::size_t ord = 0; ord < data_->documents.size(); ++ord) {
        if ((*dead_)[ord]) continue;
        ++count;
        total += data_->lengths[ord];
    }
    live_count_ = count;
    live_avg_len_ = count == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(count);
}

std::vector<ScoredDoc> Index::search(std::string_view query_text, std::size_t k) const {
    auto tokens = tokenize(query_text);
    if (tokens.empty()) throw InvalidQuery(query_text);
    std::sort(tokens.begin(), tokens.end());
    tokens.erase(std::unique(tokens.begin(), tokens.end()), tokens.end());

    std::vector<ScoredDoc> results;
    if (k == 0 || live_count_ == 0) return results;

    const auto& dead = *dead_;
    const double k1 = data_->params.k1;
    const double b = data_->params.b;
    std::vector<double> score(data_->documents.size(), 0.0);
    std::vector<bool> touched(data_->documents.size(), false);
    std::vector<std::uint32_t> hits;

    for (const auto& term : tokens) {
        auto it = data_->postings.find(term);
        if (it == data_->postings.end()) continue;
        std::size_t df = 0;
        for (const auto& p : it->second) df += dead[p.doc] ? 0 : 1;
        if (df == 0) continue;
        const double idf = bm25_idf(live_count_, df);
        for (const auto& p : it->second) {
            if (dead[p.doc]) continue;
            const double tf = p.tf;
            const double dl = data_->lengths[p.doc];
            score[p.doc] += idf * (tf * (k1 + 1.0)) / (tf + k1 * (1.0 - b + b * dl / live_avg_len_));
            if (!touched[p.doc]) {
                touched[p.doc] = true;
                hits.push_back(p.doc);
            }
        }
    }

    const auto& docs = data_->documents;
    auto better = [&](std::uint32_t a, std::uint32_t c) {
        if (score[a] != score[c]) return score[a] > score[c];
        return docs[a].id < docs[c].id;
    };
    const std::size_t n = std::min(k, hits.size());
    std::partial_sort(hits.begin(), hits.begin() + static_cast<std::ptrdiff_t>(n), hits.end(), better);
    results.reserve(n);
    for (std::size_t i = 0; i < n; ++i) results.push_back({docs[hits[i]].id, score[hits[i]]});
    return results;
}

Index::Removal Index::remove_documents(const std::set<std::string>& doc_ids) const {
    Removal out{*this, 0};
    if (doc_ids.empty()) return out;
    auto dead = std::make_shared<std::vector<bool>>(*dead_);
    auto ids = std::make_shared<std::set<std::string>>(*tombstone_ids_);
    for (const auto& id : doc_ids) {
        auto it = data_->ordinal.find(id);
        if (it == data_->ordinal.end()) {
            ++out.unknown_ids;
            continue;
        }
        (*dead)[it->second] = true;
        ids->insert(id);
    }
    out.index.dead_ = std::move(dead);
    out.index.tombstone_ids_ = std::move(ids);
    out.index.refresh_live_stats();
    return out;
}

const std::vector<Document>& Index::documents() const noexcept { return data_->documents; }

const Document* Index::document(std::string_view doc_id) const {
    auto it = data_->ordinal.find(std::string(doc_id));
    return it == data_->ordinal.end() ? nullptr : &data_->documents[it->second];
}

bool Index::contains(std::string_view doc_id) const {
    return data_->ordinal.count(std::string(doc_id)) != 0;
}

bool Index::is_tombstoned(std::string_view doc_id) const {
    return tombstone_ids_->count(std::string(doc_id)) != 0;
}

std::vector<std::pair<std::string, std::uint32_t>> Index::postings(std::string_view term) const {
    std::vector<std::pair<std::string, std::uint32_t>> out;
    auto it = data_->postings.find(term);
    if (it == data_->postings.end()) return out;
    for (const auto& p : it->second) {
        if (!(*dead_)[p.doc]) out.emplace_back(data_->documents[p.doc].id, p.tf);
    }
    return out;
}

std::vector<std::string> Index::terms() const {
    std::vector<std::string> out;
    for (const auto& [term, list] : data_->postings) {
        if (std::any_of(list.begin(), list.end(), [&](const Posting& p) { return !(*dead_)[p.doc]; })) {
            out.push_back(term);
        }
    }
    return out;
}

std::size_t Index::doc_length(std::string_view doc_id) const {
    auto it = data_->ordinal.find(std::string(doc_id));
    return it == data_->ordinal.end() ? 0 : data_->lengths[it->second];
}

const Bm25Params& Index::params() const noexcept { return data_->params; }

void Index::save(const std::filesystem::path& path) const {
    json docs = json::array();
    for (const auto& doc : data_->documents) docs.push_back(document_to_json(doc));
    json postings = json::object();
    for (const auto& [term, list] : data_->postings) {
        json entries = json::array();
        for (const auto& p : list) entries.push_back({p.doc, p.tf});
        postings[term] = std::move(entries);
    }
    json out = {
        {"format", "kgap-index"},
        {"version", 1},
        {"bm25", {{"k1", data_->params.k1}, {"b", data_->params.b}}},
        {"documents", std::move(docs)},
        {"postings", std::move(postings)},
        {"tombstones", json(*tombstone_ids_)},
    };
    std::ofstream file(path, std::ios::binary);
    if (!file) throw DataError("cannot write index file '" + path.string() + "'");
    file << out.dump() << '\n';
    if (!file) throw DataError("failed writing index file '" + path.string() + "'");
}

Index Index::load(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot read index file '" + path.string() + "'");
    const std::string where = path.string();
    json in;
    try {
        in = json::parse(file);
    } catch (const json::parse_error& e) {
        throw DataError(where + ": malformed index: " + e.what());
    }
    if (in.value("format", "") != "kgap-index" || in.value("version", 0) != 1) {
        throw DataError(where + ": not a kgap-index v1 file");
    }
    try {
        auto data = std::make_shared<Data>();
        data->params.k1 = in.at("bm25").at("k1").get<double>();
        data->params.b = in.at("bm25").at("b").get<double>();
        std::vector<Document> docs;
        for (const auto& record : in.at("documents")) docs.push_back(document_from_json(record, where));
        Corpus validated(std::move(docs));
        data->documents = validated.documents();
        data->lengths.assign(data->documents.size(), 0);
        for (std::uint32_t ord = 0; ord < data->documents.size(); ++ord) {
            data->ordinal.emplace(data->documents[ord].id, ord);
        }
        for (const auto& [term, entries] : in.at("postings").items()) {
            auto& list = data->postings[term];
            for (const auto& entry : entries) {
                Posting p{entry.at(0).get<std::uint32_t>(), entry.at(1).get<std::uint32_t>()};
                if (p.doc >= data->documents.size() || p.tf == 0) {
                    throw DataError(where + ": posting for '" + term + "' is out of range");
                }
                data->lengths[p.doc] += p.tf;
                list.push_back(p);
            }
        }
        Index index;
        index.dead_ = std::make_shared<std::vector<bool>>(data->documents.size(), false);
        index.data_ = std::move(data);
        index.refresh_live_stats();
        std::set<std::string> removed;
        for (const auto& id : in.at("tombstones")) removed.insert(id.get<std::string>());
        auto removal = index.remove_documents(removed);
        if (removal.unknown_ids != 0) throw DataError(where + ": tombstone names an unknown document");
        return removal.index;
    } catch (const json::exception& e) {
        throw DataError(where + ": malformed index: " + e.what());
    }
}

}  // namespace kgap
