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
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace kgap {

struct Document {
    std::string id;
    std::string title;
    std::string body;
    std::optional<std::string> url;
    std::optional<std::string> category;

    friend bool operator==(const Document&, const Document&) = default;
};

/// An ordered, validated collection of documents. Ids are unique and bodies
/// are non-blank; the constructor throws DataError otherwise.
class Corpus {
public:
    Corpus() = default;
    explicit Corpus(std::vector<Document> documents);

    const std::vector<Document>& documents() const noexcept { return documents_; }
    std::size_t doc_count() const noexcept { return documents_.size(); }
    /// Mean body token count; 0 for an empty corpus.
    double avg_doc_len() const noexcept { return avg_doc_len_; }
    const Document* find(std::string_view id) const;

private:
    std::vector<Document> documents_;
    std::unordered_map<std::string, std::size_t> by_id_;
    double avg_doc_len_ = 0.0;
};

/// Reads the JSON-lines corpus format (fields id, title, body, url, category).
/// Blank lines are skipped. Errors name the 1-based line number.
Corpus parse_corpus(std::istream& in, std::string_view source_name = "<corpus>");
Corpus ingest(const std::filesystem::path& path);

void write_corpus(std::ostream& out, const Corpus& corpus);

struct ScoredDoc {
    std::string doc_id;
    double score = 0.0;

    friend bool operator==(const ScoredDoc&, const ScoredDoc&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

/// Okapi idf, ln((n - df + 0.5) / (df + 0.5) + 1).
double bm25_idf(std::size_t doc_count, std::size_t doc_freq);

/// Inverted index over document bodies. Immutable once built: removal
/// produces a derived view that shares the postings and adds tombstones.
/// Collection statistics (N, df, average length) are taken over live
/// documents only, so a view scores exactly like a rebuild without the
/// removed documents.
class Index {
public:
    struct Posting {
        std::uint32_t doc = 0;  // ordinal into documents()
        std::uint32_t tf = 0;
    };

    Index();
    static Index build(const Corpus& corpus, Bm25Params params = {});

    /// Top-k live documents by BM25, descending; equal scores by ascending
    /// doc id. Throws InvalidQuery if the query has no tokens.
    std::vector<ScoredDoc> search(std::string_view query_text, std::size_t k) const;

    struct Removal;
    /// Tombstones `doc_ids`; ids the index does not hold are counted.
    Removal remove_documents(const std::set<std::string>& doc_ids) const;

    const std::vector<Document>& documents() const noexcept;
    const Document* document(std::string_view doc_id) const;
    bool contains(std::string_view doc_id) const;
    bool is_tombstoned(std::string_view doc_id) const;
    const std::set<std::string>& tombstones() const noexcept { return *tombstone_ids_; }

    /// Postings as (doc_id, tf) pairs in document order, live documents only.
    std::vector<std::pair<std::string, std::uint32_t>> postings(std::string_view term) const;
    std::vector<std::string> terms() const;
    std::size_t doc_length(std::string_view doc_id) const;

    std::size_t live_doc_count() const noexcept { return live_count_; }
    double live_avg_doc_len() const noexcept { return live_avg_len_; }
    const Bm25Params& params() const noexcept;

    /// JSON persistence of documents, postings and tombstones.
    void save(const std::filesystem::path& path) const;
    static Index load(const std::filesystem::path& path);

private:
    struct Data;
    std::shared_ptr<const Data> data_;
    std::shared_ptr<const std::vector<bool>> dead_;
    std::shared_ptr<const std::set<std::string>> tombstone_ids_;
    std::size_t live_count_ = 0;
    double live_avg_len_ = 0.0;

    void refresh_live_stats();
};

struct Index::Removal {
    Index index;
    std::size_t unknown_ids = 0;
};

}  // namespace kgap
