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
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "kgap/corpus.hpp"

namespace kgap {

struct SearchHit {
    std::string id;  // doc id, or url for web providers
    std::string title;
    std::string snippet;
    std::optional<double> score;
    /// Full text when the provider has it (the index adapter does); answerers
    /// fall back to the snippet otherwise.
    std::optional<std::string> content;

    friend bool operator==(const SearchHit&, const SearchHit&) = default;
};

/// Returns at most k hits. Implementations must be safe for concurrent calls.
class SearchProvider {
public:
    virtual ~SearchProvider() = default;
    virtual std::vector<SearchHit> search(const std::string& query, std::size_t k) = 0;
};

struct GenerationParams {
    double temperature = 0.0;
    int max_tokens = 512;
};

/// Returns completion text. Failures are thrown as ProviderError, never
/// returned as empty success.
class GenerationProvider {
public:
    virtual ~GenerationProvider() = default;
    virtual std::string generate(const std::string& prompt, const GenerationParams& params) = 0;
};

/// Exact-match search double. An unmatched query throws a FixtureMiss
/// ProviderError naming the query.
class ScriptedSearch final : public SearchProvider {
public:
    using Entry = std::pair<std::string, std::vector<SearchHit>>;

    ScriptedSearch() = default;
    explicit ScriptedSearch(std::vector<Entry> entries);

    /// JSON lines of {"query": ..., "hits": [{"id","title","snippet","score","content"}]}.
    static ScriptedSearch load(const std::filesystem::path& path);
    static ScriptedSearch parse(std::istream& in, std::string_view source_name = "<fixture>");

    void add(std::string query, std::vector<SearchHit> hits);
    std::vector<SearchHit> search(const std::string& query, std::size_t k) override;
    std::vector<std::string> requests() const;

private:
    std::vector<Entry> entries_;
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::vector<std::string> requests_;
};

/// Exact-prompt generation double that records every prompt it receives.
class ScriptedGeneration final : public GenerationProvider {
public:
    using Entry = std::pair<std::string, std::string>;

    ScriptedGeneration() = default;
    explicit ScriptedGeneration(std::vector<Entry> entries);

    /// JSON lines of {"prompt": ..., "completion": ...}.
    static ScriptedGeneration load(const std::filesystem::path& path);
    static ScriptedGeneration parse(std::istream& in, std::string_view source_name = "<fixture>");

    void add(std::string prompt, std::string completion);
    std::string generate(const std::string& prompt, const GenerationParams& params) override;
    std::vector<std::string> requests() const;

private:
    std::vector<Entry> entries_;
    std::unique_ptr<std::mutex> mutex_ = std::make_unique<std::mutex>();
    std::vector<std::string> requests_;
};

inline constexpr std::size_t kSnippetChars = 200;

/// Offline search over a local index. Hits carry the doc id, title, the
/// first 200 characters of the body as snippet, and the full body.
class IndexSearchAdapter final : public SearchProvider {
public:
    explicit IndexSearchAdapter(Index index) : index_(std::move(index)) {}

    std::vector<SearchHit> search(const std::string& query, std::size_t k) override;
    const Index& index() const noexcept { return index_; }

private:
    Index index_;
};

/// Pass-through that records every (query, hits) exchange in the scripted
/// fixture format, so a live session can be replayed offline.
class RecordingSearch final : public SearchProvider {
public:
    explicit RecordingSearch(SearchProvider& inner) : inner_(inner) {}

    std::vector<SearchHit> search(const std::string& query, std::size_t k) override;
    std::vector<ScriptedSearch::Entry> transcript() const;
    void write(std::ostream& out) const;

private:
    SearchProvider& inner_;
    mutable std::mutex mutex_;
    std::vector<ScriptedSearch::Entry> transcript_;
};

}  // namespace kgap
