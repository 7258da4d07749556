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

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kgap {

/// One line of a query file: {"id", "text", "category", "difficulty"}.
/// `id` defaults to "q<line>" when absent; category and difficulty are
/// optional labels used for report grouping.
struct QueryRecord {
    std::string id;
    std::string text;
    std::optional<std::string> category;
    std::optional<std::string> difficulty;

    friend bool operator==(const QueryRecord&, const QueryRecord&) = default;
};

std::vector<QueryRecord> parse_queries(std::istream& in, std::string_view source_name = "<queries>");
std::vector<QueryRecord> load_queries(const std::filesystem::path& path);
void write_queries(std::ostream& out, const std::vector<QueryRecord>& queries);

}  // namespace kgap
