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

#include "kgap/queries.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <set>

#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/text.hpp"

namespace kgap {

using nlohmann::json;

namespace {

std::optional<std::string> optional_field(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw DataError(where + ": field '" + key + "' must be a string");
    return it->get<std::string>();
}

}  // namespace

std::vector<QueryRecord> parse_queries(std::istream& in, std::string_view source_name) {
    std::vector<QueryRecord> out;
    std::set<std::string> ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const std::string where = std::string(source_name) + ":" + std::to_string(line_no);
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw DataError(where + ": malformed query record: " + e.what());
        }
        if (!j.is_object()) throw DataError(where + ": query record must be a JSON object");
        QueryRecord q;
        q.text = optional_field(j, "text", where).value_or("");
        if (trim(q.text).empty()) throw DataError(where + ": query text is empty");
        q.id = optional_field(j, "id", where).value_or("q" + std::to_string(line_no));
        q.category = optional_field(j, "category", where);
        q.difficulty = optional_field(j, "difficulty", where);
        if (!ids.insert(q.id).second) throw DataError(where + ": duplicate query id '" + q.id + "'");
        out.push_back(std::move(q));
    }
    return out;
}

std::vector<QueryRecord> load_queries(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot read query file '" + path.string() + "'");
    return parse_queries(in, path.string());
}

void write_queries(std::ostream& out, const std::vector<QueryRecord>& queries) {
    for (const auto& q : queries) {
        json j = {{"id", q.id}, {"text", q.text}};
        j["category"] = q.category ? json(*q.category) : json(nullptr);
        j["difficulty"] = q.difficulty ? json(*q.difficulty) : json(nullptr);
        out << j.dump() << '\n';
    }
}

}  // namespace kgap
