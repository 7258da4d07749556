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
#include <optional>
#include <string>

#include <json.hpp>

#include "kgap/answer.hpp"
#include "kgap/live.hpp"
#include "kgap/simulator.hpp"

namespace kgap {

enum class EngineMode { Offline, Live };

std::string_view to_string(EngineMode mode);

/// Everything a CLI run needs, read from one JSON file and then overridden
/// by flags. Relative paths resolve against the config file's directory.
struct EngineConfig {
    EngineMode mode = EngineMode::Offline;

    struct Paths {
        std::optional<std::filesystem::path> corpus;
        std::optional<std::filesystem::path> index;
        std::optional<std::filesystem::path> queries;
        std::optional<std::filesystem::path> qrels;
        std::optional<std::filesystem::path> traces;
        std::optional<std::filesystem::path> annotations;
        std::optional<std::filesystem::path> output_dir;
    } paths;

    LoopConfig loop;

    enum class AnswererKind { Extractive, Generative };
    AnswererKind answerer = AnswererKind::Extractive;
    double min_overlap = kDefaultMinOverlap;

    NoAnswerMode no_answer_mode = NoAnswerMode::Both;
    std::string sentinel{kDefaultSentinel};
    std::optional<std::filesystem::path> no_answer_lexicon;

    std::string followup_prompt{kFollowupTemplate};
    std::string reformulation_prompt{kReformulationTemplate};

    enum class ReformulatorKind { Subquery, Generation };
    std::optional<ReformulatorKind> reformulator;  // default: subquery offline, generation live

    std::optional<std::filesystem::path> jargon_lexicon;
    std::optional<std::filesystem::path> common_words;
    bool classifier_judge = false;

    GenerationParams generation_params;
    std::optional<std::filesystem::path> generation_fixture;
    std::optional<SearchEndpoint> search_endpoint;
    std::optional<GenerationEndpoint> generation_endpoint;

    std::size_t concurrency = 4;

    static EngineConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);
    static EngineConfig load(const std::filesystem::path& path);
    nlohmann::json to_json() const;

    ReformulatorKind effective_reformulator() const;
    NoAnswerPolicy no_answer_policy() const;

    /// Structural checks: loop budgets, offline/live consistency. Credentials
    /// are checked when live providers are constructed.
    void validate() const;
};

}  // namespace kgap
