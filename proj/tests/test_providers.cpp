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

#include <doctest.h>

#include <sstream>

#include "kgap/errors.hpp"
#include "kgap/providers.hpp"
#include "kgap/simulator.hpp"
#include "support.hpp"

using namespace kgap;

namespace {

SearchHit hit(std::string id) { return {id, "t-" + id, "s-" + id, std::nullopt, std::nullopt}; }

Document doc(std::string id, std::string body) {
    return Document{std::move(id), "title", std::move(body), std::nullopt, std::nullopt};
}

}  // namespace

TEST_CASE("scripted search is an exact-match lookup") {
    ScriptedSearch s({{"q1", {hit("h1"), hit("h2")}}, {"q-empty", {}}});
    CHECK(s.search("q1", 1) == std::vector<SearchHit>{hit("h1")});
    CHECK(s.search("q1", 5).size() == 2);
    CHECK(s.search("q-empty", 10).empty());
    try {
        s.search("q9", 3);
        FAIL("expected a fixture miss");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::FixtureMiss);
        CHECK(std::string(e.what()).find("q9") != std::string::npos);
    }
    CHECK_THROWS_AS(s.search("Q1", 3), ProviderError);  // no case folding
    CHECK(s.requests() == std::vector<std::string>{"q1", "q1", "q-empty", "q9", "Q1"});
}

TEST_CASE("scripted fixtures parse from JSON lines and reject duplicates") {
    std::istringstream in(R"({"query":"a","hits":[{"id":"x","title":"X","snippet":"sx","score":1.5}]})"
                          "\n"
                          R"({"query":"b","hits":[]})"
                          "\n");
    auto s = ScriptedSearch::parse(in);
    const auto hits = s.search("a", 10);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].score == std::optional<double>(1.5));

    std::istringstream dup(R"({"query":"a","hits":[]})"
                           "\n"
                           R"({"query":"a","hits":[]})"
                           "\n");
    CHECK_THROWS_AS(ScriptedSearch::parse(dup), DataError);
    std::istringstream no_id(R"({"query":"a","hits":[{"title":"x"}]})");
    CHECK_THROWS_AS(ScriptedSearch::parse(no_id), DataError);

    std::istringstream gen(R"({"prompt":"p1","completion":"c1"})"
                           "\n");
    auto g = ScriptedGeneration::parse(gen);
    CHECK(g.generate("p1", {}) == "c1");
    CHECK_THROWS_AS(g.generate("p2", {}), ProviderError);
    CHECK(g.requests() == std::vector<std::string>{"p1", "p2"});
}

TEST_CASE("index adapter delegates ranking and trims snippets to 200 characters") {
    const std::string long_body(450, 'x');
    const std::vector<Document> docs{doc("d1", "short body about cats"), doc("d2", "cats " + long_body),
                                     doc("d3", "dogs only")};
    Index index = Index::build(Corpus(docs));
    IndexSearchAdapter adapter(index);
    const auto hits = adapter.search("cats", 10);
    const auto ranked = index.search("cats", 10);
    REQUIRE(hits.size() == ranked.size());
    for (std::size_t i = 0; i < hits.size(); ++i) {
        CHECK(hits[i].id == ranked[i].doc_id);
        CHECK(hits[i].score == std::optional<double>(ranked[i].score));
    }
    const auto& d1 = hits[0].id == "d1" ? hits[0] : hits[1];
    const auto& d2 = hits[0].id == "d2" ? hits[0] : hits[1];
    CHECK(d1.snippet == "short body about cats");
    CHECK(d2.snippet.size() == 200);
    CHECK(d2.content == std::optional<std::string>(docs[1].body));
    CHECK(d1.title == "title");

    IndexSearchAdapter ablated(index.remove_documents({"d1"}).index);
    for (const auto& h : ablated.search("short cats", 10)) CHECK(h.id != "d1");
    CHECK_THROWS_AS(adapter.search("  ", 3), InvalidQuery);
}

TEST_CASE("recorded transcripts replay to identical simulations") {
    test::Rng rng(99);
    auto docs = test::random_documents(rng, 120, 25);
    IndexSearchAdapter adapter(Index::build(Corpus(docs)));
    LoopConfig config;
    config.max_depth = 4;
    config.top_k_initial = 5;
    for (int round = 0; round < 10; ++round) {
        const std::string seed = test::random_query(rng, 25);
        RecordingSearch recorder(adapter);
        ExtractiveAnswerer answerer(0.4);
        SubqueryReformulator reformulator;
        test::RandomFollowups followups(round);
        const auto original =
            run_simulation(seed, SimulationProviders{recorder, answerer, reformulator, &followups}, config);

        std::ostringstream transcript;
        recorder.write(transcript);
        std::istringstream in(transcript.str());
        auto replay = ScriptedSearch::parse(in);
        const auto replayed =
            run_simulation(seed, SimulationProviders{replay, answerer, reformulator, &followups}, config);

        std::ostringstream a, b;
        write_trace(a, original);
        write_trace(b, replayed);
        CHECK(a.str() == b.str());
    }
}
