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

#include "kgap/answer.hpp"
#include "kgap/text.hpp"
#include "kgap/errors.hpp"
#include "support.hpp"

using namespace kgap;

namespace {

SearchHit hit(std::string id, std::string snippet, std::optional<std::string> content = std::nullopt) {
    return {id, "title " + id, std::move(snippet), std::nullopt, std::move(content)};
}

NoAnswerPolicy mode(NoAnswerMode m) {
    NoAnswerPolicy p;
    p.mode = m;
    return p;
}

}  // namespace

TEST_CASE("detect_no_answer by mode") {
    CHECK(detect_no_answer("I don't know the answer to that.", mode(NoAnswerMode::LexiconScan)));
    CHECK(detect_no_answer("NO_ANSWER", mode(NoAnswerMode::SentinelToken)));
    CHECK_FALSE(detect_no_answer("The boiling point is 100\xc2\xb0" "C.", NoAnswerPolicy{}));
    CHECK_FALSE(detect_no_answer("NO_ANSWER", mode(NoAnswerMode::LexiconScan)));
    CHECK_FALSE(detect_no_answer("I don't know", mode(NoAnswerMode::SentinelToken)));
    CHECK(detect_no_answer("Sorry,   I DO NOT\nknow.", NoAnswerPolicy{}));
    CHECK(detect_no_answer("I don\xe2\x80\x99t know", NoAnswerPolicy{}));
    CHECK(detect_no_answer("We were unable to find it.", NoAnswerPolicy{}));
}

TEST_CASE("no-answer mode strings") {
    CHECK(no_answer_mode_from_string("both") == NoAnswerMode::Both);
    CHECK(to_string(NoAnswerMode::SentinelToken) == "sentinel");
    CHECK_THROWS_AS(no_answer_mode_from_string("maybe"), ConfigError);
}

TEST_CASE("property: detect_no_answer is monotone in the lexicon") {
    test::Rng rng(17);
    const std::vector<std::string> pool{"i don't know", "cannot find", "maybe", "not sure", "xyz", "the answer",
                                        "unable to find", "perhaps not"};
    const std::vector<std::string> texts{"I am not sure.", "The answer is 4.", "We cannot find it", "xyz abc",
                                         "Perhaps NOT today", "plain statement", "NO_ANSWER"};
    for (int i = 0; i < 500; ++i) {
        NoAnswerPolicy p;
        p.mode = rng.chance(0.5) ? NoAnswerMode::LexiconScan : NoAnswerMode::Both;
        p.lexicon.clear();
        for (const auto& phrase : pool) {
            if (rng.chance(0.3)) p.lexicon.push_back(phrase);
        }
        NoAnswerPolicy bigger = p;
        bigger.lexicon.push_back(rng.pick(pool));
        const auto& text = rng.pick(texts);
        if (detect_no_answer(text, p)) CHECK(detect_no_answer(text, bigger));
    }
}

TEST_CASE("load_phrase_list skips comments and blanks") {
    const auto dir = test::scratch_dir("phrases");
    test::write_text(dir / "p.txt", "# header\nno idea\n\n  not sure  \n#x\n");
    CHECK(load_phrase_list(dir / "p.txt") == std::vector<std::string>{"no idea", "not sure"});
    CHECK_THROWS_AS(load_phrase_list(dir / "missing.txt"), DataError);
}

TEST_CASE("shipped no-answer lexicon matches the built-in default") {
    CHECK(load_phrase_list(test::source_dir() / "data" / "lexicons" / "no_answer.txt") == default_no_answer_lexicon());
}

TEST_CASE("Answer construction enforces the status invariants") {
    CHECK_THROWS_AS(Answer::answered("q", "  ", {}, NoAnswerPolicy{}), std::invalid_argument);
    CHECK_THROWS_AS(Answer::answered("q", "it is NO_ANSWER", {}, NoAnswerPolicy{}), std::invalid_argument);
    CHECK_THROWS_AS(Answer::answered("q", "I don't know", {}, NoAnswerPolicy{}), std::invalid_argument);
    const auto a = Answer::answered("q", "Paris.", {"d1"}, NoAnswerPolicy{});
    CHECK(a.is_answered());
    const auto n = Answer::no_answer("q");
    CHECK(n.status() == AnswerStatus::NoAnswer);
    CHECK(n.cited_sources().empty());
}

TEST_CASE("PromptTemplate substitutes each placeholder exactly once") {
    const PromptTemplate t{std::string(kFollowupTemplate)};
    const std::string out = t.render("Paris is the capital.", "What is the capital of France?");
    CHECK(out ==
          "Based on the answer 'Paris is the capital.' and the question 'What is the capital of France?', what are "
          "some potential short follow-up questions?");
    // Placeholder text inside arguments is not expanded again.
    CHECK(t.render("{1}", "{0}").find("answer '{1}' and the question '{0}'") != std::string::npos);
    CHECK_THROWS_AS(PromptTemplate("only {0}"), ConfigError);
    CHECK_THROWS_AS(PromptTemplate("{0} {0} {1}"), ConfigError);
    CHECK(PromptTemplate("{1} then {0}").render("a", "b") == "b then a");
}

TEST_CASE("synthesize_answer: sentinel completion is NoAnswer") {
    const std::vector<SearchHit> docs{hit("d1", "text")};
    const auto prompt = build_grounded_prompt("Q?", docs, NoAnswerPolicy{});
    ScriptedGeneration gen({{prompt, "NO_ANSWER"}});
    const auto a = synthesize_answer("Q?", docs, gen, NoAnswerPolicy{});
    CHECK(a.status() == AnswerStatus::NoAnswer);
    CHECK(a.cited_sources().empty());
}

TEST_CASE("synthesize_answer parses numbered citations") {
    const std::vector<SearchHit> docs{hit("d7", "Paris is the capital of France."), hit("d9", "Lyon")};
    const auto prompt = build_grounded_prompt("What is the capital of France?", docs, NoAnswerPolicy{});
    CHECK(prompt.find("Question: What is the capital of France?") != std::string::npos);
    CHECK(prompt.find("[1] title d7\nParis is the capital of France.") != std::string::npos);
    CHECK(prompt.find("reply with exactly NO_ANSWER") != std::string::npos);
    ScriptedGeneration gen({{prompt, "Paris is the capital of France [1]"}});
    const auto a = synthesize_answer("What is the capital of France?", docs, gen, NoAnswerPolicy{});
    CHECK(a.is_answered());
    CHECK(a.cited_sources() == std::vector<std::string>{"d7"});
    CHECK(gen.requests() == std::vector<std::string>{prompt});
}

TEST_CASE("synthesize_answer without citations cites every hit; lexicon mode omits the instruction") {
    const std::vector<SearchHit> docs{hit("a", "x"), hit("b", "y")};
    const auto lexicon_only = mode(NoAnswerMode::LexiconScan);
    const auto prompt = build_grounded_prompt("Q?", docs, lexicon_only);
    CHECK(prompt.find("NO_ANSWER") == std::string::npos);
    ScriptedGeneration gen({{prompt, "Some answer."}});
    CHECK(synthesize_answer("Q?", docs, gen, lexicon_only).cited_sources() == std::vector<std::string>{"a", "b"});
}

TEST_CASE("synthesize_answer with no documents and a sentinel reply") {
    const auto prompt = build_grounded_prompt("Q?", {}, NoAnswerPolicy{});
    ScriptedGeneration gen({{prompt, "NO_ANSWER"}});
    const auto a = synthesize_answer("Q?", {}, gen, NoAnswerPolicy{});
    CHECK(a.status() == AnswerStatus::NoAnswer);
    CHECK(a.cited_sources().empty());
    ScriptedGeneration empty;
    CHECK_THROWS_AS(synthesize_answer("Q?", {}, empty, NoAnswerPolicy{}), ProviderError);
}

TEST_CASE("parse_citations handles lists, ranges out of bounds and repeats") {
    const std::vector<SearchHit> docs{hit("a", ""), hit("b", ""), hit("c", "")};
    CHECK(parse_citations("see [2] and [1, 3] and [2] and [9]", docs) == std::vector<std::string>{"b", "a", "c"});
    CHECK(parse_citations("no refs", docs).empty());
}

TEST_CASE("parse_question_list strips markers and drops empty lines") {
    CHECK(parse_question_list("1. How does X work?\n2) Why is X used?\n- What next?\n* Bullet\n\xe2\x80\xa2 Dot\n"
                              "Q3: Labeled?\n(4) Paren?\n   \n---\n") ==
          std::vector<std::string>{"How does X work?", "Why is X used?", "What next?", "Bullet", "Dot", "Labeled?",
                                   "Paren?"});
}

TEST_CASE("generate_followups renders the template and truncates") {
    const auto answer = Answer::answered("What is X?", "X is a tool.", {}, NoAnswerPolicy{});
    const std::string prompt =
        "Based on the answer 'X is a tool.' and the question 'What is X?', what are some potential short follow-up "
        "questions?";
    ScriptedGeneration gen({{prompt, "1. How does X work?\n2. Why is X used?"}});
    CHECK(generate_followups("What is X?", answer, gen, 1) == std::vector<std::string>{"How does X work?"});
    CHECK(gen.requests() == std::vector<std::string>{prompt});

    ScriptedGeneration blank({{prompt, "\n\n   \n"}});
    CHECK(generate_followups("What is X?", answer, blank, 4).empty());
    CHECK_THROWS_AS(generate_followups("What is X?", Answer::no_answer("What is X?"), gen, 2), std::invalid_argument);
}

TEST_CASE("property: follow-up lists are bounded and non-blank") {
    test::Rng rng(8);
    const std::vector<std::string> lines{"1. one?", "", "   ", "- two", "3)", "* ", "four", "\t5. five  ", "?",
                                         "Q1: six"};
    const auto answer = Answer::answered("q", "a", {}, NoAnswerPolicy{});
    for (int i = 0; i < 300; ++i) {
        std::string completion;
        const auto n = rng.below(12);
        for (std::size_t j = 0; j < n; ++j) completion += rng.pick(lines) + "\n";
        class Fixed final : public GenerationProvider {
        public:
            explicit Fixed(std::string c) : c_(std::move(c)) {}
            std::string generate(const std::string&, const GenerationParams&) override { return c_; }
            std::string c_;
        } gen(completion);
        const std::size_t max_n = rng.between(1, 6);
        const auto out = generate_followups("q", answer, gen, max_n);
        CHECK(out.size() <= max_n);
        for (const auto& s : out) CHECK_FALSE(trim(s).empty());
    }
}

TEST_CASE("token_overlap uses distinct question tokens") {
    CHECK(token_overlap("capital of France", "Paris is the capital of France.") == doctest::Approx(1.0));
    CHECK(token_overlap("the the cat", "the dog") == doctest::Approx(0.5));
    CHECK(token_overlap("?!", "anything") == 0.0);
}

TEST_CASE("extractive_answer picks the best sentence above the threshold") {
    const std::vector<SearchHit> docs{
        hit("d1", "unused", std::string("Lyon is a city. Paris is the capital of France. Rome is old.")),
        hit("d2", "France has a capital.")};
    const auto a = extractive_answer("capital of France", docs, 0.5, NoAnswerPolicy{});
    CHECK(a.is_answered());
    CHECK(a.text() == "Paris is the capital of France.");
    CHECK(a.cited_sources() == std::vector<std::string>{"d1"});

    CHECK_FALSE(extractive_answer("capital of France", {}, 0.5, NoAnswerPolicy{}).is_answered());
    CHECK_FALSE(extractive_answer("quantum chromodynamics", docs, 0.5, NoAnswerPolicy{}).is_answered());
    CHECK(extractive_answer("quantum", docs, 0.5, NoAnswerPolicy{}).text() == "NO_ANSWER");
}

TEST_CASE("extractive_answer skips sentences that trip the detector and prefers earlier ties") {
    const std::vector<SearchHit> docs{hit("a", "I don't know the capital of France."),
                                      hit("b", "The capital of France is Paris."),
                                      hit("c", "The capital of France is Paris.")};
    const auto a = extractive_answer("capital of France", docs, 0.5, NoAnswerPolicy{});
    CHECK(a.text() == "The capital of France is Paris.");
    CHECK(a.cited_sources() == std::vector<std::string>{"b"});
}

TEST_CASE("property: extractive answers meet the threshold and repeat exactly") {
    test::Rng rng(21);
    for (int i = 0; i < 300; ++i) {
        auto docs_raw = test::random_documents(rng, rng.between(0, 6), 12);
        std::vector<SearchHit> docs;
        for (auto& d : docs_raw) {
            std::string body = d.body;
            for (auto& c : body) {
                if (c == ',') c = '.';
            }
            docs.push_back(hit(d.id, body));
        }
        const std::string q = test::random_query(rng, 12);
        const double min_overlap = static_cast<double>(rng.between(1, 10)) / 10.0;
        const auto a = extractive_answer(q, docs, min_overlap, NoAnswerPolicy{});
        CHECK(a == extractive_answer(q, docs, min_overlap, NoAnswerPolicy{}));
        if (a.is_answered()) {
            CHECK(token_overlap(q, a.text()) >= min_overlap);
            CHECK(a.text().find("NO_ANSWER") == std::string::npos);
        }
    }
}
