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

#include "kgap/text.hpp"
#include "support.hpp"

using namespace kgap;

TEST_CASE("tokenize lowercases and splits on non-alphanumeric runs") {
    CHECK(tokenize("Rust compiler") == std::vector<std::string>{"rust", "compiler"});
    CHECK(tokenize("  a--b__c 42x ") == std::vector<std::string>{"a", "b", "c", "42x"});
    CHECK(tokenize("...").empty());
    CHECK(tokenize("").empty());
}

TEST_CASE("tokenize keeps UTF-8 sequences inside tokens") {
    CHECK(tokenize("Caf\xc3\xa9 au lait") == std::vector<std::string>{"caf\xc3\xa9", "au", "lait"});
}

TEST_CASE("tokenize agrees with an independent tokenizer on random text") {
    test::Rng rng(11);
    const std::string alphabet = "abcXYZ019 ,.;-_\t\n!?'\xc3\xa9";
    for (int i = 0; i < 2000; ++i) {
        std::string s;
        const auto len = rng.below(30);
        for (std::size_t j = 0; j < len; ++j) s.push_back(alphabet[rng.below(alphabet.size())]);
        CHECK(tokenize(s) == test::oracle_tokens(s));
    }
}

TEST_CASE("split_words, trim and normalize_for_match") {
    CHECK(split_words("  how do  I\tfly ") == std::vector<std::string>{"how", "do", "I", "fly"});
    CHECK(trim("  x y \n") == "x y");
    CHECK(normalize_for_match("I  Don\xe2\x80\x99t\n KNOW") == "i don't know");
}

TEST_CASE("utf8_prefix counts code points, not bytes") {
    CHECK(utf8_prefix("h\xc3\xa9llo", 2) == "h\xc3\xa9");
    CHECK(utf8_prefix("short", 200) == "short");
    CHECK(utf8_prefix("", 3).empty());
}

TEST_CASE("split_sentences ends at terminal punctuation followed by space") {
    const auto s = split_sentences("Paris is big. It has 2.1 million people! Really? yes");
    REQUIRE(s.size() == 4);
    CHECK(s[0] == "Paris is big.");
    CHECK(s[1] == "It has 2.1 million people!");
    CHECK(s[3] == "yes");
}
