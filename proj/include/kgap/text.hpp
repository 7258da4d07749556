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

#include <string>
#include <string_view>
#include <vector>

namespace kgap {

/// Lowercases ASCII and splits on runs of non-alphanumeric ASCII bytes.
/// Bytes >= 0x80 are kept inside tokens so multi-byte UTF-8 words stay whole.
std::vector<std::string> tokenize(std::string_view text);

/// Whitespace-separated words, untouched.
std::vector<std::string> split_words(std::string_view text);

std::string_view trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

/// Lowercase, collapse whitespace runs to one space, trim, and fold the
/// typographic apostrophes U+2018/U+2019 to ASCII '.
std::string normalize_for_match(std::string_view text);

bool has_alnum(std::string_view text);

/// Prefix of `text` holding at most `max_chars` UTF-8 code points.
std::string utf8_prefix(std::string_view text, std::size_t max_chars);

std::vector<std::string> split_lines(std::string_view text);

/// Sentences end at '.', '!' or '?' followed by whitespace or end of text.
std::vector<std::string> split_sentences(std::string_view text);

}  // namespace kgap
