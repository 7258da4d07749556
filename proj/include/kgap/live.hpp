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

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "kgap/errors.hpp"
#include "kgap/providers.hpp"

namespace kgap {

struct HttpRequest {
    std::string method = "GET";
    std::string url;
    std::vector<std::pair<std::string, std::string>> headers;
    std::string body;
};

struct HttpResponse {
    int status = 0;
    std::string body;
};

/// Thrown by transports when no HTTP response was obtained.
class TransportError : public std::runtime_error {
public:
    TransportError(bool timed_out, const std::string& message)
        : std::runtime_error(message), timed_out_(timed_out) {}
    bool timed_out() const noexcept { return timed_out_; }

private:
    bool timed_out_;
};

class HttpTransport {
public:
    virtual ~HttpTransport() = default;
    virtual HttpResponse send(const HttpRequest& request, std::chrono::milliseconds timeout) = 0;
};

/// cpp-httplib backed transport; https needs the build to have OpenSSL.
class HttplibTransport final : public HttpTransport {
public:
    HttpResponse send(const HttpRequest& request, std::chrono::milliseconds timeout) override;

    /// Requests attempted by every instance in this process.
    static std::size_t requests_attempted();
};

struct RetryPolicy {
    std::chrono::milliseconds timeout{30'000};
    int max_retries = 3;
    std::chrono::milliseconds initial_backoff{500};
    double backoff_multiplier = 2.0;
};

using Sleeper = std::function<void(std::chrono::milliseconds)>;
Sleeper real_sleeper();

/// One attempt plus up to `max_retries` retries of timeouts, network errors,
/// 429 and 5xx, sleeping initial_backoff * multiplier^i between attempts.
/// Returns the first 2xx response; throws ProviderError otherwise.
HttpResponse send_with_retries(HttpTransport& transport, const HttpRequest& request,
                               const RetryPolicy& policy, const Sleeper& sleep,
                               std::string_view what);

std::string url_encode(std::string_view text);

/// Reads a credential from the environment; ConfigError when unset or empty.
std::string require_env(const std::string& variable);

/// Where the interesting fields live in a search payload, as JSON pointers.
struct SearchResponseMapping {
    std::string results = "/webPages/value";
    std::string id = "/url";
    std::string title = "/name";
    std::string snippet = "/snippet";
};

struct SearchEndpoint {
    std::string url;
    std::string query_param = "q";
    std::string count_param = "count";
    std::string credential_env = "KGAP_SEARCH_KEY";
    std::string credential_header = "Ocp-Apim-Subscription-Key";
    SearchResponseMapping mapping;
    RetryPolicy retry;
};

class LiveSearch final : public SearchProvider {
public:
    /// Resolves the credential immediately, so a missing key fails before
    /// any request is made.
    LiveSearch(SearchEndpoint endpoint, std::shared_ptr<HttpTransport> transport,
               Sleeper sleep = real_sleeper());

    std::vector<SearchHit> search(const std::string& query, std::size_t k) override;

private:
    SearchEndpoint endpoint_;
    std::string credential_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleep_;
};

struct GenerationEndpoint {
    std::string url;
    std::string model;
    std::string credential_env = "KGAP_GENERATION_KEY";
    std::string credential_header = "Authorization";
    std::string credential_prefix = "Bearer ";
    std::string completion_path = "/choices/0/message/content";
    std::string refusal_path = "/choices/0/message/refusal";
    std::string finish_reason_path = "/choices/0/finish_reason";
    RetryPolicy retry;
};

/// Chat-completions style client: posts {model, messages, temperature,
/// max_tokens} and reads the completion at `completion_path`.
class LiveGeneration final : public GenerationProvider {
public:
    LiveGeneration(GenerationEndpoint endpoint, std::shared_ptr<HttpTransport> transport,
                   Sleeper sleep = real_sleeper());

    std::string generate(const std::string& prompt, const GenerationParams& params) override;

private:
    GenerationEndpoint endpoint_;
    std::string credential_;
    std::shared_ptr<HttpTransport> transport_;
    Sleeper sleep_;
};

}  // namespace kgap
