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

#include "kgap/live.hpp"

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <json.hpp>

namespace kgap {

using nlohmann::json;

namespace {

std::atomic<std::size_t> g_requests_attempted{0};

struct SplitUrl {
    std::string origin;  // scheme://host[:port]
    std::string target;  // /path?query
};

SplitUrl split_url(const std::string& url) {
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) throw ConfigError("endpoint url lacks a scheme: '" + url + "'");
    auto path_start = url.find('/', scheme_end + 3);
    if (path_start == std::string::npos) return {url, "/"};
    return {url.substr(0, path_start), url.substr(path_start)};
}

const json* find_pointer(const json& root, const std::string& pointer) {
    if (pointer.empty()) return &root;
    try {
        json::json_pointer ptr(pointer);
        if (!root.contains(ptr)) return nullptr;
        return &root.at(ptr);
    } catch (const json::exception&) {
        return nullptr;
    }
}

json parse_payload(const std::string& body, std::string_view what) {
    try {
        return json::parse(body);
    } catch (const json::parse_error& e) {
        throw ProviderError(ProviderErrorKind::BadPayload,
                            std::string(what) + ": unparseable response payload: " + e.what());
    }
}

}  // namespace

HttpResponse HttplibTransport::send(const HttpRequest& request, std::chrono::milliseconds timeout) {
    ++g_requests_attempted;
    auto [origin, target] = split_url(request.url);
    httplib::Client client(origin);
    if (!client.is_valid()) throw TransportError(false, "unsupported endpoint '" + origin + "'");
    const auto secs = static_cast<time_t>(timeout.count() / 1000);
    const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers headers;
    std::string content_type = "application/json";
    for (const auto& [name, value] : request.headers) {
        if (name == "Content-Type") content_type = value;
        else headers.emplace(name, value);
    }

    httplib::Result result = request.method == "POST"
                                 ? client.Post(target, headers, request.body, content_type)
                                 : client.Get(target, headers);
    if (!result) {
        const auto err = result.error();
        const bool timed_out = err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read;
        throw TransportError(timed_out, httplib::to_string(err));
    }
    return {result->status, result->body};
}

std::size_t HttplibTransport::requests_attempted() { return g_requests_attempted.load(); }

Sleeper real_sleeper() {
    return [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpResponse send_with_retries(HttpTransport& transport, const HttpRequest& request,
                               const RetryPolicy& policy, const Sleeper& sleep,
                               std::string_view what) {
    const int attempts = 1 + std::max(0, policy.max_retries);
    std::optional<ProviderError> last;
    for (int attempt = 0; attempt < attempts; ++attempt) {
        if (attempt > 0) {
            const double factor = std::pow(policy.backoff_multiplier, attempt - 1);
            sleep(std::chrono::milliseconds(
                static_cast<long long>(std::llround(static_cast<double>(policy.initial_backoff.count()) * factor))));
        }
        try {
            HttpResponse response = transport.send(request, policy.timeout);
            const int s = response.status;
            if (s >= 200 && s < 300) return response;
            const std::string status = std::string(what) + ": HTTP " + std::to_string(s);
            if (s == 401 || s == 403) {
                throw ProviderError(ProviderErrorKind::Auth, status + " (authentication failed)", false, s);
            }
            if (s == 429) {
                last = ProviderError(ProviderErrorKind::RateLimited, status + " (rate limited)", true, s);
            } else if (s >= 500) {
                last = ProviderError(ProviderErrorKind::HttpStatus, status, true, s);
            } else {
                throw ProviderError(ProviderErrorKind::HttpStatus, status, false, s);
            }
        } catch (const TransportError& e) {
            if (e.timed_out()) {
                last = ProviderError(ProviderErrorKind::Timeout,
                                     std::string(what) + ": timed out after " +
                                         std::to_string(policy.timeout.count()) + " ms deadline",
                                     true);
            } else {
                last = ProviderError(ProviderErrorKind::Network,
                                     std::string(what) + ": network error: " + e.what(), true);
            }
        }
    }
    throw last->annotated("giving up after " + std::to_string(attempts) + " attempts");
}

std::string url_encode(std::string_view text) {
    std::string out;
    for (unsigned char c : text) {
        if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
            out.push_back(static_cast<char>(c));
        } else {
            char buf[4];
            std::snprintf(buf, sizeof buf, "%%%02X", c);
            out += buf;
        }
    }
    return out;
}

std::string require_env(const std::string& variable) {
    const char* value = std::getenv(variable.c_str());
    if (value == nullptr || *value == '\0') {
        throw ConfigError("credential environment variable " + variable + " is not set");
    }
    return value;
}

LiveSearch::LiveSearch(SearchEndpoint endpoint, std::shared_ptr<HttpTransport> transport, Sleeper sleep)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), sleep_(std::move(sleep)) {
    if (endpoint_.url.empty()) throw ConfigError("search endpoint url is not configured");
    credential_ = require_env(endpoint_.credential_env);
}

std::vector<SearchHit> LiveSearch::search(const std::string& query, std::size_t k) {
    HttpRequest request;
    request.method = "GET";
    request.url = endpoint_.url + (endpoint_.url.find('?') == std::string::npos ? "?" : "&") +
                  endpoint_.query_param + "=" + url_encode(query);
    if (!endpoint_.count_param.empty()) request.url += "&" + endpoint_.count_param + "=" + std::to_string(k);
    request.headers.emplace_back(endpoint_.credential_header, credential_);

    auto response = send_with_retries(*transport_, request, endpoint_.retry, sleep_, "search");
    json payload = parse_payload(response.body, "search");

    std::vector<SearchHit> hits;
    const json* results = find_pointer(payload, endpoint_.mapping.results);
    if (results == nullptr || results->is_null()) return hits;
    if (!results->is_array()) {
        throw ProviderError(ProviderErrorKind::BadPayload, "search: result list at '" +
                                                               endpoint_.mapping.results + "' is not an array");
    }
    for (const auto& item : *results) {
        if (hits.size() == k) break;
        const json* id = find_pointer(item, endpoint_.mapping.id);
        if (id == nullptr || !id->is_string() || id->get<std::string>().empty()) {
            throw ProviderError(ProviderErrorKind::BadPayload, "search: result without an id at '" +
                                                                   endpoint_.mapping.id + "'");
        }
        SearchHit hit;
        hit.id = id->get<std::string>();
        if (const json* t = find_pointer(item, endpoint_.mapping.title); t && t->is_string()) hit.title = *t;
        if (const json* s = find_pointer(item, endpoint_.mapping.snippet); s && s->is_string()) hit.snippet = *s;
        hits.push_back(std::move(hit));
    }
    return hits;
}

LiveGeneration::LiveGeneration(GenerationEndpoint endpoint, std::shared_ptr<HttpTransport> transport,
                               Sleeper sleep)
    : endpoint_(std::move(endpoint)), transport_(std::move(transport)), sleep_(std::move(sleep)) {
    if (endpoint_.url.empty()) throw ConfigError("generation endpoint url is not configured");
    credential_ = require_env(endpoint_.credential_env);
}

std::string LiveGeneration::generate(const std::string& prompt, const GenerationParams& params) {
    if (prompt.empty()) throw std::invalid_argument("generation prompt is empty");
    json body = {
        {"model", endpoint_.model},
        {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
        {"temperature", params.temperature},
        {"max_tokens", params.max_tokens},
    };
    HttpRequest request;
    request.method = "POST";
    request.url = endpoint_.url;
    request.body = body.dump();
    request.headers.emplace_back("Content-Type", "application/json");
    request.headers.emplace_back(endpoint_.credential_header, endpoint_.credential_prefix + credential_);

    auto response = send_with_retries(*transport_, request, endpoint_.retry, sleep_, "generation");
    json payload = parse_payload(response.body, "generation");

    if (const json* refusal = find_pointer(payload, endpoint_.refusal_path);
        refusal && refusal->is_string() && !refusal->get<std::string>().empty()) {
        throw ProviderError(ProviderErrorKind::ContentRefused, "generation: refused: " + refusal->get<std::string>());
    }
    if (const json* reason = find_pointer(payload, endpoint_.finish_reason_path);
        reason && reason->is_string() && *reason == "content_filter") {
        throw ProviderError(ProviderErrorKind::ContentRefused, "generation: refused by content filter");
    }
    const json* text = find_pointer(payload, endpoint_.completion_path);
    if (text == nullptr || !text->is_string() || text->get<std::string>().empty()) {
        throw ProviderError(ProviderErrorKind::BadPayload,
                            "generation: no completion text at '" + endpoint_.completion_path + "'");
    }
    return text->get<std::string>();
}

}  // namespace kgap
