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

#include <atomic>
#include <cstdlib>
#include <deque>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "kgap/errors.hpp"
#include "kgap/live.hpp"

using namespace kgap;
using nlohmann::json;
using namespace std::chrono_literals;

namespace {

/// Replays canned outcomes; an empty status means "timed out".
class FakeTransport final : public HttpTransport {
public:
    explicit FakeTransport(std::deque<std::optional<HttpResponse>> script) : script_(std::move(script)) {}
    HttpResponse send(const HttpRequest& request, std::chrono::milliseconds timeout) override {
        requests.push_back(request);
        timeouts.push_back(timeout);
        if (script_.empty()) throw TransportError(false, "script exhausted");
        auto next = script_.front();
        if (script_.size() > 1) script_.pop_front();
        if (!next) throw TransportError(true, "timeout");
        return *next;
    }
    std::vector<HttpRequest> requests;
    std::vector<std::chrono::milliseconds> timeouts;

private:
    std::deque<std::optional<HttpResponse>> script_;
};

struct SleepLog {
    std::vector<std::chrono::milliseconds> sleeps;
    Sleeper sleeper() {
        return [this](std::chrono::milliseconds d) { sleeps.push_back(d); };
    }
};

struct EnvVar {
    EnvVar(const char* name, const char* value) : name_(name) { ::setenv(name, value, 1); }
    ~EnvVar() { ::unsetenv(name_); }
    const char* name_;
};

std::string bing_payload(int n) {
    json items = json::array();
    for (int i = 0; i < n; ++i) {
        items.push_back({{"url", "https://e.com/" + std::to_string(i)}, {"name", "T" + std::to_string(i)},
                         {"snippet", "S" + std::to_string(i)}});
    }
    return json{{"webPages", {{"value", items}}}}.dump();
}

std::string chat_payload(const std::string& content, const std::string& finish = "stop") {
    return json{{"choices", {{{"message", {{"content", content}}}, {"finish_reason", finish}}}}}.dump();
}

SearchEndpoint search_endpoint() {
    SearchEndpoint e;
    e.url = "https://search.example/v7/search";
    e.credential_env = "KGAP_TEST_SEARCH_KEY";
    return e;
}

GenerationEndpoint generation_endpoint() {
    GenerationEndpoint e;
    e.url = "https://gen.example/v1/chat/completions";
    e.model = "test-model";
    e.credential_env = "KGAP_TEST_GEN_KEY";
    return e;
}

}  // namespace

TEST_CASE("live search truncates to k in provider order and sends the credential") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    auto transport = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, bing_payload(12)}});
    LiveSearch search(search_endpoint(), transport);
    const auto hits = search.search("rust borrow checker", 10);
    REQUIRE(hits.size() == 10);
    for (int i = 0; i < 10; ++i) CHECK(hits[static_cast<std::size_t>(i)].id == "https://e.com/" + std::to_string(i));
    CHECK(hits[3].title == "T3");
    CHECK(hits[3].snippet == "S3");
    REQUIRE(transport->requests.size() == 1);
    CHECK(transport->requests[0].url == "https://search.example/v7/search?q=rust%20borrow%20checker&count=10");
    CHECK(transport->requests[0].headers.at(0) == std::pair<std::string, std::string>{"Ocp-Apim-Subscription-Key", "secret"});
    CHECK(transport->timeouts[0] == 30'000ms);
}

TEST_CASE("an empty or absent result set is an empty list") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    auto empty = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, bing_payload(0)}});
    CHECK(LiveSearch(search_endpoint(), empty).search("x", 10).empty());
    auto absent = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, "{}"}});
    CHECK(LiveSearch(search_endpoint(), absent).search("x", 10).empty());
}

TEST_CASE("response mapping points at vendor-specific fields") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    auto endpoint = search_endpoint();
    endpoint.mapping = {"/results", "/link", "/heading", "/text"};
    auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{
        HttpResponse{200, R"({"results":[{"link":"u1","heading":"H","text":"B"}]})"}});
    const auto hits = LiveSearch(endpoint, t).search("x", 5);
    REQUIRE(hits.size() == 1);
    CHECK(hits[0].id == "u1");
    CHECK(hits[0].title == "H");
    CHECK(hits[0].snippet == "B");
}

TEST_CASE("unparseable and id-less payloads are BadPayload") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    auto garbage = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, "<html>"}});
    try {
        LiveSearch(search_endpoint(), garbage).search("x", 3);
        FAIL("expected BadPayload");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::BadPayload);
        CHECK_FALSE(e.retryable());
    }
    auto no_id = std::make_shared<FakeTransport>(
        std::deque<std::optional<HttpResponse>>{HttpResponse{200, R"({"webPages":{"value":[{"name":"x"}]}})"}});
    CHECK_THROWS_AS(LiveSearch(search_endpoint(), no_id).search("x", 3), ProviderError);
}

TEST_CASE("HTTP 429 retries three times with exponential backoff, then fails as rate limited") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{429, ""}});
    SleepLog log;
    LiveSearch search(search_endpoint(), t, log.sleeper());
    try {
        search.search("x", 3);
        FAIL("expected a rate-limit error");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::RateLimited);
        CHECK(e.retryable());
        CHECK(e.http_status() == 429);
    }
    CHECK(t->requests.size() == 4);
    CHECK(log.sleeps == std::vector<std::chrono::milliseconds>{500ms, 1000ms, 2000ms});
}

TEST_CASE("transient failures recover within the retry budget") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{
        HttpResponse{503, ""}, std::nullopt, HttpResponse{200, bing_payload(2)}});
    SleepLog log;
    CHECK(LiveSearch(search_endpoint(), t, log.sleeper()).search("x", 5).size() == 2);
    CHECK(t->requests.size() == 3);
    CHECK(log.sleeps.size() == 2);
}

TEST_CASE("auth failures and other 4xx are not retried") {
    EnvVar key("KGAP_TEST_SEARCH_KEY", "secret");
    for (int status : {401, 403, 404}) {
        auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{status, ""}});
        try {
            LiveSearch(search_endpoint(), t, SleepLog{}.sleeper()).search("x", 3);
            FAIL("expected an error");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == (status == 404 ? ProviderErrorKind::HttpStatus : ProviderErrorKind::Auth));
            CHECK_FALSE(e.retryable());
        }
        CHECK(t->requests.size() == 1);
    }
}

TEST_CASE("property: attempts never exceed 1 + max_retries and backoff doubles") {
    for (int retries = 0; retries <= 6; ++retries) {
        FakeTransport t({std::nullopt});
        SleepLog log;
        RetryPolicy policy;
        policy.max_retries = retries;
        policy.timeout = 7ms;
        HttpRequest request;
        try {
            send_with_retries(t, request, policy, log.sleeper(), "probe");
            FAIL("expected a timeout");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderErrorKind::Timeout);
        }
        CHECK(t.requests.size() == static_cast<std::size_t>(retries + 1));
        REQUIRE(log.sleeps.size() == static_cast<std::size_t>(retries));
        for (std::size_t i = 0; i < log.sleeps.size(); ++i) CHECK(log.sleeps[i] == std::chrono::milliseconds(500 << i));
        for (auto to : t.timeouts) CHECK(to == 7ms);
    }
}

TEST_CASE("timeouts name the configured deadline") {
    FakeTransport t({std::nullopt});
    try {
        send_with_retries(t, HttpRequest{}, RetryPolicy{}, SleepLog{}.sleeper(), "generation");
        FAIL("expected a timeout");
    } catch (const ProviderError& e) {
        CHECK(e.kind() == ProviderErrorKind::Timeout);
        CHECK(std::string(e.what()).find("30000 ms") != std::string::npos);
    }
}

TEST_CASE("missing credentials fail at construction, before any request") {
    ::unsetenv("KGAP_TEST_SEARCH_KEY");
    ::unsetenv("KGAP_TEST_GEN_KEY");
    auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, "{}"}});
    CHECK_THROWS_AS(LiveSearch(search_endpoint(), t), ConfigError);
    CHECK_THROWS_AS(LiveGeneration(generation_endpoint(), t), ConfigError);
    CHECK(t->requests.empty());
}

TEST_CASE("live generation returns the completion verbatim and sends the chat body") {
    EnvVar key("KGAP_TEST_GEN_KEY", "g-key");
    auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, chat_payload("  Paris [1]\n")}});
    LiveGeneration gen(generation_endpoint(), t);
    CHECK(gen.generate("What is the capital of France?", GenerationParams{0.0, 64}) == "  Paris [1]\n");
    const auto body = json::parse(t->requests.at(0).body);
    CHECK(body["model"] == "test-model");
    CHECK(body["temperature"] == 0.0);
    CHECK(body["max_tokens"] == 64);
    CHECK(body["messages"][0]["content"] == "What is the capital of France?");
    CHECK(t->requests[0].method == "POST");
    bool saw_auth = false;
    for (const auto& [k, v] : t->requests[0].headers) saw_auth |= k == "Authorization" && v == "Bearer g-key";
    CHECK(saw_auth);
    CHECK_THROWS_AS(gen.generate("", {}), std::invalid_argument);
}

TEST_CASE("refusals, filtered and empty completions are distinct errors") {
    EnvVar key("KGAP_TEST_GEN_KEY", "g-key");
    auto run = [](const std::string& payload) {
        auto t = std::make_shared<FakeTransport>(std::deque<std::optional<HttpResponse>>{HttpResponse{200, payload}});
        try {
            LiveGeneration(generation_endpoint(), t).generate("p", {});
        } catch (const ProviderError& e) {
            return e.kind();
        }
        return ProviderErrorKind::Network;  // sentinel: nothing thrown
    };
    CHECK(run(json{{"choices", {{{"message", {{"content", nullptr}, {"refusal", "no"}}}}}}}.dump()) ==
          ProviderErrorKind::ContentRefused);
    CHECK(run(chat_payload("partial", "content_filter")) == ProviderErrorKind::ContentRefused);
    CHECK(run(chat_payload("")) == ProviderErrorKind::BadPayload);
    CHECK(run("{}") == ProviderErrorKind::BadPayload);
}

TEST_CASE("url_encode escapes reserved bytes") {
    CHECK(url_encode("a b&c=d/é") == "a%20b%26c%3Dd%2F%C3%A9");
    CHECK(url_encode("safe-_.~") == "safe-_.~");
}

TEST_CASE("httplib transport against a local server") {
    httplib::Server server;
    std::atomic<int> calls{0};
    server.Get("/search", [&](const httplib::Request& req, httplib::Response& res) {
        ++calls;
        if (req.get_header_value("Ocp-Apim-Subscription-Key") != "local") {
            res.status = 401;
            return;
        }
        if (calls == 1) {
            res.status = 503;
            return;
        }
        res.set_content(bing_payload(std::stoi(req.get_param_value("count")) + 2), "application/json");
    });
    server.Get("/slow", [](const httplib::Request&, httplib::Response& res) {
        std::this_thread::sleep_for(1500ms);
        res.set_content("{}", "application/json");
    });
    server.Post("/chat", [](const httplib::Request& req, httplib::Response& res) {
        const auto body = json::parse(req.body);
        res.set_content(chat_payload("echo: " + body["messages"][0]["content"].get<std::string>()), "application/json");
    });
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread thread([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    const std::string base = "http://127.0.0.1:" + std::to_string(port);

    {
        EnvVar key("KGAP_TEST_SEARCH_KEY", "local");
        auto endpoint = search_endpoint();
        endpoint.url = base + "/search";
        endpoint.retry.initial_backoff = 1ms;
        const std::size_t before = HttplibTransport::requests_attempted();
        LiveSearch search(endpoint, std::make_shared<HttplibTransport>());
        const auto hits = search.search("local query", 3);
        CHECK(hits.size() == 3);
        CHECK(calls == 2);
        CHECK(HttplibTransport::requests_attempted() - before == 2);
    }
    {
        EnvVar key("KGAP_TEST_GEN_KEY", "k");
        auto endpoint = generation_endpoint();
        endpoint.url = base + "/chat";
        LiveGeneration gen(endpoint, std::make_shared<HttplibTransport>());
        CHECK(gen.generate("hello", {}) == "echo: hello");
    }
    {
        HttplibTransport transport;
        RetryPolicy policy;
        policy.timeout = 200ms;
        policy.max_retries = 1;
        policy.initial_backoff = 1ms;
        HttpRequest request;
        request.url = base + "/slow";
        const auto start = std::chrono::steady_clock::now();
        try {
            send_with_retries(transport, request, policy, real_sleeper(), "slow");
            FAIL("expected a timeout");
        } catch (const ProviderError& e) {
            CHECK(e.kind() == ProviderErrorKind::Timeout);
        }
        // Bounded by attempts x timeout plus slack, well under the handler's delay x 2.
        CHECK(std::chrono::steady_clock::now() - start < 1400ms);
    }
    server.stop();
    thread.join();
}
