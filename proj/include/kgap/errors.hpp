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

#include <stdexcept>
#include <string>
#include <string_view>

namespace kgap {

/// Base of every error the engine raises on purpose. The CLI maps the three
/// subclasses below onto distinct exit statuses.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent configuration (missing credentials, bad flags,
/// offline mode pointing at live endpoints).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Malformed or inconsistent input data.
class DataError : public Error {
public:
    using Error::Error;
};

/// Query text that tokenizes to nothing.
class InvalidQuery : public DataError {
public:
    explicit InvalidQuery(std::string_view query)
        : DataError("invalid query (no searchable tokens): '" + std::string(query) + "'") {}
};

/// A metric requested over an empty population.
class UndefinedMetric : public DataError {
public:
    using DataError::DataError;
};

enum class ProviderErrorKind {
    Timeout,
    RateLimited,
    HttpStatus,
    BadPayload,
    Network,
    Auth,
    ContentRefused,
    FixtureMiss,
};

std::string_view to_string(ProviderErrorKind kind);

/// Failure of a search or generation provider.
class ProviderError : public Error {
public:
    ProviderError(ProviderErrorKind kind, std::string message, bool retryable = false,
                  int http_status = 0);

    ProviderErrorKind kind() const noexcept { return kind_; }
    bool retryable() const noexcept { return retryable_; }
    int http_status() const noexcept { return http_status_; }

    /// Copy of this error with `context` prefixed to the message.
    ProviderError annotated(std::string_view context) const;

private:
    ProviderErrorKind kind_;
    bool retryable_;
    int http_status_;
};

}  // namespace kgap
