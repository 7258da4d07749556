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

#include "kgap/errors.hpp"

namespace kgap {

std::string_view to_string(ProviderErrorKind kind) {
    switch (kind) {
        case ProviderErrorKind::Timeout: return "timeout";
        case ProviderErrorKind::RateLimited: return "rate-limited";
        case ProviderErrorKind::HttpStatus: return "http-status";
        case ProviderErrorKind::BadPayload: return "bad-payload";
        case ProviderErrorKind::Network: return "network";
        case ProviderErrorKind::Auth: return "auth";
        case ProviderErrorKind::ContentRefused: return "content-refused";
        case ProviderErrorKind::FixtureMiss: return "fixture-miss";
    }
    return "unknown";
}

ProviderError::ProviderError(ProviderErrorKind kind, std::string message, bool retryable,
                             int http_status)
    : Error(std::move(message)), kind_(kind), retryable_(retryable), http_status_(http_status) {}

ProviderError ProviderError::annotated(std::string_view context) const {
    return ProviderError(kind_, std::string(context) + ": " + what(), retryable_, http_status_);
}

}  // namespace kgap
