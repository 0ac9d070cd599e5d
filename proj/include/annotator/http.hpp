#pragma once

#include <chrono>
#include <string>

namespace annotator {

// Fixed retry policy shared by the embeddings and chat clients: 3 attempts,
// exponential backoff starting at 1s, retrying only transport failures,
// 429 and 5xx. `backoff_initial` is overridable for tests.
struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds backoff_initial{1000};
  double backoff_factor = 2.0;
};

// POST `body` as application/json; returns the response body on 2xx.
// Throws ProviderError (with attempt count) once retries are exhausted.
// `api_key`, when nonempty, is sent as a Bearer token.
std::string http_post_json_with_retries(const std::string& endpoint,
                                        const std::string& path,
                                        const std::string& body,
                                        const std::string& api_key,
                                        const std::string& what,
                                        const RetryPolicy& policy = {});

// Cheap reachability probe used to fail fast before a run spends anything.
bool endpoint_reachable(const std::string& endpoint);

}  // namespace annotator
