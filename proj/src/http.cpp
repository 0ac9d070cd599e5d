#include "annotator/http.hpp"

#include <httplib.h>

#include <thread>

#include "annotator/errors.hpp"

namespace annotator {

namespace {

bool retryable_status(int status) {
  return status == 429 || (status >= 500 && status < 600);
}

}  // namespace

std::string http_post_json_with_retries(const std::string& endpoint,
                                        const std::string& path,
                                        const std::string& body,
                                        const std::string& api_key,
                                        const std::string& what,
                                        const RetryPolicy& policy) {
  std::string last_error;
  auto delay = policy.backoff_initial;

  for (int attempt = 1; attempt <= policy.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(delay);
      delay = std::chrono::milliseconds(static_cast<long long>(
          static_cast<double>(delay.count()) * policy.backoff_factor));
    }

    httplib::Client client(endpoint);
    client.set_connection_timeout(10, 0);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (!api_key.empty())
      headers.emplace("Authorization", "Bearer " + api_key);

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      if (res->body.empty())
        throw IntegrityError(what + ": empty response body");
      return res->body;
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!retryable_status(res->status)) {
      throw ProviderError(what + ": " + last_error + " (not retryable)",
                          attempt);
    }
  }
  throw ProviderError(what + ": " + last_error + " after " +
                          std::to_string(policy.max_attempts) + " attempts",
                      policy.max_attempts);
}

bool endpoint_reachable(const std::string& endpoint) {
  httplib::Client client(endpoint);
  client.set_connection_timeout(5, 0);
  client.set_read_timeout(10, 0);
  // Any HTTP response at all means the endpoint is there; only transport
  // failures count as unreachable.
  auto res = client.Head("/");
  if (res) return true;
  return res.error() != httplib::Error::Connection &&
         res.error() != httplib::Error::ConnectionTimeout;
}

}  // namespace annotator
