#pragma once

#include <stdexcept>
#include <string>

namespace hybridrank {

struct RetryPolicy {
  int max_attempts = 4;
  double backoff_base_seconds = 0.5;  // sleep base * 2^(attempt-1) between tries
};

struct LlmEndpoint {
  std::string base_url;  // e.g. "https://api.openai.com/v1"
  std::string model_name;
  double temperature = 0.0;
  double timeout_seconds = 30.0;
  int max_concurrency = 4;
  RetryPolicy retry;
  // Name of the environment variable holding the bearer token; requests go
  // out unauthenticated when it is unset.
  std::string api_key_env = "HYBRIDRANK_API_KEY";
};

struct Completion {
  std::string text;
  double latency_seconds = 0.0;
  int attempts = 1;
};

// Connection failures, timeouts, and retryable statuses that survived every
// attempt.
class TransportError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// A non-retryable HTTP status or a response body that is not the expected
// chat-completion shape.
class ProtocolError : public std::runtime_error {
public:
  ProtocolError(int status, const std::string& message)
      : std::runtime_error(message), status_(status) {}
  int status() const noexcept { return status_; }

private:
  int status_;
};

// Sends one chat-completion request (single user message) and returns the
// first choice's text. 429 and 5xx statuses and transport failures are
// retried with exponential backoff per endpoint.retry.
Completion complete(const LlmEndpoint& endpoint, const std::string& prompt);

}  // namespace hybridrank
