#include "hybridrank/llm_client.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

namespace hybridrank {

namespace {

// "https://host:port/v1" -> ("https://host:port", "/v1")
std::pair<std::string, std::string> split_base_url(const std::string& url) {
  const std::size_t scheme = url.find("://");
  if (scheme == std::string::npos) {
    throw ProtocolError(0, "base_url must include a scheme: " + url);
  }
  const std::size_t path = url.find('/', scheme + 3);
  if (path == std::string::npos) return {url, ""};
  std::string prefix = url.substr(path);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {url.substr(0, path), prefix};
}

bool retryable_status(int status) { return status == 429 || (status >= 500 && status < 600); }

}  // namespace

Completion complete(const LlmEndpoint& endpoint, const std::string& prompt) {
  const auto [host, prefix] = split_base_url(endpoint.base_url);
  const std::string path = prefix + "/chat/completions";

  nlohmann::json payload{
      {"model", endpoint.model_name},
      {"temperature", endpoint.temperature},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", prompt}}})},
  };
  const std::string body = payload.dump();

  httplib::Headers headers{{"Accept", "application/json"}};
  if (const char* key = std::getenv(endpoint.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  const auto started = std::chrono::steady_clock::now();
  std::string last_failure = "no attempt made";

  for (int attempt = 1; attempt <= endpoint.retry.max_attempts; ++attempt) {
    if (attempt > 1) {
      const double delay =
          endpoint.retry.backoff_base_seconds * std::pow(2.0, attempt - 2);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }

    httplib::Client client(host);
    client.set_connection_timeout(std::chrono::duration<double>(endpoint.timeout_seconds));
    client.set_read_timeout(std::chrono::duration<double>(endpoint.timeout_seconds));
    client.set_write_timeout(std::chrono::duration<double>(endpoint.timeout_seconds));

    auto res = client.Post(path, headers, body, "application/json");
    if (!res) {
      last_failure = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (retryable_status(res->status)) {
      last_failure = "status " + std::to_string(res->status);
      continue;
    }
    if (res->status < 200 || res->status >= 300) {
      throw ProtocolError(res->status, "backend returned status " + std::to_string(res->status) +
                                           ": " + res->body.substr(0, 200));
    }

    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw ProtocolError(res->status, std::string("unparseable response body: ") + e.what());
    }
    const auto choices = reply.find("choices");
    if (choices == reply.end() || !choices->is_array() || choices->empty()) {
      throw ProtocolError(res->status, "response has no choices");
    }
    const auto& first = (*choices)[0];
    if (!first.contains("message") || !first["message"].contains("content")) {
      throw ProtocolError(res->status, "response choice has no message content");
    }

    Completion out;
    out.text = first["message"]["content"].get<std::string>();
    out.attempts = attempt;
    out.latency_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
  }

  throw TransportError("gave up after " + std::to_string(endpoint.retry.max_attempts) +
                       " attempts; last: " + last_failure);
}

}  // namespace hybridrank
