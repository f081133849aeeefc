#include <cmath>
#include <cstdlib>
#include <thread>

#include "crowdaudit/synthgen.hpp"
#include "httplib.h"
#include "json.hpp"

namespace crowdaudit::synthgen {

using nlohmann::json;

namespace {

void replace_all(std::string& s, std::string_view from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }

}  // namespace

HttpChatClient::HttpChatClient(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (!endpoint_.api_key_env.empty()) {
    if (const char* token = std::getenv(endpoint_.api_key_env.c_str())) token_ = token;
  }
}

std::string HttpChatClient::render_payload(const ChatRequest& request) const {
  std::string body = endpoint_.payload_template;
  replace_all(body, "{{model}}", json(request.model_name).dump());
  replace_all(body, "{{temperature}}", json(request.temperature).dump());
  replace_all(body, "{{prompt}}", json(request.prompt).dump());
  return body;
}

ChatReply HttpChatClient::send(const ChatRequest& request) {
  httplib::Client client(endpoint_.base_url);
  client.set_connection_timeout(std::chrono::seconds(10));
  client.set_read_timeout(endpoint_.timeout);
  client.set_write_timeout(endpoint_.timeout);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);

  auto result = client.Post(endpoint_.path, headers, render_payload(request), "application/json");
  if (!result) return {0, "", "transport error: " + httplib::to_string(result.error())};
  ChatReply reply{result->status, "", ""};
  if (result->status != 200) {
    reply.detail = result->body.substr(0, 512);
    return reply;
  }
  try {
    const json body = json::parse(result->body);
    const json& content = body.at(json::json_pointer(endpoint_.response_pointer));
    if (!content.is_string()) {
      reply.detail = "completion at " + endpoint_.response_pointer + " is not a string";
      reply.status = 502;
      return reply;
    }
    reply.content = content.get<std::string>();
  } catch (const json::exception& e) {
    reply.status = 502;
    reply.detail = std::string("unparseable completion body: ") + e.what();
  }
  return reply;
}

RateLimiter::RateLimiter(double rate_per_second, double burst)
    : rate_(rate_per_second), burst_(std::max(1.0, burst)), tokens_(burst_), last_(std::chrono::steady_clock::now()) {}

void RateLimiter::acquire() {
  if (!(rate_ > 0.0)) return;
  std::unique_lock lock(mutex_);
  for (;;) {
    const auto now = std::chrono::steady_clock::now();
    const double elapsed = std::chrono::duration<double>(now - last_).count();
    tokens_ = std::min(burst_, tokens_ + elapsed * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const double wait_s = (1.0 - tokens_) / rate_;
    // Sleeping under the lock keeps waiters in FIFO-ish order.
    std::this_thread::sleep_for(std::chrono::duration<double>(wait_s));
  }
}

std::string complete_with_retry(ChatClient& client, const ChatRequest& request, const RetryPolicy& policy) {
  const int attempts = std::max(1, policy.max_attempts);
  auto backoff = policy.initial_backoff;
  ChatReply last;
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    last = client.send(request);
    if (last.status == 200) return last.content;
    if (!retryable(last.status)) break;
    if (attempt < attempts) {
      std::this_thread::sleep_for(backoff);
      const auto next = std::chrono::milliseconds(
          static_cast<std::int64_t>(std::llround(static_cast<double>(backoff.count()) * policy.multiplier)));
      backoff = std::min(next, policy.max_backoff);
    }
  }
  throw TransportError(last.status, "chat completion failed (last status " + std::to_string(last.status) +
                                        (last.detail.empty() ? "" : ": " + last.detail) + ")");
}

}  // namespace crowdaudit::synthgen
