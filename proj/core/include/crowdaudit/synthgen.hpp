#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "crowdaudit/corpus.hpp"
#include "crowdaudit/error.hpp"

namespace crowdaudit::synthgen {

struct ChatRequest {
  std::string model_name;
  std::string prompt;
  double temperature = 1.0;
};

// status 0 means the request never produced an HTTP response.
struct ChatReply {
  int status = 0;
  std::string content;
  std::string detail;
};

// Any chat-completion backend. Implementations must be safe to call from
// several threads at once.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual ChatReply send(const ChatRequest& request) = 0;
};

struct HttpEndpoint {
  std::string base_url = "https://api.openai.com";
  std::string path = "/v1/chat/completions";
  // {{model}}, {{temperature}} and {{prompt}} are replaced by JSON literals.
  std::string payload_template =
      R"({"model": {{model}}, "temperature": {{temperature}}, "messages": [{"role": "user", "content": {{prompt}}}]})";
  // JSON pointer to the completion text inside the response body.
  std::string response_pointer = "/choices/0/message/content";
  // Name of the environment variable holding the bearer token. Empty: no auth header.
  std::string api_key_env = "CROWDAUDIT_API_KEY";
  std::chrono::seconds timeout{120};
};

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(HttpEndpoint endpoint);
  ChatReply send(const ChatRequest& request) override;

  // Exposed for tests: the request body for `request`.
  std::string render_payload(const ChatRequest& request) const;

 private:
  HttpEndpoint endpoint_;
  std::string token_;
};

// Thrown when every attempt failed; carries the last HTTP status (0 = transport).
class TransportError : public IoError {
 public:
  TransportError(int last_status, const std::string& what) : IoError(what), last_status_(last_status) {}
  int last_status() const noexcept { return last_status_; }

 private:
  int last_status_;
};

class CacheMissError : public IoError {
 public:
  using IoError::IoError;
};

struct CacheKey {
  std::string model_name;
  std::string prompt;
  double temperature = 1.0;
  std::size_t sequence_index = 0;
};

// SHA-256 hex of `data`.
std::string sha256_hex(std::string_view data);

/// On-disk response cache: one JSON file per (prompt hash, temperature,
/// sequence index, model name), named by the SHA-256 of that key. Writes go
/// through a temporary file and a rename.
class ResponseCache {
 public:
  explicit ResponseCache(std::filesystem::path dir);

  std::optional<std::string> get(const CacheKey& key) const;
  void put(const CacheKey& key, const std::string& completion);
  std::filesystem::path path_for(const CacheKey& key) const;
  const std::filesystem::path& dir() const noexcept { return dir_; }

 private:
  std::mutex& lock_for(const std::string& digest);

  std::filesystem::path dir_;
  std::array<std::mutex, 16> locks_;
};

// Token bucket. rate_per_second <= 0 disables limiting.
class RateLimiter {
 public:
  explicit RateLimiter(double rate_per_second, double burst = 1.0);
  void acquire();

 private:
  std::mutex mutex_;
  double rate_;
  double burst_;
  double tokens_;
  std::chrono::steady_clock::time_point last_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds initial_backoff{500};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{30'000};
};

// Sends with exponential backoff on transport errors, 429 and 5xx.
std::string complete_with_retry(ChatClient& client, const ChatRequest& request, const RetryPolicy& policy);

struct GenerationJob {
  std::string abstract_id;
  std::string prompt;
  double temperature = 1.0;
  int n = 1;
  std::string model_name;
};

struct GenerationOptions {
  RetryPolicy retry;
  double rate_per_second = 1.0;
  int parallelism = 1;
  // Never touch the network; a missing cache entry raises CacheMissError.
  bool cache_only = false;
};

struct GenerationStats {
  std::size_t cache_hits = 0;
  std::size_t network_calls = 0;
};

// Instruction, blank line, abstract text.
std::string build_prompt(const corpus::Abstract& abstract);

std::vector<GenerationJob> make_jobs(const std::vector<corpus::Abstract>& abstracts,
                                     const std::vector<double>& temperatures, int n, const std::string& model_name);

// "syn-<abstract>-t<temperature>-<index>"
std::string synthetic_item_id(const std::string& abstract_id, double temperature, std::size_t index);

/// Produces `job.n` synthetic items, serving each from the cache when present
/// and caching every fresh completion. Throws ValidationError for n < 1 or a
/// temperature outside [0, 2], TransportError when retries are exhausted and
/// ValidationError for an empty completion.
std::vector<corpus::LabeledText> generate(const GenerationJob& job, ChatClient& client, ResponseCache& cache,
                                          const GenerationOptions& options = {}, GenerationStats* stats = nullptr);

// Runs every (job, index) request with up to `options.parallelism` threads.
// Output is ordered by (abstract_id, temperature, index) whatever the completion order.
std::vector<corpus::LabeledText> generate_all(const std::vector<GenerationJob>& jobs, ChatClient& client,
                                              ResponseCache& cache, const GenerationOptions& options = {},
                                              GenerationStats* stats = nullptr);

/// Abstracts become human items (item_id = source_abstract_id = abstract_id),
/// human summaries are relabeled human, synthetic items are kept as they are.
/// Throws ValidationError listing any colliding item_ids.
std::vector<corpus::LabeledText> build_training_corpus(const std::vector<corpus::Abstract>& abstracts,
                                                       const std::vector<corpus::LabeledText>& human_summaries,
                                                       const std::vector<corpus::LabeledText>& synthetic_items);

}  // namespace crowdaudit::synthgen
