#include "crowdaudit/synthgen.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "crowdaudit/csv.hpp"
#include "crowdaudit/text.hpp"
#include "json.hpp"

namespace crowdaudit::synthgen {

using nlohmann::json;

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int size = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &size, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * size);
  for (unsigned int i = 0; i < size; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

std::string key_string(const CacheKey& key) {
  return key.model_name + '\n' + csv::format_double(key.temperature) + '\n' + std::to_string(key.sequence_index) +
         '\n' + sha256_hex(key.prompt);
}

}  // namespace

ResponseCache::ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

std::filesystem::path ResponseCache::path_for(const CacheKey& key) const {
  return dir_ / (sha256_hex(key_string(key)) + ".json");
}

std::mutex& ResponseCache::lock_for(const std::string& digest) {
  return locks_[std::hash<std::string>{}(digest) % locks_.size()];
}

std::optional<std::string> ResponseCache::get(const CacheKey& key) const {
  const auto path = path_for(key);
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    const json entry = json::parse(buf.str());
    return entry.at("completion").get<std::string>();
  } catch (const json::exception& e) {
    throw IoError("corrupt cache entry " + path.string() + ": " + e.what());
  }
}

void ResponseCache::put(const CacheKey& key, const std::string& completion) {
  const auto path = path_for(key);
  std::lock_guard lock(lock_for(path.filename().string()));
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw IoError("cannot create cache directory " + dir_.string() + ": " + ec.message());
  const json entry = {{"model_name", key.model_name},
                      {"temperature", key.temperature},
                      {"sequence_index", key.sequence_index},
                      {"prompt_sha256", sha256_hex(key.prompt)},
                      {"completion", completion}};
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write cache entry " + tmp.string());
    out << entry.dump(2) << '\n';
    if (!out) throw IoError("write error on " + tmp.string());
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError("cannot finalize cache entry " + path.string() + ": " + ec.message());
}

std::string build_prompt(const corpus::Abstract& abstract) {
  if (abstract.instruction.empty()) return abstract.text;
  return abstract.instruction + "\n\n" + abstract.text;
}

std::vector<GenerationJob> make_jobs(const std::vector<corpus::Abstract>& abstracts,
                                     const std::vector<double>& temperatures, int n, const std::string& model_name) {
  std::vector<GenerationJob> jobs;
  jobs.reserve(abstracts.size() * temperatures.size());
  for (const auto& a : abstracts) {
    for (double t : temperatures) jobs.push_back({a.abstract_id, build_prompt(a), t, n, model_name});
  }
  return jobs;
}

std::string synthetic_item_id(const std::string& abstract_id, double temperature, std::size_t index) {
  std::string idx = std::to_string(index);
  if (idx.size() < 2) idx.insert(0, 2 - idx.size(), '0');
  return "syn-" + abstract_id + "-t" + csv::format_double(temperature) + "-" + idx;
}

namespace {

void validate(const GenerationJob& job) {
  if (job.n < 1) throw ValidationError("generation job for " + job.abstract_id + ": n must be >= 1");
  if (!(job.temperature >= 0.0 && job.temperature <= 2.0)) {
    throw ValidationError("generation job for " + job.abstract_id + ": temperature must lie in [0, 2]");
  }
  if (job.prompt.empty()) throw ValidationError("generation job for " + job.abstract_id + ": empty prompt");
}

struct Counters {
  std::atomic<std::size_t> hits{0};
  std::atomic<std::size_t> calls{0};
};

corpus::LabeledText produce_one(const GenerationJob& job, std::size_t index, ChatClient& client, ResponseCache& cache,
                                const GenerationOptions& options, RateLimiter& limiter, Counters& counters) {
  const CacheKey key{job.model_name, job.prompt, job.temperature, index};
  std::optional<std::string> completion = cache.get(key);
  if (completion) {
    ++counters.hits;
  } else {
    if (options.cache_only) {
      throw CacheMissError("cache miss for " + synthetic_item_id(job.abstract_id, job.temperature, index) + " (" +
                           cache.path_for(key).string() + ") in cache-only mode");
    }
    limiter.acquire();
    ++counters.calls;
    completion = complete_with_retry(client, {job.model_name, job.prompt, job.temperature}, options.retry);
    if (text::trim(*completion).empty()) {
      throw ValidationError("empty completion for " + synthetic_item_id(job.abstract_id, job.temperature, index));
    }
    cache.put(key, *completion);
  }
  if (text::trim(*completion).empty()) {
    throw ValidationError("empty cached completion at " + cache.path_for(key).string());
  }
  corpus::LabeledText item;
  item.item_id = synthetic_item_id(job.abstract_id, job.temperature, index);
  item.text = text::nfc(*completion);
  item.label = corpus::Label::synthetic;
  item.source_abstract_id = job.abstract_id;
  item.temperature = job.temperature;
  return item;
}

void report(GenerationStats* stats, const Counters& counters) {
  if (!stats) return;
  stats->cache_hits += counters.hits.load();
  stats->network_calls += counters.calls.load();
}

}  // namespace

std::vector<corpus::LabeledText> generate(const GenerationJob& job, ChatClient& client, ResponseCache& cache,
                                          const GenerationOptions& options, GenerationStats* stats) {
  return generate_all({job}, client, cache, options, stats);
}

std::vector<corpus::LabeledText> generate_all(const std::vector<GenerationJob>& jobs, ChatClient& client,
                                              ResponseCache& cache, const GenerationOptions& options,
                                              GenerationStats* stats) {
  for (const auto& job : jobs) validate(job);

  std::vector<const GenerationJob*> ordered;
  ordered.reserve(jobs.size());
  for (const auto& job : jobs) ordered.push_back(&job);
  std::stable_sort(ordered.begin(), ordered.end(), [](const GenerationJob* a, const GenerationJob* b) {
    if (a->abstract_id != b->abstract_id) return a->abstract_id < b->abstract_id;
    return a->temperature < b->temperature;
  });

  struct Task {
    const GenerationJob* job;
    std::size_t index;
  };
  std::vector<Task> tasks;
  for (const auto* job : ordered) {
    for (int i = 0; i < job->n; ++i) tasks.push_back({job, static_cast<std::size_t>(i)});
  }

  std::vector<std::optional<corpus::LabeledText>> results(tasks.size());
  RateLimiter limiter(options.rate_per_second);
  Counters counters;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size() && !failed.load(); t = next++) {
      try {
        results[t] = produce_one(*tasks[t].job, tasks[t].index, client, cache, options, limiter, counters);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    }
  };

  const auto threads = static_cast<std::size_t>(std::max(1, options.parallelism));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < std::min(threads, tasks.size()); ++i) pool.emplace_back(worker);
  }
  report(stats, counters);
  if (first_error) std::rethrow_exception(first_error);

  std::vector<corpus::LabeledText> out;
  out.reserve(results.size());
  for (auto& r : results) out.push_back(std::move(*r));
  return out;
}

std::vector<corpus::LabeledText> build_training_corpus(const std::vector<corpus::Abstract>& abstracts,
                                                       const std::vector<corpus::LabeledText>& human_summaries,
                                                       const std::vector<corpus::LabeledText>& synthetic_items) {
  std::vector<corpus::LabeledText> out;
  out.reserve(abstracts.size() + human_summaries.size() + synthetic_items.size());
  for (const auto& a : abstracts) {
    out.push_back({a.abstract_id, a.text, corpus::Label::human, a.abstract_id, std::nullopt});
  }
  for (auto item : human_summaries) {
    item.label = corpus::Label::human;
    item.temperature.reset();
    out.push_back(std::move(item));
  }
  for (const auto& item : synthetic_items) {
    if (item.label != corpus::Label::synthetic || !item.temperature) {
      throw ValidationError("synthetic item " + item.item_id + " lacks a synthetic label or temperature");
    }
    out.push_back(item);
  }
  std::unordered_set<std::string> seen;
  std::vector<std::string> collisions;
  for (const auto& item : out) {
    if (!seen.insert(item.item_id).second) collisions.push_back(item.item_id);
  }
  if (!collisions.empty()) {
    std::string msg = "item_id collisions in training corpus:";
    for (const auto& id : collisions) msg += " " + id;
    throw ValidationError(msg);
  }
  return out;
}

}  // namespace crowdaudit::synthgen
