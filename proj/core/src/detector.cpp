#include "crowdaudit/detector.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "crowdaudit/csv.hpp"
#include "crowdaudit/error.hpp"
#include "crowdaudit/random.hpp"
#include "crowdaudit/text.hpp"

namespace crowdaudit::detector {

std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed) {
  constexpr std::uint32_t c1 = 0xcc9e2d51;
  constexpr std::uint32_t c2 = 0x1b873593;
  auto rotl = [](std::uint32_t x, int r) { return (x << r) | (x >> (32 - r)); };
  const auto* bytes = reinterpret_cast<const unsigned char*>(data.data());
  const std::size_t len = data.size();
  const std::size_t nblocks = len / 4;
  std::uint32_t h = seed;
  for (std::size_t i = 0; i < nblocks; ++i) {
    std::uint32_t k = static_cast<std::uint32_t>(bytes[4 * i]) | (static_cast<std::uint32_t>(bytes[4 * i + 1]) << 8) |
                      (static_cast<std::uint32_t>(bytes[4 * i + 2]) << 16) |
                      (static_cast<std::uint32_t>(bytes[4 * i + 3]) << 24);
    k *= c1;
    k = rotl(k, 15);
    k *= c2;
    h ^= k;
    h = rotl(h, 13);
    h = h * 5 + 0xe6546b64;
  }
  const unsigned char* tail = bytes + 4 * nblocks;
  std::uint32_t k = 0;
  switch (len & 3) {
    case 3: k ^= static_cast<std::uint32_t>(tail[2]) << 16; [[fallthrough]];
    case 2: k ^= static_cast<std::uint32_t>(tail[1]) << 8; [[fallthrough]];
    case 1:
      k ^= tail[0];
      k *= c1;
      k = rotl(k, 15);
      k *= c2;
      h ^= k;
  }
  h ^= static_cast<std::uint32_t>(len);
  h ^= h >> 16;
  h *= 0x85ebca6b;
  h ^= h >> 13;
  h *= 0xc2b2ae35;
  h ^= h >> 16;
  return h;
}

double FeatureVector::norm() const {
  double sum = 0.0;
  for (const auto& [index, value] : entries) sum += value * value;
  return std::sqrt(sum);
}

FeatureVector featurize(std::string_view raw) {
  const std::string lowered = text::lower(text::nfc(raw));
  // Byte offset of every code point boundary, so n-grams are hashed in place.
  std::vector<std::size_t> starts;
  starts.reserve(lowered.size() + 1);
  for (std::size_t i = 0; i < lowered.size(); ++i) {
    if ((static_cast<unsigned char>(lowered[i]) & 0xC0) != 0x80) starts.push_back(i);
  }
  const std::size_t n_cps = starts.size();
  starts.push_back(lowered.size());

  std::vector<std::uint32_t> buckets;
  for (std::size_t n = kMinNgram; n <= kMaxNgram && n <= n_cps; ++n) {
    for (std::size_t i = 0; i + n <= n_cps; ++i) {
      buckets.push_back(ngram_bucket(std::string_view(lowered).substr(starts[i], starts[i + n] - starts[i])));
    }
  }
  std::sort(buckets.begin(), buckets.end());

  FeatureVector fv;
  for (std::size_t i = 0; i < buckets.size();) {
    std::size_t j = i;
    while (j < buckets.size() && buckets[j] == buckets[i]) ++j;
    fv.entries.emplace_back(buckets[i], static_cast<double>(j - i));
    i = j;
  }
  const double norm = fv.norm();
  if (norm > 0.0) {
    for (auto& entry : fv.entries) entry.second /= norm;
  }
  return fv;
}

double dot(std::span<const double> weights, const FeatureVector& features) {
  double sum = 0.0;
  for (const auto& [index, value] : features.entries) sum += weights[index] * value;
  return sum;
}

namespace {

double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double cross_entropy(double logit, double target) { return softplus(logit) - target * logit; }

double mean_cross_entropy(std::span<const double> weights, double bias, std::span<const Example> examples) {
  if (examples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : examples) sum += cross_entropy(dot(weights, ex.features) + bias, ex.target);
  return sum / static_cast<double>(examples.size());
}

double squared_norm(std::span<const double> weights) {
  double sum = 0.0;
  for (double w : weights) sum += w * w;
  return sum;
}

// Adds the data term of the gradient into `grad` (dense) and returns the summed loss.
double accumulate_data_gradient(std::span<const double> weights, double bias, std::span<const Example> batch,
                                std::span<double> grad, double& bias_grad) {
  const double scale = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& ex : batch) {
    const double z = dot(weights, ex.features) + bias;
    loss += cross_entropy(z, ex.target);
    const double dz = (sigmoid(z) - ex.target) * scale;
    for (const auto& [index, value] : ex.features.entries) grad[index] += dz * value;
    bias_grad += dz;
  }
  return loss * scale;
}

}  // namespace

LossAndGradient regularized_loss(std::span<const double> weights, double bias, std::span<const Example> batch,
                                 double l2) {
  LossAndGradient out;
  out.weight_gradient.assign(weights.size(), 0.0);
  if (batch.empty()) return out;
  out.loss = accumulate_data_gradient(weights, bias, batch, out.weight_gradient, out.bias_gradient);
  out.loss += 0.5 * l2 * squared_norm(weights);
  for (std::size_t i = 0; i < weights.size(); ++i) out.weight_gradient[i] += l2 * weights[i];
  return out;
}

BaselineModel train_baseline(const corpus::DatasetSplit& split, const std::vector<corpus::LabeledText>& items,
                             const Hyperparameters& hyper) {
  if (split.train.empty()) throw ValidationError("train_baseline: empty training set");
  if (split.validation.empty()) throw ValidationError("train_baseline: empty validation set");
  if (hyper.batch_size == 0 || hyper.epochs < 1 || !(hyper.learning_rate > 0.0) || hyper.l2 < 0.0) {
    throw ValidationError("train_baseline: invalid hyperparameters");
  }

  std::unordered_map<std::string, const corpus::LabeledText*> by_id;
  for (const auto& item : items) by_id.emplace(item.item_id, &item);
  auto examples_for = [&](const std::vector<std::string>& ids) {
    std::vector<Example> out;
    out.reserve(ids.size());
    std::vector<std::string> missing;
    for (const auto& id : ids) {
      auto it = by_id.find(id);
      if (it == by_id.end()) {
        missing.push_back(id);
        continue;
      }
      out.push_back({featurize(it->second->text), it->second->label == corpus::Label::synthetic ? 1.0 : 0.0});
    }
    if (!missing.empty()) {
      std::string msg = "train_baseline: split ids not found in corpus:";
      for (const auto& m : missing) msg += " " + m;
      throw ValidationError(msg);
    }
    return out;
  };
  const std::vector<Example> train = examples_for(split.train);
  const std::vector<Example> validation = examples_for(split.validation);

  const auto positives = std::count_if(train.begin(), train.end(), [](const Example& e) { return e.target > 0.5; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(train.size())) {
    throw ValidationError("train_baseline: training set contains a single class");
  }

  BaselineModel model;
  model.hyperparameters = hyper;
  std::vector<double> weights(kFeatureDim, 0.0);
  double bias = 0.0;
  std::vector<double> grad(kFeatureDim, 0.0);
  double best_validation = std::numeric_limits<double>::infinity();

  Rng rng(hyper.seed);
  std::vector<std::size_t> order(train.size());
  std::vector<Example> batch;
  batch.reserve(hyper.batch_size);
  for (int epoch = 1; epoch <= hyper.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(std::span(order), rng);
    for (std::size_t start = 0; start < order.size(); start += hyper.batch_size) {
      const std::size_t end = std::min(order.size(), start + hyper.batch_size);
      batch.clear();
      for (std::size_t k = start; k < end; ++k) batch.push_back(train[order[k]]);
      std::fill(grad.begin(), grad.end(), 0.0);
      double bias_grad = 0.0;
      accumulate_data_gradient(weights, bias, batch, grad, bias_grad);
      const double decay = 1.0 - hyper.learning_rate * hyper.l2;
      for (std::size_t i = 0; i < kFeatureDim; ++i) weights[i] = decay * weights[i] - hyper.learning_rate * grad[i];
      bias -= hyper.learning_rate * bias_grad;
    }
    EpochLoss loss;
    loss.epoch = epoch;
    loss.train_loss = mean_cross_entropy(weights, bias, train) + 0.5 * hyper.l2 * squared_norm(weights);
    loss.validation_loss = mean_cross_entropy(weights, bias, validation);
    model.training_report.push_back(loss);
    if (loss.validation_loss < best_validation) {
      best_validation = loss.validation_loss;
      model.weights = weights;
      model.bias = bias;
      model.best_epoch = epoch;
    }
  }
  return model;
}

double score(const BaselineModel& model, std::string_view text) { return dot(model.weights, featurize(text)) + model.bias; }

// ---- model file -------------------------------------------------------------

namespace {

constexpr std::string_view kModelMagic = "crowdaudit-baseline-model";
constexpr int kModelVersion = 1;

std::string hex(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::hex);
  if (ec != std::errc()) throw std::runtime_error("hex float formatting failed");
  return std::string(buf, ptr);
}

double parse_hex(const std::string& token, const std::string& source, std::size_t line) {
  double v = 0.0;
  std::string_view s = token;
  bool negative = false;
  if (!s.empty() && s.front() == '-') {
    negative = true;
    s.remove_prefix(1);
  }
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v, std::chars_format::hex);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(source, line, "", "bad number '" + token + "'");
  }
  return negative ? -v : v;
}

}  // namespace

void write_model(std::ostream& out, const BaselineModel& model) {
  const auto& h = model.hyperparameters;
  out << kModelMagic << ' ' << kModelVersion << '\n';
  out << "feature_bits " << kFeatureBits << '\n';
  out << "hash_seed " << kHashSeed << '\n';
  out << "ngram_range " << kMinNgram << ' ' << kMaxNgram << '\n';
  out << "learning_rate " << hex(h.learning_rate) << '\n';
  out << "batch_size " << h.batch_size << '\n';
  out << "epochs " << h.epochs << '\n';
  out << "l2 " << hex(h.l2) << '\n';
  out << "seed " << h.seed << '\n';
  out << "best_epoch " << model.best_epoch << '\n';
  out << "bias " << hex(model.bias) << '\n';
  for (const auto& e : model.training_report) {
    out << "epoch " << e.epoch << ' ' << hex(e.train_loss) << ' ' << hex(e.validation_loss) << '\n';
  }
  std::size_t nonzero = 0;
  for (double w : model.weights) nonzero += (w != 0.0);
  out << "weights " << nonzero << '\n';
  for (std::size_t i = 0; i < model.weights.size(); ++i) {
    if (model.weights[i] != 0.0) out << i << ' ' << hex(model.weights[i]) << '\n';
  }
}

BaselineModel read_model(std::istream& in, const std::string& source) {
  BaselineModel model;
  std::string line;
  std::size_t line_no = 0;
  auto next_line = [&]() -> std::istringstream {
    if (!std::getline(in, line)) throw ParseError(source, line_no + 1, "", "unexpected end of model file");
    ++line_no;
    return std::istringstream(line);
  };
  auto expect = [&](std::istringstream& ss, std::string_view key) {
    std::string word;
    ss >> word;
    if (word != key) throw ParseError(source, line_no, std::string(key), "expected '" + std::string(key) + "'");
  };

  {
    auto ss = next_line();
    std::string magic;
    int version = 0;
    ss >> magic >> version;
    if (magic != kModelMagic) throw ParseError(source, line_no, "", "not a crowdaudit baseline model");
    if (version != kModelVersion) {
      throw ParseError(source, line_no, "version", "unsupported model version " + std::to_string(version));
    }
  }
  {
    auto ss = next_line();
    expect(ss, "feature_bits");
    unsigned bits = 0;
    ss >> bits;
    if (bits != kFeatureBits) throw ParseError(source, line_no, "feature_bits", "feature width mismatch");
  }
  {
    auto ss = next_line();
    expect(ss, "hash_seed");
    std::uint32_t seed = 0;
    ss >> seed;
    if (seed != kHashSeed) throw ParseError(source, line_no, "hash_seed", "hash seed mismatch");
  }
  {
    auto ss = next_line();
    expect(ss, "ngram_range");
    std::size_t lo = 0, hi = 0;
    ss >> lo >> hi;
    if (lo != kMinNgram || hi != kMaxNgram) throw ParseError(source, line_no, "ngram_range", "n-gram range mismatch");
  }
  auto hex_field = [&](std::string_view key) {
    auto ss = next_line();
    expect(ss, key);
    std::string token;
    ss >> token;
    return parse_hex(token, source, line_no);
  };
  auto int_field = [&](std::string_view key) {
    auto ss = next_line();
    expect(ss, key);
    long long v = 0;
    if (!(ss >> v)) throw ParseError(source, line_no, std::string(key), "expected an integer");
    return v;
  };
  auto& h = model.hyperparameters;
  h.learning_rate = hex_field("learning_rate");
  h.batch_size = static_cast<std::size_t>(int_field("batch_size"));
  h.epochs = static_cast<int>(int_field("epochs"));
  h.l2 = hex_field("l2");
  {
    auto ss = next_line();
    expect(ss, "seed");
    if (!(ss >> h.seed)) throw ParseError(source, line_no, "seed", "expected an integer");
  }
  model.best_epoch = static_cast<int>(int_field("best_epoch"));
  model.bias = hex_field("bias");
  for (;;) {
    auto ss = next_line();
    std::string key;
    ss >> key;
    if (key == "epoch") {
      EpochLoss e;
      std::string a, b;
      ss >> e.epoch >> a >> b;
      e.train_loss = parse_hex(a, source, line_no);
      e.validation_loss = parse_hex(b, source, line_no);
      model.training_report.push_back(e);
      continue;
    }
    if (key != "weights") throw ParseError(source, line_no, key, "unexpected key");
    std::size_t count = 0;
    ss >> count;
    for (std::size_t k = 0; k < count; ++k) {
      auto ws = next_line();
      std::size_t index = 0;
      std::string token;
      if (!(ws >> index >> token) || index >= kFeatureDim) {
        throw ParseError(source, line_no, "weights", "bad weight entry");
      }
      model.weights[index] = parse_hex(token, source, line_no);
    }
    break;
  }
  return model;
}

void save_model(const std::filesystem::path& file, const BaselineModel& model) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file " + file.string());
  write_model(out, model);
  if (!out) throw IoError("write error on " + file.string());
}

BaselineModel load_model(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + file.string());
  return read_model(in, file.string());
}

// ---- score file -------------------------------------------------------------

void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records) {
  out << kScoreHeader << '\n';
  for (const auto& r : records) {
    if (!std::isfinite(r.logit)) throw ValidationError("non-finite logit for response " + r.response_id);
    out << csv::join({r.response_id, csv::format_double(r.logit), r.scorer_name}) << '\n';
  }
}

void write_scores(const std::filesystem::path& file, const std::vector<ScoreRecord>& records) {
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write score file " + file.string());
  write_scores(out, records);
  if (!out) throw IoError("write error on " + file.string());
}

std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& source) {
  std::vector<ScoreRecord> out;
  std::unordered_set<std::string> ids;
  std::vector<std::string> fields;
  std::size_t line_no = 0;
  std::size_t consumed = 0;
  bool header_seen = false;
  while (true) {
    const std::size_t record_line = line_no + 1;
    try {
      if (!csv::read_record(in, fields, consumed)) break;
    } catch (const ValidationError& e) {
      throw ParseError(source, record_line, "", e.what());
    }
    line_no += consumed;
    if (fields.size() == 1 && fields[0].empty()) continue;
    if (!header_seen) {
      if (csv::join(fields) != kScoreHeader) {
        throw ParseError(source, record_line, "", "expected header '" + std::string(kScoreHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(source, record_line, "", "expected 3 columns, found " + std::to_string(fields.size()));
    }
    ScoreRecord r{fields[0], 0.0, fields[2]};
    if (r.response_id.empty()) throw ParseError(source, record_line, "response_id", "must be non-empty");
    const std::string& token = fields[1];
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), r.logit);
    if (ec != std::errc() || ptr != token.data() + token.size()) {
      throw ParseError(source, record_line, "logit", "not a number: '" + token + "'");
    }
    if (!std::isfinite(r.logit)) throw ParseError(source, record_line, "logit", "logit must be finite");
    if (!ids.insert(r.response_id).second) {
      throw ParseError(source, record_line, "response_id", "duplicate response_id '" + r.response_id + "'");
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(source, 1, "", "empty score file (missing header)");
  return out;
}

std::vector<ScoreRecord> load_scores(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError("cannot open score file " + file.string());
  return read_scores(in, file.string());
}

}  // namespace crowdaudit::detector
