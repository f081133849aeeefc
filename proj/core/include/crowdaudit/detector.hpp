#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crowdaudit/corpus.hpp"

namespace crowdaudit::detector {

inline constexpr unsigned kFeatureBits = 18;
inline constexpr std::size_t kFeatureDim = std::size_t{1} << kFeatureBits;
inline constexpr std::uint32_t kHashSeed = 0x2F0B1C3Du;
inline constexpr std::size_t kMinNgram = 3;
inline constexpr std::size_t kMaxNgram = 5;

// MurmurHash3 x86 32-bit.
std::uint32_t murmur3_32(std::string_view data, std::uint32_t seed);

// Bucket of one n-gram given as (already lowercased) UTF-8.
inline std::uint32_t ngram_bucket(std::string_view ngram) {
  return murmur3_32(ngram, kHashSeed) & static_cast<std::uint32_t>(kFeatureDim - 1);
}

// Sparse, sorted by index, L2-normalized (or empty).
struct FeatureVector {
  std::vector<std::pair<std::uint32_t, double>> entries;

  double norm() const;
  bool operator==(const FeatureVector&) const = default;
};

// Lowercased NFC character 3/4/5-grams, hashed, term-frequency weighted, L2-normalized.
FeatureVector featurize(std::string_view text);

struct Hyperparameters {
  double learning_rate = 0.1;
  std::size_t batch_size = 32;
  int epochs = 20;
  double l2 = 1e-4;
  std::uint64_t seed = 0;

  bool operator==(const Hyperparameters&) const = default;
};

struct EpochLoss {
  int epoch = 0;
  double train_loss = 0.0;       // regularized objective on the full training set
  double validation_loss = 0.0;  // mean cross-entropy

  bool operator==(const EpochLoss&) const = default;
};

struct BaselineModel {
  std::vector<double> weights = std::vector<double>(kFeatureDim, 0.0);
  double bias = 0.0;
  Hyperparameters hyperparameters;
  std::vector<EpochLoss> training_report;
  int best_epoch = 0;

  bool operator==(const BaselineModel&) const = default;
};

struct Example {
  FeatureVector features;
  double target = 0.0;  // 1 = synthetic
};

struct LossAndGradient {
  double loss = 0.0;
  std::vector<double> weight_gradient;
  double bias_gradient = 0.0;
};

/// Mean binary cross-entropy of the logistic model over `batch` plus
/// (l2 / 2) * ||w||^2 (bias unregularized), with its exact gradient.
LossAndGradient regularized_loss(std::span<const double> weights, double bias, std::span<const Example> batch,
                                 double l2);

double dot(std::span<const double> weights, const FeatureVector& features);

/// Seeded mini-batch gradient descent on the training ids of `split`, keeping
/// the epoch snapshot with the lowest validation loss.
///
/// Throws ValidationError when train or validation is empty, when the
/// training set holds a single class, or when a split id is not in `items`.
BaselineModel train_baseline(const corpus::DatasetSplit& split, const std::vector<corpus::LabeledText>& items,
                             const Hyperparameters& hyperparameters = {});

double score(const BaselineModel& model, std::string_view text);

inline corpus::Label classify(double logit, double threshold) {
  return logit > threshold ? corpus::Label::synthetic : corpus::Label::human;
}

void save_model(const std::filesystem::path& file, const BaselineModel& model);
BaselineModel load_model(const std::filesystem::path& file);
void write_model(std::ostream& out, const BaselineModel& model);
BaselineModel read_model(std::istream& in, const std::string& source = "<model>");

struct ScoreRecord {
  std::string response_id;
  double logit = 0.0;
  std::string scorer_name;

  bool operator==(const ScoreRecord&) const = default;
};

inline constexpr std::string_view kScoreHeader = "response_id,logit,scorer_name";
inline constexpr std::string_view kBaselineScorerName = "ngram-logreg-v1";

// CSV with header `response_id,logit,scorer_name`. Non-finite logits are rejected.
void write_scores(std::ostream& out, const std::vector<ScoreRecord>& records);
void write_scores(const std::filesystem::path& file, const std::vector<ScoreRecord>& records);
std::vector<ScoreRecord> read_scores(std::istream& in, const std::string& source = "<scores>");
std::vector<ScoreRecord> load_scores(const std::filesystem::path& file);

}  // namespace crowdaudit::detector
