#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "screening/corpus.hpp"

namespace screening {

enum class TfScaling : std::uint8_t { Raw, Log1p };

struct FeaturizerConfig {
  std::size_t max_seq_len = 256;
  bool use_pt_tag = false;
  std::vector<int> ngram_orders{1, 2};
  std::uint32_t hash_dim = 1U << 18;
  TfScaling tf_scaling = TfScaling::Log1p;

  /// Throws ConfigError if an invariant is violated.
  void validate() const;
  /// Stable 64-bit fingerprint of every field; stored with saved models.
  std::uint64_t fingerprint() const;

  bool operator==(const FeaturizerConfig&) const = default;
};

/// Sparse vector with strictly increasing indices below `dim`.
struct FeatureVector {
  std::uint32_t dim = 0;
  std::vector<std::uint32_t> indices;
  std::vector<double> values;

  std::size_t nnz() const noexcept { return indices.size(); }
  double l1_norm() const noexcept;
  bool operator==(const FeatureVector&) const = default;
};

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state = 0xcbf29ce484222325ULL) noexcept;

/// Lower-cased maximal runs of ASCII letters/digits; bytes >= 0x80 count as
/// word characters so UTF-8 words stay intact. Everything else separates.
std::vector<std::string> tokenize(std::string_view text);

/// [tags] + title + abstract tokens, truncated to the first max_seq_len.
std::vector<std::string> build_text(const Article& article, const FeaturizerConfig& config);
std::vector<std::string> build_text_untruncated(const Article& article, const FeaturizerConfig& config);

FeatureVector featurize(std::span<const std::string> tokens, const FeaturizerConfig& config);

/// Immutable convenience wrapper: article -> vector.
class Featurizer {
 public:
  explicit Featurizer(FeaturizerConfig config);

  const FeaturizerConfig& config() const noexcept { return config_; }
  FeatureVector operator()(const Article& article) const;
  std::vector<FeatureVector> transform(const Corpus& corpus) const;

 private:
  FeaturizerConfig config_;
};

struct LengthStats {
  std::size_t count = 0;
  double mean = 0.0;
  std::size_t min = 0;
  std::size_t max = 0;
  /// percentile (0-100] -> nearest-rank length
  std::map<double, std::size_t> percentiles;
};

/// Nearest-rank percentile of an ascending-sorted sample.
std::size_t nearest_rank(std::span<const std::size_t> sorted, double percentile);

/// Length statistics over build_text with truncation disabled. Throws
/// CorpusError on an empty corpus.
LengthStats corpus_length_stats(const Corpus& corpus, const FeaturizerConfig& config,
                                std::span<const double> percentiles = std::vector<double>{69.0, 92.0, 95.0});

}  // namespace screening
