#include "screening/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace screening {

void FeaturizerConfig::validate() const {
  if (max_seq_len < 1) throw ConfigError("max_seq_len must be >= 1");
  if (hash_dim < 2) throw ConfigError("hash_dim must be >= 2");
  if (ngram_orders.empty()) throw ConfigError("ngram_orders must not be empty");
  for (int n : ngram_orders) {
    if (n < 1) throw ConfigError("ngram orders must be >= 1");
  }
}

std::uint64_t FeaturizerConfig::fingerprint() const {
  std::ostringstream s;
  s << "max_seq_len=" << max_seq_len << ";use_pt_tag=" << use_pt_tag << ";orders=";
  for (int n : ngram_orders) s << n << ',';
  s << ";hash_dim=" << hash_dim << ";tf=" << (tf_scaling == TfScaling::Raw ? "raw" : "log1p");
  return fnv1a64(s.str());
}

double FeatureVector::l1_norm() const noexcept {
  double s = 0.0;
  for (double v : values) s += std::abs(v);
  return s;
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t state) noexcept {
  for (unsigned char b : bytes) {
    state ^= b;
    state *= 0x100000001b3ULL;
  }
  return state;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  for (unsigned char ch : text) {
    const bool word = (ch >= '0' && ch <= '9') || (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') || ch >= 0x80;
    if (word) {
      current += static_cast<char>((ch >= 'A' && ch <= 'Z') ? ch - 'A' + 'a' : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

std::vector<std::string> build_text_untruncated(const Article& article, const FeaturizerConfig& config) {
  std::vector<std::string> tokens;
  auto append = [&tokens](std::string_view text) {
    for (auto& t : tokenize(text)) tokens.push_back(std::move(t));
  };
  if (config.use_pt_tag) {
    for (const auto& tag : article.pt_tags) append(tag);
  }
  append(article.title);
  append(article.abstract);
  return tokens;
}

std::vector<std::string> build_text(const Article& article, const FeaturizerConfig& config) {
  auto tokens = build_text_untruncated(article, config);
  if (tokens.size() > config.max_seq_len) tokens.resize(config.max_seq_len);
  return tokens;
}

FeatureVector featurize(std::span<const std::string> tokens, const FeaturizerConfig& config) {
  std::vector<std::uint32_t> hits;
  for (int order : config.ngram_orders) {
    const auto n = static_cast<std::size_t>(order);
    if (tokens.size() < n) continue;
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      // Orders hash apart because the separator count differs.
      std::uint64_t h = fnv1a64(tokens[start]);
      for (std::size_t k = 1; k < n; ++k) {
        h = fnv1a64("\x1f", h);
        h = fnv1a64(tokens[start + k], h);
      }
      hits.push_back(static_cast<std::uint32_t>(h % config.hash_dim));
    }
  }
  std::sort(hits.begin(), hits.end());

  FeatureVector fv;
  fv.dim = config.hash_dim;
  for (std::size_t i = 0; i < hits.size();) {
    std::size_t j = i;
    while (j < hits.size() && hits[j] == hits[i]) ++j;
    const auto count = static_cast<double>(j - i);
    fv.indices.push_back(hits[i]);
    fv.values.push_back(config.tf_scaling == TfScaling::Raw ? count : std::log1p(count));
    i = j;
  }
  return fv;
}

Featurizer::Featurizer(FeaturizerConfig config) : config_(std::move(config)) { config_.validate(); }

FeatureVector Featurizer::operator()(const Article& article) const {
  const auto tokens = build_text(article, config_);
  return featurize(tokens, config_);
}

std::vector<FeatureVector> Featurizer::transform(const Corpus& corpus) const {
  std::vector<FeatureVector> out;
  out.reserve(corpus.size());
  for (const auto& a : corpus) out.push_back((*this)(a));
  return out;
}

std::size_t nearest_rank(std::span<const std::size_t> sorted, double percentile) {
  if (sorted.empty()) throw std::invalid_argument("nearest_rank of empty sample");
  if (!(percentile > 0.0 && percentile <= 100.0)) throw std::invalid_argument("percentile must lie in (0, 100]");
  auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(sorted.size())));
  rank = std::clamp<std::size_t>(rank, 1, sorted.size());
  return sorted[rank - 1];
}

LengthStats corpus_length_stats(const Corpus& corpus, const FeaturizerConfig& config,
                                std::span<const double> percentiles) {
  if (corpus.empty()) throw CorpusError("length statistics of an empty corpus");
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  for (const auto& a : corpus) lengths.push_back(build_text_untruncated(a, config).size());
  std::sort(lengths.begin(), lengths.end());

  LengthStats stats;
  stats.count = lengths.size();
  const auto total = std::accumulate(lengths.begin(), lengths.end(), std::size_t{0});
  stats.mean = static_cast<double>(total) / static_cast<double>(lengths.size());
  stats.min = lengths.front();
  stats.max = lengths.back();
  for (double p : percentiles) stats.percentiles[p] = nearest_rank(lengths, p);
  return stats;
}

}  // namespace screening
