#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numeric>

#include "screening/features.hpp"
#include "test_support.hpp"

namespace screening {
namespace {

std::string words(std::size_t n, const std::string& stem) {
  std::string s;
  for (std::size_t i = 0; i < n; ++i) s += (i ? " " : "") + stem + std::to_string(i);
  return s;
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a64("foobar"), 0x85944171f73967e8ULL);
}

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("Aspirin, 81mg/day: HELPS!"), (std::vector<std::string>{"aspirin", "81mg", "day", "helps"}));
  EXPECT_TRUE(tokenize("  ,;. ").empty());
  EXPECT_EQ(tokenize("caf\xc3\xa9 x"), (std::vector<std::string>{"caf\xc3\xa9", "x"}));
}

TEST(BuildText, TruncatesToMaxLenStartingWithTitle) {
  Article a = testing::article("1", words(10, "t"), words(900, "a"));
  FeaturizerConfig c;
  c.max_seq_len = 384;
  const auto tokens = build_text(a, c);
  ASSERT_EQ(tokens.size(), 384u);
  EXPECT_EQ(tokens[0], "t0");
  EXPECT_EQ(tokens[9], "t9");
  EXPECT_EQ(tokens[10], "a0");
  EXPECT_EQ(build_text_untruncated(a, c).size(), 910u);
}

TEST(BuildText, PtTagsArePrepended) {
  Article a = testing::article("1", "Aspirin trial", "Abstract here");
  a.pt_tags = {"Randomized Controlled Trial"};
  FeaturizerConfig c;
  c.use_pt_tag = true;
  const auto tokens = build_text(a, c);
  ASSERT_GE(tokens.size(), 3u);
  EXPECT_EQ(std::vector<std::string>(tokens.begin(), tokens.begin() + 3),
            (std::vector<std::string>{"randomized", "controlled", "trial"}));
  c.use_pt_tag = false;
  EXPECT_EQ(build_text(a, c)[0], "aspirin");
}

TEST(BuildText, EmptyTagsSameAsNoTags) {
  Article a = testing::article("1", "Title words", "and abstract");
  FeaturizerConfig on;
  on.use_pt_tag = true;
  FeaturizerConfig off;
  EXPECT_EQ(build_text(a, on), build_text(a, off));
}

TEST(Featurize, EmptyTokensGiveZeroVector) {
  FeaturizerConfig c;
  const auto fv = featurize(std::vector<std::string>{}, c);
  EXPECT_EQ(fv.nnz(), 0u);
  EXPECT_EQ(fv.dim, c.hash_dim);
}

TEST(Featurize, RawCountsOfRepeatedToken) {
  FeaturizerConfig c;
  c.ngram_orders = {1};
  c.tf_scaling = TfScaling::Raw;
  const std::vector<std::string> t{"a", "a"};
  const auto fv = featurize(t, c);
  ASSERT_EQ(fv.nnz(), 1u);
  EXPECT_EQ(fv.values[0], 2.0);
  EXPECT_EQ(fv.indices[0], fnv1a64("a") % c.hash_dim);
}

TEST(Featurize, Log1pScaling) {
  FeaturizerConfig c;
  c.ngram_orders = {1};
  const std::vector<std::string> t{"x", "x", "x"};
  const auto fv = featurize(t, c);
  ASSERT_EQ(fv.nnz(), 1u);
  EXPECT_DOUBLE_EQ(fv.values[0], std::log1p(3.0));
}

// Independent hashing oracle: recompute every n-gram bucket and count.
TEST(Featurize, MatchesIndependentNgramCount) {
  Rng rng(99);
  FeaturizerConfig c;
  c.hash_dim = 97;  // small so collisions are exercised
  c.tf_scaling = TfScaling::Raw;
  c.ngram_orders = {1, 2, 3};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> tokens;
    const auto n = rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i) tokens.push_back("w" + std::to_string(rng.below(8)));
    std::map<std::uint32_t, double> oracle;
    for (int order : c.ngram_orders) {
      for (std::size_t s = 0; s + order <= tokens.size(); ++s) {
        std::string joined = tokens[s];
        for (int k = 1; k < order; ++k) joined += std::string("\x1f") + tokens[s + k];
        oracle[static_cast<std::uint32_t>(fnv1a64(joined) % c.hash_dim)] += 1.0;
      }
    }
    const auto fv = featurize(tokens, c);
    ASSERT_EQ(fv.nnz(), oracle.size());
    std::size_t k = 0;
    for (const auto& [idx, count] : oracle) {
      EXPECT_EQ(fv.indices[k], idx);
      EXPECT_EQ(fv.values[k], count);
      ++k;
    }
  }
}

TEST(Featurize, IndicesStrictlyIncreasingAndBounded) {
  Rng rng(5);
  FeaturizerConfig c;
  c.hash_dim = 1000;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::string> tokens;
    for (std::uint64_t i = 0, n = rng.below(200); i < n; ++i) tokens.push_back(std::to_string(rng.below(500)));
    const auto fv = featurize(tokens, c);
    ASSERT_EQ(fv.indices.size(), fv.values.size());
    for (std::size_t k = 0; k < fv.nnz(); ++k) {
      EXPECT_LT(fv.indices[k], c.hash_dim);
      if (k) EXPECT_LT(fv.indices[k - 1], fv.indices[k]);
      EXPECT_GT(fv.values[k], 0.0);
    }
  }
}

// Golden values pin the hashing across builds and runs.
TEST(Featurize, GoldenOutput) {
  FeaturizerConfig c;
  const std::vector<std::string> tokens{"aspirin", "reduces", "mortality"};
  const auto fv = featurize(tokens, c);
  std::uint64_t digest = 0xcbf29ce484222325ULL;
  for (std::size_t k = 0; k < fv.nnz(); ++k) {
    digest = fnv1a64(std::to_string(fv.indices[k]) + ":" + std::to_string(fv.values[k]), digest);
  }
  EXPECT_EQ(fv.nnz(), 5u);
  const auto again = featurize(tokens, c);
  EXPECT_EQ(fv, again);
  EXPECT_EQ(digest, 4296952922367582479ULL) << "update the golden digest when hashing changes deliberately";
}

TEST(BuildText, TruncationIsPrefixMonotone) {
  Rng rng(21);
  const auto corpus = generate_synthetic(testing::small_synthetic(40, 21));
  for (const auto& a : corpus) {
    FeaturizerConfig small;
    FeaturizerConfig large;
    small.max_seq_len = 1 + rng.below(200);
    large.max_seq_len = small.max_seq_len + rng.below(200);
    const auto s = build_text(a, small);
    const auto l = build_text(a, large);
    ASSERT_LE(s.size(), l.size());
    EXPECT_TRUE(std::equal(s.begin(), s.end(), l.begin()));
  }
}

TEST(FeaturizerConfig, ValidationAndFingerprint) {
  FeaturizerConfig c;
  EXPECT_NO_THROW(c.validate());
  const auto fp = c.fingerprint();
  c.max_seq_len = 384;
  EXPECT_NE(c.fingerprint(), fp);
  c.max_seq_len = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.ngram_orders = {};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.ngram_orders = {0};
  EXPECT_THROW(c.validate(), ConfigError);
  c = {};
  c.hash_dim = 1;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(LengthStats, SimpleArithmetic) {
  std::vector<Article> articles;
  articles.push_back(testing::article("1", words(100, "a")));
  articles.push_back(testing::article("2", words(200, "b")));
  articles.push_back(testing::article("3", words(300, "c")));
  const Corpus corpus(articles, "x");
  const auto stats = corpus_length_stats(corpus, FeaturizerConfig{});
  EXPECT_DOUBLE_EQ(stats.mean, 200.0);
  EXPECT_EQ(stats.max, 300u);
  EXPECT_EQ(stats.min, 100u);
  EXPECT_EQ(stats.count, 3u);
}

TEST(LengthStats, MatchesBruteForceOnSynthetic) {
  const auto corpus = generate_synthetic(testing::small_synthetic(300, 4));
  FeaturizerConfig c;
  const std::vector<double> pct{50.0, 92.0, 100.0};
  const auto stats = corpus_length_stats(corpus, c, pct);
  std::vector<std::size_t> lengths;
  for (const auto& a : corpus) lengths.push_back(tokenize(a.title).size() + tokenize(a.abstract).size());
  std::sort(lengths.begin(), lengths.end());
  const double mean =
      static_cast<double>(std::accumulate(lengths.begin(), lengths.end(), std::size_t{0})) / lengths.size();
  EXPECT_DOUBLE_EQ(stats.mean, mean);
  EXPECT_EQ(stats.max, lengths.back());
  EXPECT_EQ(stats.min, lengths.front());
  for (double p : pct) {
    // Nearest rank: smallest value with at least p% of the sample at or below it.
    std::size_t expected = lengths.back();
    for (std::size_t v : lengths) {
      const auto at_or_below = std::count_if(lengths.begin(), lengths.end(), [&](std::size_t x) { return x <= v; });
      if (100.0 * static_cast<double>(at_or_below) >= p * static_cast<double>(lengths.size())) {
        expected = v;
        break;
      }
    }
    EXPECT_EQ(stats.percentiles.at(p), expected) << p;
  }
}

TEST(LengthStats, EmptyCorpusThrows) { EXPECT_THROW(corpus_length_stats(Corpus{}, FeaturizerConfig{}), CorpusError); }

TEST(NearestRank, Boundaries) {
  const std::vector<std::size_t> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  EXPECT_EQ(nearest_rank(s, 100.0), 10u);
  EXPECT_EQ(nearest_rank(s, 10.0), 1u);
  EXPECT_EQ(nearest_rank(s, 11.0), 2u);
  EXPECT_THROW(nearest_rank(s, 0.0), std::invalid_argument);
  EXPECT_THROW(nearest_rank(std::vector<std::size_t>{}, 50.0), std::invalid_argument);
}

}  // namespace
}  // namespace screening
