#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "screening/corpus.hpp"
#include "screening/features.hpp"
#include "test_support.hpp"

namespace screening {
namespace {

using testing::article;
using testing::ratings;

std::vector<CriterionRatings> all_combinations() {
  std::vector<CriterionRatings> out;
  for (int f = 0; f < value_count(Criterion::Format); ++f)
    for (int h = 0; h < value_count(Criterion::Hhc); ++h)
      for (int p = 0; p < value_count(Criterion::Purpose); ++p)
        for (int r = 0; r < value_count(Criterion::Rigor); ++r) {
          CriterionRatings c;
          c.set_code(Criterion::Format, f);
          c.set_code(Criterion::Hhc, h);
          c.set_code(Criterion::Purpose, p);
          c.set_code(Criterion::Rigor, r);
          out.push_back(c);
        }
  return out;
}

TEST(Labels, ExhaustiveOverAllRatingCombinations) {
  const auto spec = PositiveClassSpec::scientifically_sound_treatment();
  const auto combos = all_combinations();
  ASSERT_EQ(combos.size(), 486u);
  std::size_t positives = 0;
  for (const auto& c : combos) {
    const bool oracle = c.format == Format::Original && c.hhc == TriState::True && c.purpose == Purpose::Treatment &&
                        c.rigor == TriState::True;
    Article a = article("1", "t", "", c);
    EXPECT_EQ(derive_label(a, spec), oracle);
    positives += oracle;
  }
  EXPECT_EQ(positives, 1u);
}

TEST(Labels, OneFailingConjunctIsNegative) {
  const auto spec = PositiveClassSpec::scientifically_sound_treatment();
  EXPECT_TRUE(derive_label(article("1", "t", "", ratings(Format::Original, TriState::True, Purpose::Treatment, TriState::True)), spec));
  EXPECT_FALSE(derive_label(article("1", "t", "", ratings(Format::Original, TriState::True, Purpose::Treatment, TriState::False)), spec));
}

TEST(Labels, UnratedMatchesOnlyWhenInserted) {
  PositiveClassSpec spec = PositiveClassSpec::scientifically_sound_treatment();
  const auto r = ratings(Format::Original, TriState::True, Purpose::Treatment, TriState::Unrated);
  EXPECT_FALSE(spec.accept.matches(r));
  spec.accept[Criterion::Rigor].insert(CriterionRatings::unrated_code(Criterion::Rigor));
  EXPECT_TRUE(spec.accept.matches(r));
}

TEST(AcceptSets, EmptySetIsRejected) {
  AcceptSets a = AcceptSets::everything();
  a[Criterion::Purpose] = RatingSet();
  EXPECT_THROW(a.validate("positive class"), ConfigError);
}

TEST(ValueNames, RoundTripForEveryCode) {
  for (auto c : kCriteria) {
    EXPECT_EQ(parse_criterion(criterion_name(c)), c);
    for (int code = 0; code < value_count(c); ++code) EXPECT_EQ(parse_value(c, value_name(c, code)), code);
    EXPECT_FALSE(parse_value(c, "nonsense").has_value());
  }
  EXPECT_EQ(value_name(Criterion::Format, 2), "case_report");
  EXPECT_THROW(value_name(Criterion::Hhc, 7), std::out_of_range);
}

TEST(StopRule, GeneralMiscStopsLaterCriteria) {
  const auto rule = StopRule::clinical_hedges();
  EXPECT_FALSE(rule.violation(ratings(Format::GeneralMisc, TriState::Unrated, Purpose::Unrated, TriState::Unrated)));
  EXPECT_TRUE(rule.violation(ratings(Format::GeneralMisc, TriState::True, Purpose::Unrated, TriState::Unrated)));
  EXPECT_TRUE(rule.violation(ratings(Format::Original, TriState::Unrated, Purpose::Treatment, TriState::Unrated)));
  EXPECT_FALSE(rule.violation(ratings(Format::Review, TriState::False, Purpose::Other, TriState::False)));
}

TEST(StopRule, NoneAcceptsEverything) {
  const auto rule = StopRule::none();
  for (const auto& c : all_combinations()) EXPECT_FALSE(rule.violation(c).has_value());
}

TEST(StopRule, ViolationMatchesBruteForcePrefixRule) {
  const auto rule = StopRule::clinical_hedges();
  for (const auto& c : all_combinations()) {
    // Independent oracle: find the first stopping criterion, then require
    // every later one to be unrated.
    bool oracle_ok = true;
    bool stopped = false;
    for (int k = 0; k < 4; ++k) {
      const auto crit = kCriteria[k];
      if (stopped && c.is_rated(crit)) oracle_ok = false;
      if (k == 0 && c.format == Format::GeneralMisc) stopped = true;
      if (!c.is_rated(crit)) stopped = true;
    }
    EXPECT_EQ(!rule.violation(c).has_value(), oracle_ok);
  }
}

TEST(CorpusIo, ThreeLineFileKeepsOrder) {
  std::istringstream in(
      R"({"id":"3","title":"c","format":"original","hhc":"true","purpose":"treatment","rigor":"true"})"
      "\n"
      R"({"id":"1","title":"a","abstract":"x","format":"general_misc"})"
      "\n"
      R"({"id":"2","title":"b","pt_tags":["Review"],"format":"review","hhc":"false","purpose":"other","rigor":"false"})"
      "\n");
  const auto corpus = read_corpus(in, StopRule::clinical_hedges(), "mem");
  ASSERT_EQ(corpus.size(), 3u);
  EXPECT_EQ(corpus[0].id, "3");
  EXPECT_EQ(corpus[1].id, "1");
  EXPECT_EQ(corpus[2].id, "2");
  EXPECT_EQ(corpus[1].ratings.hhc, TriState::Unrated);
  EXPECT_EQ(corpus[2].pt_tags, std::vector<std::string>{"Review"});
}

TEST(CorpusIo, DuplicateIdNamesTheLine) {
  std::istringstream in("{\"id\":\"1\",\"title\":\"a\"}\n{\"id\":\"1\",\"title\":\"b\"}\n");
  try {
    read_corpus(in, StopRule::clinical_hedges(), "dup.jsonl");
    FAIL() << "expected CorpusError";
  } catch (const CorpusError& e) {
    EXPECT_NE(std::string(e.what()).find("dup.jsonl:2"), std::string::npos) << e.what();
  }
}

TEST(CorpusIo, RejectsInvalidRecords) {
  const auto rule = StopRule::clinical_hedges();
  EXPECT_THROW(parse_article_line("not json", rule), CorpusError);
  EXPECT_THROW(parse_article_line(R"({"id":"1"})", rule), CorpusError);
  EXPECT_THROW(parse_article_line(R"({"id":"","title":"a"})", rule), CorpusError);
  EXPECT_THROW(parse_article_line(R"({"id":"1","title":""})", rule), CorpusError);
  EXPECT_THROW(parse_article_line(R"({"id":"1","title":"a","format":"bogus"})", rule), CorpusError);
  EXPECT_THROW(parse_article_line(R"({"id":"1","title":"a","format":"general_misc","hhc":"true"})", rule),
               CorpusError);
  EXPECT_NO_THROW(parse_article_line(R"({"id":"1","title":"a","format":"general_misc","hhc":"true"})",
                                     StopRule::none()));
}

TEST(CorpusIo, FormatThenParseRoundTrips) {
  const auto corpus = generate_synthetic(testing::small_synthetic(60));
  std::ostringstream out;
  write_corpus(out, corpus);
  std::istringstream in(out.str());
  const auto back = read_corpus(in, StopRule::clinical_hedges(), "rt");
  EXPECT_EQ(back.articles(), corpus.articles());
}

TEST(CorpusIo, SaveAndLoad) {
  testing::TempDir dir("corpus");
  const auto corpus = generate_synthetic(testing::small_synthetic(30));
  save_corpus(dir / "c.jsonl", corpus);
  EXPECT_EQ(load_corpus(dir / "c.jsonl", StopRule::clinical_hedges()).articles(), corpus.articles());
  EXPECT_THROW(load_corpus(dir / "missing.jsonl", StopRule::clinical_hedges()), IoError);
}

TEST(Subset, EverythingIsIdentity) {
  const auto corpus = generate_synthetic(testing::small_synthetic(100));
  EXPECT_EQ(filter_subset(corpus, SubsetConstraint::everything()).articles(), corpus.articles());
}

TEST(Subset, ExcludingGeneralMiscMatchesScan) {
  const auto corpus = generate_synthetic(testing::small_synthetic(100));
  SubsetConstraint s = SubsetConstraint::everything();
  s.accept[Criterion::Format] = RatingSet(Criterion::Format, {0, 1, 2, 4, 5});
  const auto filtered = filter_subset(corpus, s);
  std::vector<Article> expected;
  for (const auto& a : corpus)
    if (a.ratings.format != Format::GeneralMisc) expected.push_back(a);
  EXPECT_EQ(filtered.articles(), expected);
}

TEST(Subset, DelFiolPredicate) {
  const auto s = SubsetConstraint::del_fiol();
  for (const auto& c : all_combinations()) {
    const bool oracle = (c.format == Format::Original || c.format == Format::Review || c.format == Format::Blank) &&
                        c.hhc != TriState::Unrated && c.rigor != TriState::Unrated;
    EXPECT_EQ(s.accept.matches(c), oracle);
  }
}

TEST(Synthetic, DeterministicPerSeed) {
  auto cfg = testing::small_synthetic(1000, 7, 32.0);
  std::ostringstream a;
  std::ostringstream b;
  write_corpus(a, generate_synthetic(cfg));
  write_corpus(b, generate_synthetic(cfg));
  EXPECT_EQ(a.str(), b.str());
  cfg.seed = 8;
  std::ostringstream c;
  write_corpus(c, generate_synthetic(cfg));
  EXPECT_NE(a.str(), c.str());
}

TEST(Synthetic, PositiveCountFollowsRatio) {
  const auto corpus = generate_synthetic(testing::small_synthetic(1650, 7, 32.0));
  const auto labels = derive_labels(corpus, PositiveClassSpec::scientifically_sound_treatment());
  EXPECT_EQ(std::count(labels.begin(), labels.end(), true), 50);
}

TEST(Synthetic, RecordsSatisfyInvariants) {
  const auto corpus = generate_synthetic(testing::small_synthetic(500, 3));
  const auto rule = StopRule::clinical_hedges();
  for (const auto& a : corpus) {
    EXPECT_FALSE(a.title.empty());
    EXPECT_FALSE(rule.violation(a.ratings).has_value()) << a.id;
  }
}

TEST(Synthetic, RejectsInfeasibleConfigs) {
  auto cfg = testing::small_synthetic(10);
  cfg.signal_strength[2] = 1.5;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = testing::small_synthetic(0);
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
  cfg = testing::small_synthetic(10);
  cfg.negatives_per_positive = 1e9;
  EXPECT_THROW(generate_synthetic(cfg), ConfigError);
}

// Predicts each rated criterion from cue-vocabulary membership alone.
TEST(Synthetic, NoiselessCuesGiveBagOfWordsOraclePerfectAccuracy) {
  const auto corpus = generate_synthetic(testing::small_synthetic(800, 11));
  FeaturizerConfig fc;
  fc.max_seq_len = 100000;
  std::size_t checked = 0;
  for (const auto& a : corpus) {
    const auto tokens = build_text(a, fc);
    const std::set<std::string> bag(tokens.begin(), tokens.end());
    for (auto c : kCriteria) {
      if (!a.ratings.is_rated(c)) continue;
      const int purpose = a.ratings.code(Criterion::Purpose);
      int predicted = -1;
      int best_hits = 0;
      for (int code = 0; code < CriterionRatings::unrated_code(c); ++code) {
        int hits = 0;
        for (const auto& w : synthetic_cue_vocabulary(c, code, purpose)) hits += bag.count(w);
        if (hits > best_hits) {
          best_hits = hits;
          predicted = code;
        }
      }
      EXPECT_EQ(predicted, a.ratings.code(c)) << a.id << " " << criterion_name(c);
      ++checked;
    }
  }
  EXPECT_GT(checked, 800u);
}

TEST(CorpusInvariants, RejectsDuplicateAndEmptyIds) {
  EXPECT_THROW(Corpus({article("1", "a"), article("1", "b")}, "x"), CorpusError);
  EXPECT_THROW(Corpus({article("", "a")}, "x"), CorpusError);
  EXPECT_THROW(Corpus({article("1", "")}, "x"), CorpusError);
}

}  // namespace
}  // namespace screening
