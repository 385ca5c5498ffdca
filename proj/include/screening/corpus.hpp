#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "screening/error.hpp"

namespace screening {

enum class Criterion : std::uint8_t { Format = 0, Hhc = 1, Purpose = 2, Rigor = 3 };

inline constexpr std::array<Criterion, 4> kCriteria{Criterion::Format, Criterion::Hhc,
                                                    Criterion::Purpose, Criterion::Rigor};

enum class Format : std::uint8_t { Original, Review, CaseReport, GeneralMisc, Blank, Unrated };
enum class TriState : std::uint8_t { True, False, Unrated };
enum class Purpose : std::uint8_t {
  Treatment,
  Diagnosis,
  Prognosis,
  Etiology,
  CostsEconomics,
  Prediction,
  Qualitative,
  Other,
  Unrated
};

struct CriterionRatings {
  Format format = Format::Unrated;
  TriState hhc = TriState::Unrated;
  Purpose purpose = Purpose::Unrated;
  TriState rigor = TriState::Unrated;

  bool operator==(const CriterionRatings&) const = default;

  /// Ordinal of the rating for `c` (the enum's underlying value).
  int code(Criterion c) const noexcept;
  void set_code(Criterion c, int value);
  bool is_rated(Criterion c) const noexcept { return code(c) != unrated_code(c); }

  static int unrated_code(Criterion c) noexcept;
};

// Value names and parsing. Spellings are the lower-case snake_case forms used
// in the corpus file format, e.g. "original", "case_report", "costs_economics".
std::string_view criterion_name(Criterion c) noexcept;
std::optional<Criterion> parse_criterion(std::string_view name) noexcept;
int value_count(Criterion c) noexcept;
std::string_view value_name(Criterion c, int code);
std::optional<int> parse_value(Criterion c, std::string_view name) noexcept;

/// Set of admissible rating values for a single criterion.
class RatingSet {
 public:
  RatingSet() = default;
  RatingSet(Criterion c, std::initializer_list<int> codes);

  static RatingSet all(Criterion c);

  bool contains(int code) const noexcept { return (bits_ >> code) & 1U; }
  void insert(int code) noexcept { bits_ |= (1U << code); }
  bool empty() const noexcept { return bits_ == 0; }
  std::uint32_t bits() const noexcept { return bits_; }

  bool operator==(const RatingSet&) const = default;

 private:
  std::uint32_t bits_ = 0;
};

/// One accept-set per criterion; the article matches iff every rating is in
/// its set. Unrated only matches where it was inserted explicitly.
struct AcceptSets {
  std::array<RatingSet, 4> sets;

  const RatingSet& operator[](Criterion c) const noexcept { return sets[static_cast<int>(c)]; }
  RatingSet& operator[](Criterion c) noexcept { return sets[static_cast<int>(c)]; }

  bool matches(const CriterionRatings& r) const noexcept;
  /// Throws ConfigError if any set is empty.
  void validate(std::string_view what) const;

  static AcceptSets everything();

  bool operator==(const AcceptSets&) const = default;
};

struct PositiveClassSpec {
  AcceptSets accept;

  /// Format = Original, HHC = True, Purpose = Treatment, Rigor = True.
  static PositiveClassSpec scientifically_sound_treatment();
};

struct SubsetConstraint {
  AcceptSets accept;

  /// Format in {Original, Review, Blank}, HHC and Rigor rated, Purpose any.
  static SubsetConstraint del_fiol();
  static SubsetConstraint everything() { return {AcceptSets::everything()}; }
};

/// Stop-early annotation rule: a stop value at criterion k means every later
/// criterion must be Unrated. With `unrated_stops`, an Unrated criterion
/// likewise forces every later criterion to be Unrated.
struct StopRule {
  std::array<RatingSet, 3> stop_values;  // Format, HHC, Purpose
  bool unrated_stops = true;

  /// Format = GeneralMisc stops; unrated propagates.
  static StopRule clinical_hedges();
  /// Accepts any combination.
  static StopRule none();

  /// Reason the ratings violate the rule, or nullopt if they comply.
  std::optional<std::string> violation(const CriterionRatings& r) const;
};

struct Article {
  std::string id;
  std::string title;
  std::string abstract;
  std::vector<std::string> pt_tags;
  CriterionRatings ratings;

  bool operator==(const Article&) const = default;
};

class Corpus {
 public:
  Corpus() = default;
  /// Throws CorpusError on duplicate or empty ids, or empty titles.
  Corpus(std::vector<Article> articles, std::string provenance);

  const std::vector<Article>& articles() const noexcept { return articles_; }
  const std::string& provenance() const noexcept { return provenance_; }
  std::size_t size() const noexcept { return articles_.size(); }
  bool empty() const noexcept { return articles_.empty(); }
  const Article& operator[](std::size_t i) const { return articles_[i]; }

  auto begin() const noexcept { return articles_.begin(); }
  auto end() const noexcept { return articles_.end(); }

 private:
  std::vector<Article> articles_;
  std::string provenance_;
};

bool derive_label(const Article& article, const PositiveClassSpec& spec) noexcept;
std::vector<bool> derive_labels(const Corpus& corpus, const PositiveClassSpec& spec);

Corpus filter_subset(const Corpus& corpus, const SubsetConstraint& constraint);

// Line-delimited JSON I/O.
Article parse_article_line(std::string_view line, const StopRule& stop_rule);
std::string format_article_line(const Article& article);
Corpus load_corpus(const std::filesystem::path& path, const StopRule& stop_rule);
Corpus read_corpus(std::istream& in, const StopRule& stop_rule, std::string provenance);
void write_corpus(std::ostream& out, const Corpus& corpus);
void save_corpus(const std::filesystem::path& path, const Corpus& corpus);

struct SyntheticConfig {
  std::size_t size = 1000;
  /// Negatives per positive; positives = round(size / (1 + ratio)).
  double negatives_per_positive = 32.0;
  /// Probability that an indicative token carries the true rating, per
  /// criterion (Format, HHC, Purpose, Rigor). 1.0 is noiseless.
  std::array<double, 4> signal_strength{1.0, 1.0, 1.0, 1.0};
  std::uint64_t seed = 7;
  /// Indicative tokens emitted per rated criterion.
  int cue_tokens = 3;
  int abstract_min_tokens = 60;
  int abstract_max_tokens = 300;
  /// Cue tokens land within this many leading abstract tokens.
  int cue_window = 100;
  /// Chance an eligible article receives a publication-type tag.
  double pt_tag_rate = 0.05;
  PositiveClassSpec positive = PositiveClassSpec::scientifically_sound_treatment();
  StopRule stop_rule = StopRule::clinical_hedges();
};

/// Deterministic per seed. Throws ConfigError on infeasible configurations.
Corpus generate_synthetic(const SyntheticConfig& config);

/// Vocabulary the generator uses for the cue tokens of a rating value.
/// Rigor cues depend on the purpose value as well.
const std::vector<std::string>& synthetic_cue_vocabulary(Criterion c, int code, int purpose_code = 0);

}  // namespace screening
