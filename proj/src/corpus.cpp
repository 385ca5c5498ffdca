#include "screening/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "screening/rng.hpp"

namespace screening {

namespace {

constexpr std::array<std::string_view, 6> kFormatNames{"original",     "review", "case_report",
                                                       "general_misc", "blank",  "unrated"};
constexpr std::array<std::string_view, 3> kTriNames{"true", "false", "unrated"};
constexpr std::array<std::string_view, 9> kPurposeNames{
    "treatment",  "diagnosis",   "prognosis", "etiology", "costs_economics",
    "prediction", "qualitative", "other",     "unrated"};
constexpr std::array<std::string_view, 4> kCriterionNames{"format", "hhc", "purpose", "rigor"};

std::span<const std::string_view> names_for(Criterion c) noexcept {
  switch (c) {
    case Criterion::Format:
      return kFormatNames;
    case Criterion::Hhc:
    case Criterion::Rigor:
      return kTriNames;
    case Criterion::Purpose:
      return kPurposeNames;
  }
  return {};
}

}  // namespace

int CriterionRatings::code(Criterion c) const noexcept {
  switch (c) {
    case Criterion::Format:
      return static_cast<int>(format);
    case Criterion::Hhc:
      return static_cast<int>(hhc);
    case Criterion::Purpose:
      return static_cast<int>(purpose);
    case Criterion::Rigor:
      return static_cast<int>(rigor);
  }
  return -1;
}

void CriterionRatings::set_code(Criterion c, int value) {
  if (value < 0 || value >= value_count(c)) {
    throw std::out_of_range("rating code out of range for " + std::string(criterion_name(c)));
  }
  switch (c) {
    case Criterion::Format:
      format = static_cast<Format>(value);
      break;
    case Criterion::Hhc:
      hhc = static_cast<TriState>(value);
      break;
    case Criterion::Purpose:
      purpose = static_cast<Purpose>(value);
      break;
    case Criterion::Rigor:
      rigor = static_cast<TriState>(value);
      break;
  }
}

int CriterionRatings::unrated_code(Criterion c) noexcept { return value_count(c) - 1; }

std::string_view criterion_name(Criterion c) noexcept { return kCriterionNames[static_cast<int>(c)]; }

std::optional<Criterion> parse_criterion(std::string_view name) noexcept {
  for (auto c : kCriteria) {
    if (criterion_name(c) == name) return c;
  }
  return std::nullopt;
}

int value_count(Criterion c) noexcept { return static_cast<int>(names_for(c).size()); }

std::string_view value_name(Criterion c, int code) {
  auto names = names_for(c);
  if (code < 0 || code >= static_cast<int>(names.size())) throw std::out_of_range("rating code");
  return names[code];
}

std::optional<int> parse_value(Criterion c, std::string_view name) noexcept {
  auto names = names_for(c);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

RatingSet::RatingSet(Criterion c, std::initializer_list<int> codes) {
  for (int code : codes) {
    if (code < 0 || code >= value_count(c)) throw std::out_of_range("rating code");
    insert(code);
  }
}

RatingSet RatingSet::all(Criterion c) {
  RatingSet s;
  for (int i = 0; i < value_count(c); ++i) s.insert(i);
  return s;
}

bool AcceptSets::matches(const CriterionRatings& r) const noexcept {
  for (auto c : kCriteria) {
    if (!(*this)[c].contains(r.code(c))) return false;
  }
  return true;
}

void AcceptSets::validate(std::string_view what) const {
  for (auto c : kCriteria) {
    if ((*this)[c].empty()) {
      throw ConfigError(std::string(what) + ": empty accept-set for " + std::string(criterion_name(c)));
    }
  }
}

AcceptSets AcceptSets::everything() {
  AcceptSets a;
  for (auto c : kCriteria) a[c] = RatingSet::all(c);
  return a;
}

PositiveClassSpec PositiveClassSpec::scientifically_sound_treatment() {
  PositiveClassSpec spec;
  spec.accept[Criterion::Format] = RatingSet(Criterion::Format, {static_cast<int>(Format::Original)});
  spec.accept[Criterion::Hhc] = RatingSet(Criterion::Hhc, {static_cast<int>(TriState::True)});
  spec.accept[Criterion::Purpose] = RatingSet(Criterion::Purpose, {static_cast<int>(Purpose::Treatment)});
  spec.accept[Criterion::Rigor] = RatingSet(Criterion::Rigor, {static_cast<int>(TriState::True)});
  return spec;
}

SubsetConstraint SubsetConstraint::del_fiol() {
  SubsetConstraint s;
  s.accept[Criterion::Format] =
      RatingSet(Criterion::Format, {static_cast<int>(Format::Original), static_cast<int>(Format::Review),
                                    static_cast<int>(Format::Blank)});
  const RatingSet rated_tri(Criterion::Hhc, {static_cast<int>(TriState::True), static_cast<int>(TriState::False)});
  s.accept[Criterion::Hhc] = rated_tri;
  s.accept[Criterion::Purpose] = RatingSet::all(Criterion::Purpose);
  s.accept[Criterion::Rigor] = rated_tri;
  return s;
}

StopRule StopRule::clinical_hedges() {
  StopRule rule;
  rule.stop_values[0] = RatingSet(Criterion::Format, {static_cast<int>(Format::GeneralMisc)});
  rule.unrated_stops = true;
  return rule;
}

StopRule StopRule::none() {
  StopRule rule;
  rule.unrated_stops = false;
  return rule;
}

std::optional<std::string> StopRule::violation(const CriterionRatings& r) const {
  for (int k = 0; k < 3; ++k) {
    const auto c = kCriteria[k];
    const int code = r.code(c);
    const bool stops = stop_values[k].contains(code) || (unrated_stops && !r.is_rated(c));
    if (!stops) continue;
    for (int j = k + 1; j < 4; ++j) {
      if (r.is_rated(kCriteria[j])) {
        return std::string(criterion_name(c)) + "=" + std::string(value_name(c, code)) +
               " stops rating but " + std::string(criterion_name(kCriteria[j])) + " is rated";
      }
    }
    break;
  }
  return std::nullopt;
}

Corpus::Corpus(std::vector<Article> articles, std::string provenance)
    : articles_(std::move(articles)), provenance_(std::move(provenance)) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(articles_.size());
  for (std::size_t i = 0; i < articles_.size(); ++i) {
    const auto& a = articles_[i];
    if (a.id.empty()) throw CorpusError("article " + std::to_string(i) + ": empty id");
    if (a.title.empty()) throw CorpusError("article " + a.id + ": empty title");
    if (!seen.insert(a.id).second) throw CorpusError("duplicate id " + a.id);
  }
}

bool derive_label(const Article& article, const PositiveClassSpec& spec) noexcept {
  return spec.accept.matches(article.ratings);
}

std::vector<bool> derive_labels(const Corpus& corpus, const PositiveClassSpec& spec) {
  std::vector<bool> labels;
  labels.reserve(corpus.size());
  for (const auto& a : corpus) labels.push_back(derive_label(a, spec));
  return labels;
}

Corpus filter_subset(const Corpus& corpus, const SubsetConstraint& constraint) {
  constraint.accept.validate("subset constraint");
  std::vector<Article> kept;
  for (const auto& a : corpus) {
    if (constraint.accept.matches(a.ratings)) kept.push_back(a);
  }
  return Corpus(std::move(kept), corpus.provenance());
}

// ---------------------------------------------------------------------------
// JSONL

namespace {

std::string require_string(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw CorpusError(std::string("missing field \"") + key + "\"");
  if (!it->is_string()) throw CorpusError(std::string("field \"") + key + "\" is not a string");
  return it->get<std::string>();
}

}  // namespace

Article parse_article_line(std::string_view line, const StopRule& stop_rule) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw CorpusError(std::string("malformed JSON: ") + e.what());
  }
  if (!j.is_object()) throw CorpusError("record is not a JSON object");

  Article a;
  a.id = require_string(j, "id");
  a.title = require_string(j, "title");
  if (auto it = j.find("abstract"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) throw CorpusError("field \"abstract\" is not a string");
    a.abstract = it->get<std::string>();
  }
  if (auto it = j.find("pt_tags"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw CorpusError("field \"pt_tags\" is not an array");
    for (const auto& t : *it) {
      if (!t.is_string()) throw CorpusError("pt_tags entry is not a string");
      a.pt_tags.push_back(t.get<std::string>());
    }
  }
  for (auto c : kCriteria) {
    const char* key = criterion_name(c).data();
    std::string value = "unrated";
    if (auto it = j.find(key); it != j.end()) value = require_string(j, key);
    auto code = parse_value(c, value);
    if (!code) throw CorpusError("unknown " + std::string(key) + " value \"" + value + "\"");
    a.ratings.set_code(c, *code);
  }
  if (a.id.empty()) throw CorpusError("empty id");
  if (a.title.empty()) throw CorpusError("article " + a.id + ": empty title");
  if (auto why = stop_rule.violation(a.ratings)) {
    throw CorpusError("article " + a.id + ": stop-early violation: " + *why);
  }
  return a;
}

std::string format_article_line(const Article& a) {
  nlohmann::ordered_json j;
  j["id"] = a.id;
  j["title"] = a.title;
  j["abstract"] = a.abstract;
  j["pt_tags"] = a.pt_tags;
  for (auto c : kCriteria) j[std::string(criterion_name(c))] = std::string(value_name(c, a.ratings.code(c)));
  return j.dump();
}

Corpus read_corpus(std::istream& in, const StopRule& stop_rule, std::string provenance) {
  std::vector<Article> articles;
  std::unordered_set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      Article a = parse_article_line(line, stop_rule);
      if (!seen.insert(a.id).second) throw CorpusError("duplicate id " + a.id);
      articles.push_back(std::move(a));
    } catch (const CorpusError& e) {
      throw CorpusError(provenance + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (in.bad()) throw IoError("read failure in " + provenance);
  return Corpus(std::move(articles), std::move(provenance));
}

Corpus load_corpus(const std::filesystem::path& path, const StopRule& stop_rule) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus file " + path.string());
  return read_corpus(in, stop_rule, path.string());
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
  for (const auto& a : corpus) out << format_article_line(a) << '\n';
}

void save_corpus(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_corpus(out, corpus);
  if (!out) throw IoError("write failure on " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic corpus

namespace {

constexpr int kCueVocabSize = 8;
constexpr int kBackgroundVocabSize = 3000;

// Relative frequencies of each rating value, loosely shaped after a MEDLINE
// sample. Unrated has no weight of its own; it only appears after a stop.
constexpr std::array<double, 5> kFormatWeights{0.45, 0.10, 0.10, 0.30, 0.05};
constexpr std::array<double, 2> kTriWeightsHhc{0.80, 0.20};
constexpr std::array<double, 8> kPurposeWeights{0.35, 0.10, 0.10, 0.15, 0.03, 0.02, 0.05, 0.20};
constexpr std::array<double, 2> kTriWeightsRigor{0.30, 0.70};

double value_weight(Criterion c, int code) {
  switch (c) {
    case Criterion::Format:
      return code < 5 ? kFormatWeights[code] : 0.0;
    case Criterion::Hhc:
      return code < 2 ? kTriWeightsHhc[code] : 0.0;
    case Criterion::Purpose:
      return code < 8 ? kPurposeWeights[code] : 0.0;
    case Criterion::Rigor:
      return code < 2 ? kTriWeightsRigor[code] : 0.0;
  }
  return 0.0;
}

std::string pseudo_word(Rng& rng) {
  static constexpr std::string_view kOnsets[] = {"b", "c",  "d",  "f",  "g",  "h",  "k", "l", "m",
                                                 "n", "p",  "r",  "s",  "t",  "v",  "z", "br", "cr",
                                                 "st", "tr", "pl", "gr", "ch", "th", "sh"};
  static constexpr std::string_view kVowels[] = {"a", "e", "i", "o", "u", "ai", "ea", "io", "ou"};
  std::string w;
  const auto syllables = 2 + rng.below(3);
  for (std::uint64_t s = 0; s < syllables; ++s) {
    w += kOnsets[rng.below(std::size(kOnsets))];
    w += kVowels[rng.below(std::size(kVowels))];
  }
  if (rng.bernoulli(0.4)) w += "n";
  return w;
}

struct Vocabulary {
  std::vector<std::string> background;
  // cue[c][code]; rigor cues are keyed by purpose code * 3 + rigor code.
  std::array<std::vector<std::vector<std::string>>, 4> cue;

  Vocabulary() {
    Rng rng(0x5eedc0deULL);
    std::set<std::string> used;
    auto fresh = [&] {
      for (;;) {
        auto w = pseudo_word(rng);
        if (used.insert(w).second) return w;
      }
    };
    auto fill = [&](int count) {
      std::vector<std::string> v;
      for (int i = 0; i < count; ++i) v.push_back(fresh());
      return v;
    };
    for (auto c : {Criterion::Format, Criterion::Hhc, Criterion::Purpose}) {
      for (int code = 0; code < value_count(c); ++code) cue[static_cast<int>(c)].push_back(fill(kCueVocabSize));
    }
    for (int p = 0; p < value_count(Criterion::Purpose); ++p) {
      for (int r = 0; r < value_count(Criterion::Rigor); ++r) {
        cue[static_cast<int>(Criterion::Rigor)].push_back(fill(kCueVocabSize));
      }
    }
    background = fill(kBackgroundVocabSize);
  }

  const std::vector<std::string>& cues(Criterion c, int code, int purpose_code) const {
    if (c == Criterion::Rigor) return cue[3][purpose_code * value_count(Criterion::Rigor) + code];
    return cue[static_cast<int>(c)][code];
  }
};

const Vocabulary& vocabulary() {
  static const Vocabulary v;
  return v;
}

struct WeightedRatings {
  CriterionRatings ratings;
  double weight;
};

// Every stop-consistent rating combination with a non-zero weight, in
// enumeration order.
std::vector<WeightedRatings> enumerate_ratings(const StopRule& rule) {
  std::vector<WeightedRatings> out;
  for (int f = 0; f < value_count(Criterion::Format); ++f) {
    for (int h = 0; h < value_count(Criterion::Hhc); ++h) {
      for (int p = 0; p < value_count(Criterion::Purpose); ++p) {
        for (int r = 0; r < value_count(Criterion::Rigor); ++r) {
          CriterionRatings cr;
          cr.set_code(Criterion::Format, f);
          cr.set_code(Criterion::Hhc, h);
          cr.set_code(Criterion::Purpose, p);
          cr.set_code(Criterion::Rigor, r);
          if (rule.violation(cr)) continue;
          // Unrated only where a stop forces it.
          double w = 1.0;
          bool stopped = false;
          for (int k = 0; k < 4; ++k) {
            const auto c = kCriteria[k];
            const int code = cr.code(c);
            if (stopped) {
              if (cr.is_rated(c)) w = 0.0;
              continue;
            }
            w *= value_weight(c, code);
            if (k < 3 && rule.stop_values[k].contains(code)) stopped = true;
          }
          if (w > 0.0) out.push_back({cr, w});
        }
      }
    }
  }
  return out;
}

const CriterionRatings& draw(const std::vector<WeightedRatings>& table, double total, Rng& rng) {
  double u = rng.uniform() * total;
  for (const auto& row : table) {
    if (u < row.weight) return row.ratings;
    u -= row.weight;
  }
  return table.back().ratings;
}

std::string capitalize(std::string w) {
  if (!w.empty() && w[0] >= 'a' && w[0] <= 'z') w[0] = static_cast<char>(w[0] - 'a' + 'A');
  return w;
}

std::string render(const std::vector<std::string>& words, Rng& rng, bool sentences) {
  std::string out;
  bool sentence_start = true;
  std::uint64_t until_stop = 8 + rng.below(12);
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (!out.empty()) out += ' ';
    out += sentence_start ? capitalize(words[i]) : words[i];
    sentence_start = false;
    if (sentences && --until_stop == 0 && i + 1 < words.size()) {
      out += rng.bernoulli(0.2) ? "," : ".";
      sentence_start = out.back() == '.';
      until_stop = 8 + rng.below(12);
    }
  }
  if (!out.empty()) out += '.';
  return out;
}

Article make_article(std::size_t index, const CriterionRatings& ratings, const SyntheticConfig& cfg, Rng& rng) {
  const auto& vocab = vocabulary();
  const int purpose_code = ratings.code(Criterion::Purpose);

  std::vector<std::string> cues;
  for (auto c : kCriteria) {
    if (!ratings.is_rated(c)) continue;
    const int truth = ratings.code(c);
    const int rated_values = value_count(c) - 1;
    // Distinct picks per source vocabulary so cue counts stay fixed.
    std::vector<std::vector<int>> remaining(static_cast<std::size_t>(rated_values));
    for (auto& r : remaining) {
      for (int i = 0; i < kCueVocabSize; ++i) r.push_back(i);
    }
    for (int t = 0; t < cfg.cue_tokens; ++t) {
      int source = truth;
      if (!rng.bernoulli(cfg.signal_strength[static_cast<int>(c)])) {
        source = static_cast<int>(rng.below(static_cast<std::uint64_t>(rated_values)));
      }
      auto& pool = remaining[static_cast<std::size_t>(source)];
      if (pool.empty()) continue;
      const auto pick = rng.below(pool.size());
      cues.push_back(vocab.cues(c, source, purpose_code)[static_cast<std::size_t>(pool[pick])]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
    }
  }
  rng.shuffle(std::span(cues));

  auto background_word = [&] { return vocab.background[rng.below(vocab.background.size())]; };

  std::vector<std::string> title;
  const auto title_len = 6 + rng.below(7);
  for (std::uint64_t i = 0; i < title_len; ++i) title.push_back(background_word());
  const std::size_t in_title = std::min<std::size_t>(2, cues.size());
  for (std::size_t i = 0; i < in_title; ++i) {
    title.insert(title.begin() + static_cast<std::ptrdiff_t>(rng.below(title.size() + 1)), cues[i]);
  }

  const int span = std::max(0, cfg.abstract_max_tokens - cfg.abstract_min_tokens);
  const auto abstract_len = static_cast<std::size_t>(cfg.abstract_min_tokens) + rng.below(static_cast<std::uint64_t>(span) + 1);
  std::vector<std::string> abstract;
  for (std::size_t i = 0; i < abstract_len; ++i) abstract.push_back(background_word());
  for (std::size_t i = in_title; i < cues.size(); ++i) {
    const auto window = std::min<std::size_t>(abstract.size(), static_cast<std::size_t>(std::max(cfg.cue_window, 1)));
    abstract.insert(abstract.begin() + static_cast<std::ptrdiff_t>(rng.below(window + 1)), cues[i]);
  }

  Article a;
  a.id = std::to_string(10000000 + index);
  a.title = render(title, rng, false);
  a.abstract = render(abstract, rng, true);
  a.ratings = ratings;

  const bool rct = ratings.format == Format::Original && ratings.purpose == Purpose::Treatment &&
                   ratings.rigor == TriState::True;
  if (rng.bernoulli(cfg.pt_tag_rate)) {
    if (rct) {
      a.pt_tags = {"Randomized Controlled Trial", "Journal Article"};
    } else if (ratings.format == Format::Review) {
      a.pt_tags = {"Review"};
    } else if (ratings.format == Format::CaseReport) {
      a.pt_tags = {"Case Reports"};
    } else {
      a.pt_tags = {"Journal Article"};
    }
  }
  return a;
}

}  // namespace

const std::vector<std::string>& synthetic_cue_vocabulary(Criterion c, int code, int purpose_code) {
  return vocabulary().cues(c, code, purpose_code);
}

Corpus generate_synthetic(const SyntheticConfig& cfg) {
  if (cfg.size < 1) throw ConfigError("synthetic corpus size must be >= 1");
  if (!(cfg.negatives_per_positive >= 0.0) || !std::isfinite(cfg.negatives_per_positive)) {
    throw ConfigError("negatives_per_positive must be a finite non-negative number");
  }
  for (double s : cfg.signal_strength) {
    if (!(s >= 0.0 && s <= 1.0)) throw ConfigError("signal strength must lie in [0, 1]");
  }
  if (cfg.cue_tokens < 0 || cfg.cue_tokens > kCueVocabSize) throw ConfigError("cue_tokens must lie in [0, 8]");
  if (cfg.abstract_min_tokens < 0 || cfg.abstract_max_tokens < cfg.abstract_min_tokens) {
    throw ConfigError("invalid abstract length range");
  }
  cfg.positive.accept.validate("positive class");

  const auto positives = static_cast<std::size_t>(
      std::llround(static_cast<double>(cfg.size) / (1.0 + cfg.negatives_per_positive)));
  const std::size_t negatives = cfg.size - positives;
  if (positives == 0) throw ConfigError("infeasible synthetic config: zero positives requested");

  std::vector<WeightedRatings> pos_table;
  std::vector<WeightedRatings> neg_table;
  for (auto& row : enumerate_ratings(cfg.stop_rule)) {
    (cfg.positive.accept.matches(row.ratings) ? pos_table : neg_table).push_back(row);
  }
  if (pos_table.empty()) throw ConfigError("infeasible synthetic config: no rating combination is positive");
  if (negatives > 0 && neg_table.empty()) {
    throw ConfigError("infeasible synthetic config: no rating combination is negative");
  }
  auto total = [](const std::vector<WeightedRatings>& t) {
    double s = 0.0;
    for (const auto& r : t) s += r.weight;
    return s;
  };
  const double pos_total = total(pos_table);
  const double neg_total = total(neg_table);

  Rng rng(cfg.seed);
  std::vector<std::uint8_t> labels(cfg.size, 0);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(positives), 1);
  rng.shuffle(std::span(labels));

  std::vector<Article> articles;
  articles.reserve(cfg.size);
  for (std::size_t i = 0; i < cfg.size; ++i) {
    const auto& ratings = labels[i] ? draw(pos_table, pos_total, rng) : draw(neg_table, neg_total, rng);
    articles.push_back(make_article(i, ratings, cfg, rng));
  }
  std::ostringstream provenance;
  provenance << "synthetic(n=" << cfg.size << ", ratio=1:" << cfg.negatives_per_positive << ", seed=" << cfg.seed
             << ")";
  return Corpus(std::move(articles), provenance.str());
}

}  // namespace screening
