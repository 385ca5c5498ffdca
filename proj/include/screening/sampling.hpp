#pragma once

#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "screening/error.hpp"
#include "screening/rng.hpp"

namespace screening {

/// A per-class size target: an explicit count, the whole class, or the size
/// of the smaller class.
class SampleTarget {
 public:
  enum class Kind : std::uint8_t { Count, All, Minority };

  static SampleTarget count(std::size_t n) { return SampleTarget(Kind::Count, n); }
  static SampleTarget all() { return SampleTarget(Kind::All, 0); }
  static SampleTarget minority() { return SampleTarget(Kind::Minority, 0); }

  Kind kind() const noexcept { return kind_; }
  std::size_t value() const noexcept { return n_; }
  std::size_t resolve(std::size_t class_size, std::size_t minority_size) const noexcept;

  /// "all", "minority", or a positive integer.
  std::string to_string() const;
  static std::optional<SampleTarget> parse(std::string_view text);

  bool operator==(const SampleTarget&) const = default;

 private:
  SampleTarget(Kind k, std::size_t n) : kind_(k), n_(n) {}
  Kind kind_;
  std::size_t n_;
};

struct SamplingPlan {
  SampleTarget pos_target = SampleTarget::all();
  SampleTarget neg_target = SampleTarget::minority();
  std::uint64_t seed = 0;

  /// Every original positive once, negatives down-sampled to match.
  static SamplingPlan balanced(std::uint64_t seed = 0) { return {SampleTarget::all(), SampleTarget::minority(), seed}; }
  static SamplingPlan counts(std::size_t pos, std::size_t neg, std::uint64_t seed = 0) {
    return {SampleTarget::count(pos), SampleTarget::count(neg), seed};
  }
  bool operator==(const SamplingPlan&) const = default;
};

/// Resolved targets; throws SamplingError if a target resolves to zero.
std::pair<std::size_t, std::size_t> resolve_targets(const SamplingPlan& plan, std::size_t pos_size, std::size_t neg_size);

/// Multiset of original indices of size `target` drawn from `size` originals:
/// a seeded sample without replacement when target <= size, otherwise each
/// original floor(target/size) times plus one extra for a seeded subset.
std::vector<std::size_t> draw_indices(std::size_t size, std::size_t target, Rng& rng);

template <typename T>
struct Labeled {
  T item;
  bool label;
  bool operator==(const Labeled&) const = default;
};

/// Down-samples and/or duplicates each class to the plan's targets and
/// returns a seeded shuffle of the union. Throws SamplingError if a class is
/// empty.
template <typename T>
std::vector<Labeled<T>> resample(std::span<const T> pos, std::span<const T> neg, const SamplingPlan& plan) {
  if (pos.empty() || neg.empty()) throw SamplingError("resample needs both classes to be non-empty");
  const auto [pos_target, neg_target] = resolve_targets(plan, pos.size(), neg.size());
  Rng rng(plan.seed);
  const auto pos_idx = draw_indices(pos.size(), pos_target, rng);
  const auto neg_idx = draw_indices(neg.size(), neg_target, rng);
  std::vector<Labeled<T>> out;
  out.reserve(pos_idx.size() + neg_idx.size());
  for (auto i : pos_idx) out.push_back({pos[i], true});
  for (auto i : neg_idx) out.push_back({neg[i], false});
  rng.shuffle(std::span(out));
  return out;
}

/// Minority class kept whole, majority down-sampled to the same size.
/// Throws SamplingError if either label is absent.
template <typename T>
std::vector<Labeled<T>> balanced_stage_sample(std::span<const Labeled<T>> stage_data, std::uint64_t seed) {
  std::vector<T> pos;
  std::vector<T> neg;
  for (const auto& d : stage_data) (d.label ? pos : neg).push_back(d.item);
  if (pos.empty() || neg.empty()) {
    throw SamplingError(std::string("stage label absent: no ") + (pos.empty() ? "positive" : "negative") +
                        " examples in the stage pool");
  }
  const std::size_t m = std::min(pos.size(), neg.size());
  return resample<T>(pos, neg, SamplingPlan::counts(m, m, seed));
}

}  // namespace screening
