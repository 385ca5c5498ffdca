#include "screening/sampling.hpp"

#include <algorithm>
#include <charconv>

namespace screening {

std::size_t SampleTarget::resolve(std::size_t class_size, std::size_t minority_size) const noexcept {
  switch (kind_) {
    case Kind::Count:
      return n_;
    case Kind::All:
      return class_size;
    case Kind::Minority:
      return minority_size;
  }
  return 0;
}

std::string SampleTarget::to_string() const {
  switch (kind_) {
    case Kind::Count:
      return std::to_string(n_);
    case Kind::All:
      return "all";
    case Kind::Minority:
      return "minority";
  }
  return {};
}

std::optional<SampleTarget> SampleTarget::parse(std::string_view text) {
  if (text == "all") return all();
  if (text == "minority") return minority();
  std::size_t n = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), n);
  if (ec != std::errc() || ptr != text.data() + text.size() || n == 0) return std::nullopt;
  return count(n);
}

std::pair<std::size_t, std::size_t> resolve_targets(const SamplingPlan& plan, std::size_t pos_size,
                                                    std::size_t neg_size) {
  const std::size_t minority = std::min(pos_size, neg_size);
  const auto pos = plan.pos_target.resolve(pos_size, minority);
  const auto neg = plan.neg_target.resolve(neg_size, minority);
  if (pos == 0 || neg == 0) throw SamplingError("sampling targets must be >= 1");
  return {pos, neg};
}

std::vector<std::size_t> draw_indices(std::size_t size, std::size_t target, Rng& rng) {
  if (size == 0) throw SamplingError("cannot sample from an empty class");
  std::vector<std::size_t> order(size);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(std::span(order));
  if (target <= size) {
    order.resize(target);
    return order;
  }
  // Balanced duplication: multiplicities differ by at most one.
  const std::size_t copies = target / size;
  const std::size_t extra = target % size;
  std::vector<std::size_t> out;
  out.reserve(target);
  for (std::size_t c = 0; c < copies; ++c) out.insert(out.end(), order.begin(), order.end());
  out.insert(out.end(), order.begin(), order.begin() + static_cast<std::ptrdiff_t>(extra));
  return out;
}

}  // namespace screening
