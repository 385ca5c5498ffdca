#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <numeric>
#include <unordered_set>
#include <vector>

#include "screening/features.hpp"
#include "screening/rng.hpp"

namespace screening {

/// Anything exposing a flat parameter vector and a per-sample objective.
template <typename M>
concept DifferentiableModel = requires(M& m, const M& cm, const FeatureVector& x, bool y, double l2, std::size_t i) {
  { cm.parameter_count() } -> std::convertible_to<std::size_t>;
  { cm.parameter(i) } -> std::convertible_to<double>;
  m.set_parameter(i, l2);
  { cm.loss(x, y, l2) } -> std::convertible_to<double>;
  { cm.loss_gradient(x, y, l2) } -> std::same_as<std::vector<double>>;
};

struct GradCheckOptions {
  /// Above this many parameters a seeded subsample is checked; parameters
  /// the sample actually touches are preferred.
  std::size_t max_parameters = 4096;
  std::uint64_t seed = 0;
  double l2 = 0.0;
  /// Gradient magnitudes below this are compared absolutely.
  double magnitude_floor = 1e-7;
};

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t parameters_checked = 0;
  std::size_t worst_parameter = 0;
};

/// Central finite differences against the analytic gradient. The model is
/// taken by value; parameters are perturbed on the copy.
template <DifferentiableModel M>
GradCheckResult grad_check_detailed(M model, const FeatureVector& x, bool label, double eps,
                                    const GradCheckOptions& options = {}) {
  if (!(eps >= 1e-8 && eps <= 1e-3)) throw std::invalid_argument("grad_check eps must lie in [1e-8, 1e-3]");
  const auto analytic = model.loss_gradient(x, label, options.l2);
  const std::size_t n = model.parameter_count();

  std::vector<std::size_t> chosen;
  if (n <= options.max_parameters) {
    chosen.resize(n);
    std::iota(chosen.begin(), chosen.end(), std::size_t{0});
  } else {
    Rng rng(options.seed);
    std::vector<std::size_t> active;
    if constexpr (requires { model.active_parameters(x); }) {
      active = model.active_parameters(x);
      rng.shuffle(std::span(active));
    }
    std::unordered_set<std::size_t> seen;
    const std::size_t from_active = std::min(active.size(), options.max_parameters / 2);
    for (std::size_t k = 0; k < from_active; ++k) {
      if (seen.insert(active[k]).second) chosen.push_back(active[k]);
    }
    while (chosen.size() < options.max_parameters) {
      const auto i = static_cast<std::size_t>(rng.below(n));
      if (seen.insert(i).second) chosen.push_back(i);
    }
    std::sort(chosen.begin(), chosen.end());
  }

  GradCheckResult result;
  for (auto i : chosen) {
    const double original = model.parameter(i);
    model.set_parameter(i, original + eps);
    const double up = model.loss(x, label, options.l2);
    model.set_parameter(i, original - eps);
    const double down = model.loss(x, label, options.l2);
    model.set_parameter(i, original);
    const double numeric = (up - down) / (2.0 * eps);
    const double denom = std::max({std::abs(numeric), std::abs(analytic[i]), options.magnitude_floor});
    const double err = std::abs(numeric - analytic[i]) / denom;
    if (err > result.max_relative_error) {
      result.max_relative_error = err;
      result.worst_parameter = i;
    }
  }
  result.parameters_checked = chosen.size();
  return result;
}

template <DifferentiableModel M>
double grad_check(const M& model, const FeatureVector& x, bool label, double eps, const GradCheckOptions& options = {}) {
  return grad_check_detailed(model, x, label, eps, options).max_relative_error;
}

}  // namespace screening
