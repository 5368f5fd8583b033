#pragma once

#include <concepts>
#include <span>

#include "dtrbench/errors.hpp"

namespace dtrbench::risk {

/// Return bounds used by the min-max normalization: a full 64-step episode at zero risk, and
/// the worst case of an immediate termination.
inline constexpr double kMaxReturn = 64.0;
inline constexpr double kMinReturn = -99.7;
inline constexpr double kTerminationPenalty = -100.0;

struct RiskBreakdown {
  double f_bg = 0;
  double lbgi = 0;
  double hbgi = 0;
  double ri = 0;
};

/// f(BG) = 1.509 * (ln(BG)^1.084 - 5.381). Strictly increasing, zero near 112.5 mg/dL.
double bg_transform(double bg);

/// Per-sample low/high glucose indices: 10 f^2 on the side of zero that f falls on.
RiskBreakdown risk_index(double bg);

/// (100 - RI) / 100, minus 100 when the step ended the episode on an extreme glucose.
double step_reward(double bg, bool terminated);

/// Affine map of an episode return onto [0, 100]: -99.7 -> 0, 64 -> 100.
double normalized_return(double total);

/// Fraction of samples inside [70, 180] mg/dL, inclusive.
double tir(std::span<const double> bg_trajectory);

template <class Episode>
concept HasSurvival = requires(const Episode& e) {
  { e.survived } -> std::convertible_to<bool>;
};

/// Fraction of episodes that reached the step limit.
template <HasSurvival Episode>
double survival_rate(std::span<const Episode> episodes) {
  require(!episodes.empty(), "survival_rate needs at least one episode");
  std::size_t alive = 0;
  for (const Episode& e : episodes) alive += e.survived ? 1 : 0;
  return static_cast<double>(alive) / static_cast<double>(episodes.size());
}

}  // namespace dtrbench::risk
