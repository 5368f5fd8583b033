#include "dtrbench/risk/risk.hpp"

#include <cmath>
#include <string>

#include "dtrbench/sim/types.hpp"

namespace dtrbench::risk {

double bg_transform(double bg) {
  if (!(bg > 0.0) || !std::isfinite(bg)) {
    throw DomainError("glucose must be positive and finite, got " + std::to_string(bg));
  }
  return 1.509 * (std::pow(std::log(bg), 1.084) - 5.381);
}

RiskBreakdown risk_index(double bg) {
  RiskBreakdown r;
  r.f_bg = bg_transform(bg);
  const double sq = 10.0 * r.f_bg * r.f_bg;
  if (r.f_bg < 0.0) r.lbgi = sq;
  if (r.f_bg > 0.0) r.hbgi = sq;
  r.ri = r.lbgi + r.hbgi;
  return r;
}

double step_reward(double bg, bool terminated) {
  const double risk_reward = (100.0 - risk_index(bg).ri) / 100.0;
  return risk_reward + (terminated ? kTerminationPenalty : 0.0);
}

double normalized_return(double total) {
  return (total - kMinReturn) / (kMaxReturn - kMinReturn) * 100.0;
}

double tir(std::span<const double> bg_trajectory) {
  require(!bg_trajectory.empty(), "tir needs a non-empty trajectory");
  std::size_t hits = 0;
  for (double bg : bg_trajectory) {
    if (bg >= sim::kTimeInRange.low && bg <= sim::kTimeInRange.high) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(bg_trajectory.size());
}

}  // namespace dtrbench::risk
