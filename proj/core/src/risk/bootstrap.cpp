#include "dtrbench/risk/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dtrbench/errors.hpp"
#include "dtrbench/random.hpp"

namespace dtrbench::risk {

double percentile_sorted(std::span<const double> sorted, double q) {
  require(!sorted.empty(), "percentile of empty data");
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + (sorted[hi] - sorted[lo]) * frac;
}

MetricSummary bootstrap_ci(std::span<const double> samples, std::size_t resamples,
                           std::uint64_t seed) {
  require(!samples.empty(), "bootstrap_ci needs at least one sample");
  require(resamples >= 1, "bootstrap_ci needs at least one resample");
  Rng rng(mix_seed(seed, 0xB0075742ULL));
  const std::size_t n = samples.size();
  std::vector<double> means(resamples);
  for (double& m : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += samples[uniform_index(rng, n)];
    m = sum / static_cast<double>(n);
  }
  MetricSummary out;
  out.n = n;
  out.mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(resamples);
  std::sort(means.begin(), means.end());
  out.ci_low = percentile_sorted(means, 0.025);
  out.ci_high = percentile_sorted(means, 0.975);
  return out;
}

}  // namespace dtrbench::risk
