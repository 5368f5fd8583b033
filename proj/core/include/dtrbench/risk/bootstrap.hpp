#pragma once

#include <cstddef>
#include <cstdint>
#include <span>

namespace dtrbench::risk {

struct MetricSummary {
  double mean = 0;     // mean of the resample means
  double ci_low = 0;   // 2.5th percentile of resample means
  double ci_high = 0;  // 97.5th percentile
  std::size_t n = 0;

  friend bool operator==(const MetricSummary&, const MetricSummary&) = default;
};

inline constexpr std::size_t kDefaultResamples = 1000;

/// Percentile bootstrap of the sample mean. Uses its own generator seeded by `seed`, so results
/// do not depend on any simulation stream. Percentiles use linear interpolation between order
/// statistics.
MetricSummary bootstrap_ci(std::span<const double> samples,
                           std::size_t resamples = kDefaultResamples, std::uint64_t seed = 0);

/// Linear-interpolation percentile (q in [0, 1]) of already sorted data.
double percentile_sorted(std::span<const double> sorted, double q);

}  // namespace dtrbench::risk
