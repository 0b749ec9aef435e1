#include <algorithm>
#include <cmath>

#include "seqdisc/error.hpp"
#include "seqdisc/metrics.hpp"

namespace seqdisc::metrics {

namespace {

// Linear interpolation between order statistics.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

Interval bootstrap_ci(const ScoreSet& scores, Statistic statistic, std::size_t resamples, std::uint64_t seed,
                      double level, double threshold) {
  scores.validate();
  if (scores.weighted()) throw ParameterError("bootstrap_ci needs sample (unweighted) scores");
  if (resamples < 200) throw ParameterError("bootstrap_ci: resamples must be >= 200");
  if (!(level > 0.0 && level < 1.0)) throw ParameterError("bootstrap_ci: level must be in (0, 1)");

  Rng rng(seed);
  std::vector<double> stats;
  stats.reserve(resamples);
  ScoreSet boot;
  boot.real.resize(scores.real.size());
  boot.gen.resize(scores.gen.size());
  for (std::size_t r = 0; r < resamples; ++r) {
    for (double& v : boot.real) v = scores.real[rng.below(scores.real.size())];
    for (double& v : boot.gen) v = scores.gen[rng.below(scores.gen.size())];
    stats.push_back(statistic == Statistic::kDa ? approx_discrepancy(boot).d_a
                                                : abs_discrepancy(boot, threshold).d_s);
  }
  std::sort(stats.begin(), stats.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile(stats, tail), quantile(stats, 1.0 - tail)};
}

}  // namespace seqdisc::metrics
