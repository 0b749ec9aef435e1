#pragma once

// Discriminator-based discrepancy statistics between a real distribution
// p_d and a model distribution p_theta.
//
//   optimal discriminator     D*(x) = p_d(x) / (p_d(x) + p_theta(x))
//   u_d, u_theta              mean discriminator score under p_d, p_theta
//   approximate discrepancy   d_a = u_d - u_theta
//   absolute discrepancy      d_s = 1/2 sum |p_d - p_theta|  (total variation)
//
// d_s is estimated from scores as
//   1/2 [P_d(D > t) - P_d(D <= t) + P_theta(D <= t) - P_theta(D > t)]
// which on balanced samples equals accuracy - error rate = 2 accuracy - 1.
// A score equal to the threshold counts as "generated".

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqdisc/corpus.hpp"

namespace seqdisc::metrics {

/// Discriminator outputs on the real side and the generated side.
/// Optional weights turn the empirical means into exact expectations (used
/// with enumeration oracles); empty weight vectors mean uniform.
struct ScoreSet {
  std::vector<double> real;
  std::vector<double> gen;
  std::vector<double> real_weights;
  std::vector<double> gen_weights;

  bool weighted() const { return !real_weights.empty() || !gen_weights.empty(); }
  /// Non-empty sides, scores in [0, 1], weights non-negative with positive sum.
  void validate() const;
};

/// p_d / (p_d + p_theta); throws UndefinedPointError when both are zero.
double optimal_d(double p_d, double p_theta);

struct ApproxDiscrepancy {
  double u_d = 0.0;
  double u_theta = 0.0;
  double d_a = 0.0;
};
ApproxDiscrepancy approx_discrepancy(const ScoreSet& scores);

struct AbsDiscrepancy {
  double d_s = 0.0;
  double accuracy = 0.0;
};
AbsDiscrepancy abs_discrepancy(const ScoreSet& scores, double threshold = 0.5);

/// |(u_d + u_theta) / 2 - 0.5|; zero at the optimal discriminator.
double constraint_residual(const ScoreSet& scores);
double constraint_residual(double u_d, double u_theta);

/// Exact densities of a real/model pair over their shared finite support.
class OracleDensities {
 public:
  /// Enumerates the support once. Throws CapacityError above `cap`
  /// sequences and ParameterError if the pair disagrees on vocabulary size or
  /// max length, or either side's mass is off 1 by more than 1e-6.
  OracleDensities(const corpus::SequenceDensity& real, const corpus::SequenceDensity& model,
                  std::size_t cap = 10'000'000);

  const corpus::SequenceDensity& real() const { return *real_; }
  const corpus::SequenceDensity& model() const { return *model_; }
  std::size_t size() const { return p_real_.size(); }
  std::span<const double> p_real() const { return p_real_; }
  std::span<const double> p_model() const { return p_model_; }
  double mass_real() const { return mass_real_; }
  double mass_model() const { return mass_model_; }

  /// D* on every support point, weighted by p_d (real side) and p_theta
  /// (generated side): the exact-expectation ScoreSet.
  ScoreSet optimal_scores() const;

 private:
  const corpus::SequenceDensity* real_;
  const corpus::SequenceDensity* model_;
  std::vector<double> p_real_;
  std::vector<double> p_model_;
  double mass_real_ = 0.0;
  double mass_model_ = 0.0;
};

/// 1/2 sum_x |p_d(x) - p_theta(x)|
double tv_exact(const OracleDensities& oracle);
/// sum_x p_d(x) (q_d(x) - q_theta(x)), q_d = D*, q_theta = 1 - D*
double da_exact(const OracleDensities& oracle);

/// Monte Carlo form of the total variation: n draws from each side, each
/// classified by the exact posterior z = p_d / (p_d + p_theta) against 0.5.
/// Throws ParameterError for n < 100.
double ds_estimate_appendix_a(const OracleDensities& oracle, std::size_t n, std::uint64_t seed);

enum class Statistic { kDa, kDs };

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap, resampling each side independently. Needs at least
/// 200 resamples; deterministic in `seed`.
Interval bootstrap_ci(const ScoreSet& scores, Statistic statistic, std::size_t resamples, std::uint64_t seed,
                      double level = 0.95, double threshold = 0.5);

/// y_0 = x_0, y_t = alpha x_t + (1 - alpha) y_{t-1}; alpha in (0, 1].
std::vector<double> ema(std::span<const double> series, double alpha);

struct DiscrepancyReport {
  double d_s = 0.0;
  double d_a = 0.0;
  double accuracy = 0.0;
  double u_d = 0.0;
  double u_theta = 0.0;
  double constraint_residual = 0.0;
  Interval ci_d_s;
  Interval ci_d_a;
  std::size_t n_real = 0;
  std::size_t n_gen = 0;
  double threshold = 0.5;
  /// accuracy < 0.5: the classifier is worse than chance (d_s < 0, reported
  /// unclipped).
  bool below_chance = false;
};

struct ReportOptions {
  double threshold = 0.5;
  std::size_t resamples = 1000;
  std::uint64_t seed = 1;
};

DiscrepancyReport make_report(const ScoreSet& scores, const ReportOptions& options = {});

/// Column order: d_s, d_a, accuracy, u_d, u_theta, residual, CI bounds, counts.
std::string report_csv_header();
std::string report_csv_row(const DiscrepancyReport& r);
nlohmann::json report_to_json(const DiscrepancyReport& r);
DiscrepancyReport report_from_json(const nlohmann::json& doc);

/// Fixed-precision decimal used in every CSV we write.
std::string fmt(double v, int precision = 6);

}  // namespace seqdisc::metrics
