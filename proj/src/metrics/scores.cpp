#include <cmath>
#include <cstdio>
#include <string>

#include "seqdisc/error.hpp"
#include "seqdisc/kernels.hpp"
#include "seqdisc/metrics.hpp"

namespace seqdisc::metrics {

namespace kn = seqdisc::kernels;

namespace {

void validate_side(const std::vector<double>& scores, const std::vector<double>& weights, const char* side) {
  if (scores.empty()) throw ParameterError(std::string(side) + " scores are empty");
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ParameterError(std::string(side) + " score outside [0, 1]");
  }
  if (weights.empty()) return;
  if (weights.size() != scores.size()) throw ParameterError(std::string(side) + " weights/scores length mismatch");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError(std::string(side) + " weight must be >= 0");
    total += w;
  }
  if (!(total > 0.0)) throw ParameterError(std::string(side) + " weights sum to zero");
}

double mean(const std::vector<double>& s, const std::vector<double>& w) {
  if (w.empty()) return kn::sum(s.data(), s.size()) / static_cast<double>(s.size());
  return kn::dot(s.data(), w.data(), s.size()) / kn::sum(w.data(), w.size());
}

// Weight strictly above `threshold` and total weight.
std::pair<double, double> mass_above(const std::vector<double>& s, const std::vector<double>& w, double threshold) {
  if (w.empty()) {
    return {static_cast<double>(kn::count_greater(s.data(), s.size(), threshold)), static_cast<double>(s.size())};
  }
  double above = 0.0, total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    total += w[i];
    if (s[i] > threshold) above += w[i];
  }
  return {above, total};
}

}  // namespace

void ScoreSet::validate() const {
  validate_side(real, real_weights, "real");
  validate_side(gen, gen_weights, "generated");
}

double optimal_d(double p_d, double p_theta) {
  if (!(p_d >= 0.0) || !(p_theta >= 0.0)) throw ParameterError("densities must be non-negative");
  if (p_d + p_theta == 0.0) throw UndefinedPointError("optimal discriminator undefined where p_d = p_theta = 0");
  return p_d / (p_d + p_theta);
}

ApproxDiscrepancy approx_discrepancy(const ScoreSet& scores) {
  scores.validate();
  ApproxDiscrepancy r;
  r.u_d = mean(scores.real, scores.real_weights);
  r.u_theta = mean(scores.gen, scores.gen_weights);
  r.d_a = r.u_d - r.u_theta;
  return r;
}

AbsDiscrepancy abs_discrepancy(const ScoreSet& scores, double threshold) {
  scores.validate();
  if (!(threshold > 0.0 && threshold < 1.0)) throw ParameterError("threshold must be in (0, 1)");
  const auto [real_hi, real_total] = mass_above(scores.real, scores.real_weights, threshold);
  const auto [gen_hi, gen_total] = mass_above(scores.gen, scores.gen_weights, threshold);
  const double real_lo = real_total - real_hi;
  const double gen_lo = gen_total - gen_hi;
  AbsDiscrepancy r;
  r.accuracy = (real_hi + gen_lo) / (real_total + gen_total);
  if (!scores.weighted() && scores.real.size() == scores.gen.size()) {
    // With equal counts the four-term sum is (2 correct - total) / total, so
    // one rounding of the accuracy fixes both numbers consistently.
    r.d_s = 2.0 * r.accuracy - 1.0;
  } else {
    r.d_s = 0.5 * ((real_hi - real_lo) / real_total + (gen_lo - gen_hi) / gen_total);
  }
  return r;
}

double constraint_residual(double u_d, double u_theta) { return std::abs(0.5 * (u_d + u_theta) - 0.5); }

double constraint_residual(const ScoreSet& scores) {
  const auto a = approx_discrepancy(scores);
  return constraint_residual(a.u_d, a.u_theta);
}

std::vector<double> ema(std::span<const double> series, double alpha) {
  if (series.empty()) throw ParameterError("ema: empty series");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("ema: alpha must be in (0, 1]");
  std::vector<double> out(series.size());
  out[0] = series[0];
  for (std::size_t t = 1; t < series.size(); ++t) out[t] = alpha * series[t] + (1.0 - alpha) * out[t - 1];
  return out;
}

std::string fmt(double v, int precision) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

}  // namespace seqdisc::metrics
