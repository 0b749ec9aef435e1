#include <cmath>
#include <string>

#include "seqdisc/error.hpp"
#include "seqdisc/metrics.hpp"

namespace seqdisc::metrics {

namespace {

// Neumaier compensated sum; the enumeration order is fixed, so results are
// reproducible bit for bit.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      c_ += (sum_ - t) + x;
    } else {
      c_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + c_; }

 private:
  double sum_ = 0.0;
  double c_ = 0.0;
};

constexpr double kMassTolerance = 1e-6;

}  // namespace

OracleDensities::OracleDensities(const corpus::SequenceDensity& real, const corpus::SequenceDensity& model,
                                 std::size_t cap)
    : real_(&real), model_(&model) {
  if (real.content_size() != model.content_size() || real.max_length() != model.max_length()) {
    throw ParameterError("oracle pair must share vocabulary size and max length");
  }
  const std::size_t n = corpus::support_size(real.content_size(), real.max_length());
  if (n > cap) {
    throw CapacityError("support of " + std::to_string(n) + " sequences exceeds enumeration cap " +
                        std::to_string(cap));
  }
  p_real_.reserve(n);
  p_model_.reserve(n);
  // Both enumerations run the same DFS, so index i is the same sequence.
  corpus::enumerate_support(real, [&](const corpus::TokenSeq&, double lp) { p_real_.push_back(std::exp(lp)); }, cap);
  corpus::enumerate_support(model, [&](const corpus::TokenSeq&, double lp) { p_model_.push_back(std::exp(lp)); }, cap);
  CompensatedSum mr, mm;
  for (std::size_t i = 0; i < p_real_.size(); ++i) {
    mr.add(p_real_[i]);
    mm.add(p_model_[i]);
  }
  mass_real_ = mr.value();
  mass_model_ = mm.value();
  if (std::abs(mass_real_ - 1.0) > kMassTolerance || std::abs(mass_model_ - 1.0) > kMassTolerance) {
    throw ParameterError("oracle densities are not normalized (real mass " + std::to_string(mass_real_) +
                         ", model mass " + std::to_string(mass_model_) + ")");
  }
}

ScoreSet OracleDensities::optimal_scores() const {
  ScoreSet s;
  for (std::size_t i = 0; i < p_real_.size(); ++i) {
    if (p_real_[i] + p_model_[i] == 0.0) continue;
    const double d = optimal_d(p_real_[i], p_model_[i]);
    s.real.push_back(d);
    s.real_weights.push_back(p_real_[i]);
    s.gen.push_back(d);
    s.gen_weights.push_back(p_model_[i]);
  }
  return s;
}

double tv_exact(const OracleDensities& oracle) {
  CompensatedSum s;
  const auto pr = oracle.p_real();
  const auto pm = oracle.p_model();
  for (std::size_t i = 0; i < pr.size(); ++i) s.add(std::abs(pr[i] - pm[i]));
  return 0.5 * s.value();
}

double da_exact(const OracleDensities& oracle) {
  CompensatedSum s;
  const auto pr = oracle.p_real();
  const auto pm = oracle.p_model();
  for (std::size_t i = 0; i < pr.size(); ++i) {
    if (pr[i] + pm[i] == 0.0) continue;
    const double q_d = optimal_d(pr[i], pm[i]);
    const double q_theta = pm[i] / (pr[i] + pm[i]);
    s.add(pr[i] * (q_d - q_theta));
  }
  return s.value();
}

double ds_estimate_appendix_a(const OracleDensities& oracle, std::size_t n, std::uint64_t seed) {
  if (n < 100) throw ParameterError("ds_estimate_appendix_a: n must be >= 100");
  const auto& real = oracle.real();
  const auto& model = oracle.model();
  auto posterior = [&](const corpus::TokenSeq& x) { return optimal_d(real.prob(x), model.prob(x)); };

  std::size_t real_hi = 0;  // x ~ p_d with z >= 0.5
  for (const auto& x : real.sample(n, derive_seed(seed, "oracle/real"))) real_hi += posterior(x) >= 0.5 ? 1 : 0;
  std::size_t gen_lo = 0;  // x ~ p_theta with z < 0.5
  for (const auto& x : model.sample(n, derive_seed(seed, "oracle/model"))) gen_lo += posterior(x) < 0.5 ? 1 : 0;

  const double nn = static_cast<double>(n);
  const double real_term = (static_cast<double>(real_hi) - static_cast<double>(n - real_hi)) / nn;
  const double gen_term = (static_cast<double>(gen_lo) - static_cast<double>(n - gen_lo)) / nn;
  return 0.5 * (real_term + gen_term);
}

}  // namespace seqdisc::metrics
