#include <cmath>
#include <cstdio>

#include "seqdisc/adversarial.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::adversarial {

namespace {

// Upper edge of the top band; any sigmoid output is below it.
constexpr double kTopEdge = 1.0 + 1e-9;

std::string edge(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

BandSpec BandSpec::band(double lower, double upper) {
  if (!(lower >= 0.0 && lower < upper && upper <= kTopEdge)) {
    throw ParameterError("band needs 0 <= lower < upper <= 1");
  }
  return {Mode::kBand, lower, upper};
}

std::string BandSpec::label() const {
  if (mode == Mode::kRandom) return "random";
  if (lower == 0.0) return "<" + edge(upper);
  if (upper >= 1.0) return ">=" + edge(lower);
  return edge(lower) + "-" + edge(upper);
}

std::vector<BandSpec> standard_bands() {
  return {BandSpec::band(0.0, 0.3), BandSpec::band(0.3, 0.5), BandSpec::band(0.5, 0.9), BandSpec::band(0.9, kTopEdge),
          BandSpec::random()};
}

std::vector<double> standard_multipliers() { return {0.1, 0.5, 1.0, 2.0, 5.0}; }

std::vector<corpus::TokenSeq> hw_select(const std::vector<corpus::TokenSeq>& samples,
                                        const models::SeqDiscriminator& disc, const BandSpec& band) {
  if (samples.empty()) throw ParameterError("hw_select: no samples");
  if (band.mode == BandSpec::Mode::kRandom) return samples;
  const auto scores = disc.score_batch(samples);
  std::vector<corpus::TokenSeq> out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (band.contains(scores[i])) out.push_back(samples[i]);
  }
  return out;
}

void HwConfig::validate() const {
  if (!(sample_multiplier > 0.0) || !std::isfinite(sample_multiplier)) {
    throw ParameterError("hw: sample multiplier must be positive");
  }
  train.validate();
}

HwOutcome hw_update(models::AutoregressiveLM& lm, const models::SeqDiscriminator& disc, std::size_t train_size,
                    const HwConfig& config) {
  config.validate();
  if (train_size == 0) throw ParameterError("hw_update: training-set size must be positive");
  HwOutcome out;
  out.generated = static_cast<std::size_t>(std::llround(config.sample_multiplier * static_cast<double>(train_size)));
  if (out.generated == 0) out.generated = 1;
  std::vector<corpus::TokenSeq> selected;
  for (int attempt = 0; attempt < 2 && selected.empty(); ++attempt) {
    out.attempts = attempt + 1;
    const auto samples = lm.sample(out.generated, derive_seed(config.seed, "hw/sample-" + std::to_string(attempt)));
    selected = hw_select(samples, disc, config.band);
  }
  out.selected = selected.size();
  if (selected.empty()) {
    out.aborted = true;
    return out;
  }
  nn::TrainConfig tc = config.train;
  tc.seed = derive_seed(config.seed, "hw/finetune");
  models::lm_finetune(lm, selected, tc);
  return out;
}

}  // namespace seqdisc::adversarial
