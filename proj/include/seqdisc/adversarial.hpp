#pragma once

// Generator interventions driven by a discriminator: score-band selection
// with MLE fine-tuning (HW), policy-gradient and Gumbel-softmax adversarial
// rounds, and per-round evaluation by freshly trained discriminators.

#include <cstdint>
#include <string>
#include <vector>

#include "seqdisc/corpus.hpp"
#include "seqdisc/metrics.hpp"
#include "seqdisc/models/discriminator.hpp"
#include "seqdisc/models/lm.hpp"
#include "seqdisc/models/training.hpp"

namespace seqdisc::adversarial {

struct BandSpec {
  enum class Mode { kBand, kRandom };
  Mode mode = Mode::kRandom;
  double lower = 0.0;
  double upper = 1.0;

  static BandSpec band(double lower, double upper);
  static BandSpec random() { return {}; }
  /// lower <= s < upper in band mode; always true in random mode.
  bool contains(double score) const { return mode == Mode::kRandom || (score >= lower && score < upper); }
  std::string label() const;
};

/// Rows of the score-band table: <0.3, 0.3-0.5, 0.5-0.9, >=0.9, random. The
/// top band's upper bound sits just above 1 so a score of exactly 1 is kept.
std::vector<BandSpec> standard_bands();
/// Sample multipliers of the table columns.
std::vector<double> standard_multipliers();

/// Samples whose score falls in the band, in input order. An empty result is
/// the empty-selection signal.
std::vector<corpus::TokenSeq> hw_select(const std::vector<corpus::TokenSeq>& samples,
                                        const models::SeqDiscriminator& disc, const BandSpec& band);

struct HwConfig {
  /// Generated samples = multiplier * training-set size.
  double sample_multiplier = 1.0;
  BandSpec band;
  /// Fine-tuning runs train.max_epochs epochs.
  nn::TrainConfig train;
  std::uint64_t seed = 1;

  void validate() const;
};

struct HwOutcome {
  std::size_t generated = 0;
  std::size_t selected = 0;
  /// Draws made (2 when the first selection came back empty).
  int attempts = 0;
  /// No sample fell in the band after the retry; the LM is unchanged.
  bool aborted = false;
};

HwOutcome hw_update(models::AutoregressiveLM& lm, const models::SeqDiscriminator& disc, std::size_t train_size,
                    const HwConfig& config);

struct RoundConfig {
  /// Generator optimizer and batch size.
  nn::TrainConfig generator{1e-3, 64, 1, 0, 1, 1};
  /// Discriminator optimizer and per-side batch size.
  nn::TrainConfig discriminator{1e-3, 64, 1, 0, 1, 1};
  std::size_t g_steps = 16;
  std::size_t d_steps = 15;
  /// Gumbel-softmax temperature (relaxation loop only).
  double temperature = 0.01;

  void validate() const;
};

struct RoundStats {
  double generator_loss = 0.0;
  double mean_reward = 0.0;
  double discriminator_loss = 0.0;
  /// A non-finite loss stopped the round; both models were rolled back.
  bool aborted = false;
};

/// REINFORCE with terminal reward D(x) and batch-mean baseline, then
/// discriminator updates on `real_pool` against fresh samples.
RoundStats pg_round(models::AutoregressiveLM& lm, models::SeqDiscriminator& disc,
                    const std::vector<corpus::TokenSeq>& real_pool, const RoundConfig& config, std::uint64_t seed);

/// Non-saturating generator loss -mean log D on Gumbel-softmax rows, then
/// discriminator updates on discrete samples.
RoundStats relax_round(models::AutoregressiveLM& lm, models::SeqDiscriminator& disc,
                       const std::vector<corpus::TokenSeq>& real_pool, const RoundConfig& config,
                       std::uint64_t seed);

/// Surrogate whose gradient is the REINFORCE estimate for `samples`.
nn::Var pg_surrogate(nn::Graph& g, const models::AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& samples,
                     const std::vector<double>& rewards);

/// -mean log D(relaxed rollout); only graphs holding the LM store as
/// trainable get generator gradients. Reports the hard rollout through
/// `sequences` when non-null.
nn::Var relax_generator_loss(nn::Graph& g, const models::AutoregressiveLM& lm, const models::SeqDiscriminator& disc,
                             std::size_t batch, double temperature, Rng& rng,
                             std::vector<corpus::TokenSeq>* sequences = nullptr);

struct ThirdPartyConfig {
  models::DiscConfig disc;
  nn::TrainConfig train;
  models::DiscTrainOptions train_options;
  std::size_t samples_per_side = 2000;
  double heldout_fraction = 0.4;
  metrics::ReportOptions report;
  /// Sequences per side of the separable sanity task run before each round.
  std::size_t sanity_samples = 200;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RoundRecord {
  std::size_t round = 0;
  std::string checkpoint;
  std::uint64_t disc_hash = 0;
  metrics::DiscrepancyReport report;
  double seconds = 0.0;
};

/// Fresh discriminator per round, trained on new real samples against samples
/// of that round's generator and evaluated on the test split. Throws
/// HarnessFault when a round's discriminator cannot beat chance on a
/// separable sanity task.
std::vector<RoundRecord> third_party_eval(const std::vector<const corpus::SequenceDensity*>& rounds,
                                          const std::vector<std::string>& labels,
                                          const corpus::SequenceDensity& source, const ThirdPartyConfig& config);

/// Measurement steps 2-4 for one generator: sample both sides, split, train a
/// fresh discriminator, report on the test split.
struct Measurement {
  metrics::DiscrepancyReport report;
  models::TrainLog log;
  std::uint64_t disc_hash = 0;
};
Measurement measure(const corpus::SequenceDensity& real, const corpus::SequenceDensity& generator,
                    const ThirdPartyConfig& config, std::uint64_t seed);

/// round,d_s,d_a,u_d,u_theta,accuracy,residual,ci_d_s_lo,ci_d_s_hi,ci_d_a_lo,ci_d_a_hi,seconds
std::string round_ledger_csv(const std::vector<RoundRecord>& records);

}  // namespace seqdisc::adversarial
