#pragma once

// Run configuration: one JSON document, every block optional, unknown keys
// rejected. Phase seeds are derived from the master seed by label.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqdisc/adversarial.hpp"
#include "seqdisc/models/discriminator.hpp"
#include "seqdisc/models/lm.hpp"
#include "seqdisc/models/training.hpp"

namespace seqdisc::pipeline {

struct SourceSpec {
  int vocab_size = 6;
  int order = 2;
  int max_length = 6;
  double concentration = 0.5;
  /// Real sequences drawn by synth, before the train/dev/test cut.
  std::size_t corpus_size = 6000;
  /// Held out of the real corpus; halved into dev and test.
  double heldout_fraction = 1.0 / 6.0;
};

struct MeasureSpec {
  std::size_t samples_per_side = 3000;
  double heldout_fraction = 0.4;
  std::size_t resamples = 1000;
  double threshold = 0.5;
};

struct HwSpec {
  std::vector<double> multipliers = adversarial::standard_multipliers();
  /// Fine-tuning epochs and optimizer.
  nn::TrainConfig finetune{1e-3, 64, 1, 0, 1, 1};
};

struct GanSpec {
  std::size_t rounds = 10;
  /// round.g_steps = 0 means one pass over the training corpus per round.
  adversarial::RoundConfig round = [] {
    adversarial::RoundConfig r;
    r.g_steps = 0;
    return r;
  }();
};

struct ThirdPartySpec {
  std::size_t sanity_samples = 200;
};

struct RunConfig {
  std::uint64_t seed = 20200101;
  SourceSpec source;
  models::LmConfig lm;
  nn::TrainConfig lm_train{0.01, 64, 30, 0, 1, 5};
  models::DiscConfig disc;
  nn::TrainConfig disc_train{0.005, 32, 300, 0, 1, 20};
  models::DiscTrainOptions disc_options;
  MeasureSpec measure;
  HwSpec hw;
  GanSpec gan;
  ThirdPartySpec third_party;

  void validate() const;
  nlohmann::json to_json() const;
  /// Throws ParameterError on unknown keys, wrong types or invalid values.
  static RunConfig from_json(const nlohmann::json& doc);
  static RunConfig load(const std::filesystem::path& path);

  std::uint64_t phase_seed(std::string_view label) const { return derive_seed(seed, label); }
  /// Discriminator training and reporting settings shared by measure, hw and
  /// the third-party evaluation.
  adversarial::ThirdPartyConfig evaluation(std::string_view phase) const;
};

}  // namespace seqdisc::pipeline
