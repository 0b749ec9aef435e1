#pragma once

// Subcommands of the seqdisc tool. Every command is a function of the run
// config, the artifacts already in the output directory and the master seed;
// it takes the directory lock, writes its outputs and refreshes the manifest.
//
// Output layout (relative to --out):
//   source.json vocab.txt corpus/{train,dev,test}.txt          synth
//   lm.json lm_log.csv disc.json disc_log.csv                   pretrain
//   measure.csv measure.json                                    measure
//   hw/d_s.csv hw/d_a.csv hw/counts.csv hw/logs/*.csv           hw
//   gan_<mode>/round_NN.{lm,disc}.json state.json rounds.csv    gan
//   gan_<mode>/third_party.csv                                  eval-rounds
//   report/*.csv                                                report

#include <filesystem>
#include <optional>
#include <string>

#include "seqdisc/metrics.hpp"
#include "seqdisc/pipeline/config.hpp"

namespace seqdisc::pipeline {

struct CommandContext {
  RunConfig config;
  std::filesystem::path out;
  /// Overwrite existing outputs (and restart interrupted GAN runs).
  bool force = false;
};

enum class GanMode { kPolicyGradient, kRelax };
std::string mode_name(GanMode mode);
GanMode parse_mode(const std::string& name);

void cmd_synth(const CommandContext& ctx);
void cmd_pretrain(const CommandContext& ctx);

struct MeasureOptions {
  /// LM checkpoint; defaults to <out>/lm.json.
  std::optional<std::filesystem::path> lm;
  /// Add exact tv / d_a and the Monte Carlo posterior estimate.
  bool oracle = false;
  /// Add a real-vs-real row.
  bool control = false;
};
metrics::DiscrepancyReport cmd_measure(const CommandContext& ctx, const MeasureOptions& options);

void cmd_hw(const CommandContext& ctx);
/// Runs rounds up to config.gan.rounds, resuming after the last completed
/// round found in gan_<mode>/state.json.
void cmd_gan(const CommandContext& ctx, GanMode mode);
void cmd_eval_rounds(const CommandContext& ctx, GanMode mode);
void cmd_report(const CommandContext& ctx);

/// Files whose content hash no longer matches the manifest.
std::vector<std::string> verify_outputs(const std::filesystem::path& out);

}  // namespace seqdisc::pipeline
