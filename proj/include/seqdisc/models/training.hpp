#pragma once

#include <string>
#include <vector>

#include "seqdisc/corpus.hpp"
#include "seqdisc/models/discriminator.hpp"
#include "seqdisc/models/lm.hpp"
#include "seqdisc/nnet/train.hpp"

namespace seqdisc::models {

/// One row per finished epoch. Discrepancy columns are NaN when a phase does
/// not measure them (LM training).
struct EpochRecord {
  std::size_t epoch = 0;
  double loss = 0.0;
  double dev_metric = 0.0;
  double u_d = 0.0;
  double u_theta = 0.0;
  double d_a = 0.0;
  double d_s = 0.0;
  double ema_u_d = 0.0;
  double ema_u_theta = 0.0;
  double ema_d_a = 0.0;
  double ema_d_s = 0.0;
};

struct TrainLog {
  /// "dev_ppl" or "dev_accuracy".
  std::string dev_metric_name;
  std::vector<EpochRecord> epochs;
  /// Epoch of the returned checkpoint; 0 when no epoch ran.
  std::size_t best_epoch = 0;
  std::size_t steps = 0;

  /// epoch,loss,dev_metric,u_d,u_theta,d_a,d_s,ema_u_d,ema_u_theta,ema_d_a,ema_d_s,best
  std::string to_csv() const;
};

/// Minimizes mean per-token NLL (EOS included) with Adam and leaves `lm` at
/// the epoch with the lowest dev perplexity.
TrainLog lm_train_mle(AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& train,
                      const std::vector<corpus::TokenSeq>& dev, const nn::TrainConfig& config);

/// `config.max_epochs` plain MLE epochs over `data`, no dev selection.
/// Returns the mean batch loss of the last epoch (NaN when no epoch ran).
double lm_finetune(AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& data, const nn::TrainConfig& config);

/// dev_metric of the batched perplexity used during training.
double batched_perplexity(const AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& data);

struct DiscTrainOptions {
  /// Sequences per side in the sampled dev batch behind the per-epoch d
  /// statistics.
  std::size_t dev_batch = 256;
  double ema_alpha = 0.1;
};

/// Binary cross-entropy with label 1 = side A (real), 0 = side B. Leaves
/// `disc` at the epoch with the best full-dev accuracy.
TrainLog disc_train(SeqDiscriminator& disc, const corpus::SplitCorpus& splits, const nn::TrainConfig& config,
                    const DiscTrainOptions& options = {});

/// Mean BCE of one mini-batch of labelled sequences, recorded on `g`.
nn::Var disc_loss(nn::Graph& g, const SeqDiscriminator& disc, const std::vector<corpus::TokenSeq>& batch,
                  const std::vector<double>& labels);

}  // namespace seqdisc::models
