#include "seqdisc/models/training.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "seqdisc/error.hpp"
#include "seqdisc/metrics.hpp"

namespace seqdisc::models {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::size_t kEvalChunk = 512;

std::vector<std::size_t> iota(std::size_t n) {
  std::vector<std::size_t> v(n);
  std::iota(v.begin(), v.end(), std::size_t{0});
  return v;
}

bool step_cap_reached(const nn::TrainConfig& config, std::size_t steps) {
  return config.max_steps != 0 && steps >= config.max_steps;
}

void require_finite_loss(double loss, const char* what) {
  if (!std::isfinite(loss)) throw NumericError(std::string(what) + ": non-finite training loss");
}

// One shuffled pass; stops early at the step cap.
double lm_epoch(AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& data, std::vector<std::size_t>& order,
                Rng& rng, const nn::TrainConfig& config, std::size_t& steps) {
  rng.shuffle(order);
  double loss_sum = 0.0;
  std::size_t batches = 0;
  for (std::size_t start = 0; start < order.size() && !step_cap_reached(config, steps); start += config.batch_size) {
    const std::size_t end = std::min(order.size(), start + config.batch_size);
    std::vector<corpus::TokenSeq> batch;
    batch.reserve(end - start);
    for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
    nn::Graph g({&lm.params()});
    nn::Var loss = lm.mean_token_nll(g, batch);
    const double value = g.value(loss).at(0, 0);
    require_finite_loss(value, "lm training");
    g.backward(loss);
    nn::adam_step(lm.params(), config);
    loss_sum += value;
    ++batches;
    ++steps;
  }
  return batches == 0 ? kNaN : loss_sum / static_cast<double>(batches);
}

}  // namespace

double lm_finetune(AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& data, const nn::TrainConfig& config) {
  config.validate();
  if (data.empty()) throw ParameterError("lm_finetune: empty data");
  Rng rng(derive_seed(config.seed, "lm/finetune"));
  auto order = iota(data.size());
  std::size_t steps = 0;
  double loss = kNaN;
  for (std::size_t epoch = 1; epoch <= config.max_epochs && !step_cap_reached(config, steps); ++epoch) {
    loss = lm_epoch(lm, data, order, rng, config, steps);
  }
  return loss;
}

std::string TrainLog::to_csv() const {
  std::string out = "epoch,loss,dev_metric,u_d,u_theta,d_a,d_s,ema_u_d,ema_u_theta,ema_d_a,ema_d_s,best\n";
  using metrics::fmt;
  for (const auto& e : epochs) {
    out += std::to_string(e.epoch) + "," + fmt(e.loss, 9) + "," + fmt(e.dev_metric, 9) + "," + fmt(e.u_d) + "," +
           fmt(e.u_theta) + "," + fmt(e.d_a) + "," + fmt(e.d_s) + "," + fmt(e.ema_u_d) + "," + fmt(e.ema_u_theta) +
           "," + fmt(e.ema_d_a) + "," + fmt(e.ema_d_s) + "," + (e.epoch == best_epoch ? "1" : "0") + "\n";
  }
  return out;
}

double batched_perplexity(const AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& data) {
  if (data.empty()) throw ParameterError("perplexity: empty data");
  double nll = 0.0;
  double tokens = 0.0;
  for (std::size_t start = 0; start < data.size(); start += kEvalChunk) {
    const std::size_t end = std::min(data.size(), start + kEvalChunk);
    std::vector<corpus::TokenSeq> chunk(data.begin() + static_cast<std::ptrdiff_t>(start),
                                        data.begin() + static_cast<std::ptrdiff_t>(end));
    nn::Graph g;
    nll += g.value(lm.batch_nll(g, chunk)).at(0, 0);
    for (const auto& x : chunk) tokens += lm.num_tokens(x);
  }
  return std::exp(nll / tokens);
}

TrainLog lm_train_mle(AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& train,
                      const std::vector<corpus::TokenSeq>& dev, const nn::TrainConfig& config) {
  config.validate();
  if (train.empty()) throw ParameterError("lm_train_mle: empty training corpus");
  if (dev.empty()) throw ParameterError("lm_train_mle: empty dev corpus");

  TrainLog log;
  log.dev_metric_name = "dev_ppl";
  Rng rng(derive_seed(config.seed, "lm/shuffle"));
  auto order = iota(train.size());
  nn::ParamStore best = lm.params();
  double best_ppl = std::numeric_limits<double>::infinity();
  std::size_t since_best = 0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !step_cap_reached(config, log.steps); ++epoch) {
    const double epoch_loss = lm_epoch(lm, train, order, rng, config, log.steps);
    EpochRecord rec{epoch, epoch_loss, batched_perplexity(lm, dev),
                    kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
    log.epochs.push_back(rec);
    if (rec.dev_metric < best_ppl) {
      best_ppl = rec.dev_metric;
      best = lm.params();
      log.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  lm.params() = std::move(best);
  return log;
}

nn::Var disc_loss(nn::Graph& g, const SeqDiscriminator& disc, const std::vector<corpus::TokenSeq>& batch,
                  const std::vector<double>& labels) {
  const double w = 1.0 / static_cast<double>(batch.size());
  return g.bce_with_logits(disc.logits(g, batch), labels, std::vector<double>(batch.size(), w));
}

TrainLog disc_train(SeqDiscriminator& disc, const corpus::SplitCorpus& splits, const nn::TrainConfig& config,
                    const DiscTrainOptions& options) {
  config.validate();
  if (!splits.balanced()) throw ParameterError("disc_train: splits must be class balanced");
  if (splits.train_a.empty() || splits.dev_a.empty()) throw ParameterError("disc_train: empty train or dev split");
  if (options.dev_batch == 0) throw ParameterError("disc_train: dev_batch must be positive");
  if (!(options.ema_alpha > 0.0 && options.ema_alpha <= 1.0)) throw ParameterError("disc_train: bad ema alpha");

  TrainLog log;
  log.dev_metric_name = "dev_accuracy";
  const std::size_t n = splits.train_a.size();
  Rng shuffle_rng(derive_seed(config.seed, "disc/shuffle"));
  Rng dev_rng(derive_seed(config.seed, "disc/dev-batch"));
  auto order = iota(2 * n);  // i < n: real i, else generated i - n
  nn::ParamStore best = disc.params();
  double best_acc = -1.0;
  std::size_t since_best = 0;
  double ema_ud = 0.0, ema_ut = 0.0, ema_da = 0.0, ema_ds = 0.0;

  for (std::size_t epoch = 1; epoch <= config.max_epochs && !step_cap_reached(config, log.steps); ++epoch) {
    shuffle_rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size() && !step_cap_reached(config, log.steps);
         start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<corpus::TokenSeq> batch;
      std::vector<double> labels;
      for (std::size_t i = start; i < end; ++i) {
        const bool real = order[i] < n;
        batch.push_back(real ? splits.train_a[order[i]] : splits.train_b[order[i] - n]);
        labels.push_back(real ? 1.0 : 0.0);
      }
      nn::Graph g({&disc.params()});
      nn::Var loss = disc_loss(g, disc, batch, labels);
      const double value = g.value(loss).at(0, 0);
      require_finite_loss(value, "disc_train");
      g.backward(loss);
      nn::adam_step(disc.params(), config);
      loss_sum += value;
      ++batches;
      ++log.steps;
    }

    metrics::ScoreSet full{disc.score_batch(splits.dev_a), disc.score_batch(splits.dev_b), {}, {}};
    const double accuracy = metrics::abs_discrepancy(full).accuracy;

    metrics::ScoreSet sampled;
    for (std::size_t i = 0; i < options.dev_batch; ++i) {
      sampled.real.push_back(full.real[dev_rng.below(full.real.size())]);
      sampled.gen.push_back(full.gen[dev_rng.below(full.gen.size())]);
    }
    const auto approx = metrics::approx_discrepancy(sampled);
    const auto abs = metrics::abs_discrepancy(sampled);
    const double a = log.epochs.empty() ? 1.0 : options.ema_alpha;
    ema_ud = a * approx.u_d + (1.0 - a) * ema_ud;
    ema_ut = a * approx.u_theta + (1.0 - a) * ema_ut;
    ema_da = a * approx.d_a + (1.0 - a) * ema_da;
    ema_ds = a * abs.d_s + (1.0 - a) * ema_ds;
    log.epochs.push_back({epoch, loss_sum / static_cast<double>(batches), accuracy, approx.u_d, approx.u_theta,
                          approx.d_a, abs.d_s, ema_ud, ema_ut, ema_da, ema_ds});

    if (accuracy > best_acc) {
      best_acc = accuracy;
      best = disc.params();
      log.best_epoch = epoch;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  disc.params() = std::move(best);
  return log;
}

}  // namespace seqdisc::models
