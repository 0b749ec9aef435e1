#include <algorithm>
#include <cmath>
#include <limits>

#include "seqdisc/adversarial.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::adversarial {

namespace {

// Discriminator updates: each step one batch of real sequences drawn from the
// pool against a fresh batch from the generator. Returns the mean loss.
double update_discriminator(models::SeqDiscriminator& disc, const models::AutoregressiveLM& lm,
                            const std::vector<corpus::TokenSeq>& real_pool, const RoundConfig& config,
                            std::uint64_t seed) {
  Rng rng(derive_seed(seed, "d/real"));
  const std::size_t b = config.discriminator.batch_size;
  double total = 0.0;
  for (std::size_t step = 0; step < config.d_steps; ++step) {
    std::vector<corpus::TokenSeq> batch;
    std::vector<double> labels;
    batch.reserve(2 * b);
    for (std::size_t i = 0; i < b; ++i) batch.push_back(real_pool[rng.below(real_pool.size())]);
    for (auto& x : lm.sample(b, derive_seed(seed, "d/gen-" + std::to_string(step)))) batch.push_back(std::move(x));
    labels.assign(b, 1.0);
    labels.resize(2 * b, 0.0);
    nn::Graph g({&disc.params()});
    nn::Var loss = models::disc_loss(g, disc, batch, labels);
    const double value = g.value(loss).at(0, 0);
    if (!std::isfinite(value)) return value;
    g.backward(loss);
    nn::adam_step(disc.params(), config.discriminator);
    total += value;
  }
  return config.d_steps == 0 ? 0.0 : total / static_cast<double>(config.d_steps);
}

double own_nll(const models::AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& samples) {
  nn::Graph g;
  return g.value(lm.batch_nll(g, samples)).at(0, 0) / static_cast<double>(samples.size());
}

void check_pool(const std::vector<corpus::TokenSeq>& real_pool) {
  if (real_pool.empty()) throw ParameterError("adversarial round: empty real pool");
}

}  // namespace

void RoundConfig::validate() const {
  generator.validate();
  discriminator.validate();
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
}

nn::Var pg_surrogate(nn::Graph& g, const models::AutoregressiveLM& lm, const std::vector<corpus::TokenSeq>& samples,
                     const std::vector<double>& rewards) {
  if (samples.empty() || samples.size() != rewards.size()) {
    throw ParameterError("pg_surrogate: samples and rewards must be non-empty and aligned");
  }
  // Rewards are shifted by the first one before averaging, so a batch of
  // equal rewards yields exactly zero advantages.
  const double n = static_cast<double>(rewards.size());
  double shift_mean = 0.0;
  for (double r : rewards) shift_mean += r - rewards[0];
  shift_mean /= n;
  std::vector<double> weights(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) weights[i] = ((rewards[i] - rewards[0]) - shift_mean) / n;
  // Minimizing sum_i w_i * -log p(x_i) ascends mean[(R - b) log p].
  return lm.batch_nll(g, samples, std::move(weights));
}

RoundStats pg_round(models::AutoregressiveLM& lm, models::SeqDiscriminator& disc,
                    const std::vector<corpus::TokenSeq>& real_pool, const RoundConfig& config, std::uint64_t seed) {
  config.validate();
  check_pool(real_pool);
  const nn::ParamStore lm_before = lm.params();
  const nn::ParamStore disc_before = disc.params();
  RoundStats stats;
  auto abort = [&] {
    lm.params() = lm_before;
    disc.params() = disc_before;
    stats.aborted = true;
    return stats;
  };

  double reward_sum = 0.0, nll_sum = 0.0;
  for (std::size_t step = 0; step < config.g_steps; ++step) {
    const auto samples = lm.sample(config.generator.batch_size, derive_seed(seed, "pg/g-" + std::to_string(step)));
    const double nll = own_nll(lm, samples);
    if (!std::isfinite(nll)) return abort();
    const auto rewards = disc.score_batch(samples);
    nn::Graph g({&lm.params()});
    g.backward(pg_surrogate(g, lm, samples, rewards));
    nn::adam_step(lm.params(), config.generator);
    for (double r : rewards) reward_sum += r;
    nll_sum += nll;
  }
  if (config.g_steps > 0) {
    stats.generator_loss = nll_sum / static_cast<double>(config.g_steps);
    stats.mean_reward =
        reward_sum / static_cast<double>(config.g_steps * config.generator.batch_size);
  }
  stats.discriminator_loss = update_discriminator(disc, lm, real_pool, config, derive_seed(seed, "pg/d"));
  if (!std::isfinite(stats.discriminator_loss)) return abort();
  return stats;
}

nn::Var relax_generator_loss(nn::Graph& g, const models::AutoregressiveLM& lm, const models::SeqDiscriminator& disc,
                             std::size_t batch, double temperature, Rng& rng,
                             std::vector<corpus::TokenSeq>* sequences) {
  const auto rollout = lm.relaxed_rollout(g, batch, temperature, rng);
  const std::size_t v = lm.num_outputs() - 1;
  const auto vocab_size = static_cast<std::size_t>(disc.vocab().size());

  // Output symbol s maps to vocab id s + reserved, EOS to the EOS id.
  nn::Tensor projection = nn::Tensor::matrix(v + 1, vocab_size);
  for (std::size_t s = 0; s < v; ++s) projection.at(s, static_cast<std::size_t>(corpus::id_of(static_cast<int>(s)))) = 1.0;
  projection.at(v, corpus::kEos) = 1.0;

  const auto ids = disc.frame_ids(rollout.sequences);
  nn::Tensor base = nn::Tensor::matrix(ids.size(), vocab_size);
  for (std::size_t r = 0; r < ids.size(); ++r) base.at(r, static_cast<std::size_t>(ids[r])) = 1.0;

  std::vector<int> src;
  std::vector<std::size_t> dest;
  for (std::size_t b = 0; b < batch; ++b) {
    const auto tokens = static_cast<std::size_t>(lm.num_tokens(rollout.sequences[b]));
    for (std::size_t t = 0; t < tokens; ++t) {
      src.push_back(static_cast<int>(t * batch + b));
      dest.push_back(disc.frame_row(b, t + 1, batch));
    }
  }
  nn::Var soft = g.matmul(g.gather_rows(rollout.rows, std::move(src)), g.constant(std::move(projection)));
  nn::Var frame = g.place_rows(std::move(base), soft, std::move(dest));
  nn::Var z = disc.logits_from_rows(g, frame, batch);
  if (sequences) *sequences = rollout.sequences;
  return g.bce_with_logits(z, std::vector<double>(batch, 1.0), std::vector<double>(batch, 1.0 / static_cast<double>(batch)));
}

RoundStats relax_round(models::AutoregressiveLM& lm, models::SeqDiscriminator& disc,
                       const std::vector<corpus::TokenSeq>& real_pool, const RoundConfig& config,
                       std::uint64_t seed) {
  config.validate();
  check_pool(real_pool);
  const nn::ParamStore lm_before = lm.params();
  const nn::ParamStore disc_before = disc.params();
  RoundStats stats;
  auto abort = [&] {
    lm.params() = lm_before;
    disc.params() = disc_before;
    stats.aborted = true;
    return stats;
  };

  Rng rng(derive_seed(seed, "relax/gumbel"));
  double loss_sum = 0.0;
  for (std::size_t step = 0; step < config.g_steps; ++step) {
    nn::Graph g({&lm.params()});
    nn::Var loss = relax_generator_loss(g, lm, disc, config.generator.batch_size, config.temperature, rng);
    const double value = g.value(loss).at(0, 0);
    if (!std::isfinite(value)) return abort();
    g.backward(loss);
    nn::adam_step(lm.params(), config.generator);
    loss_sum += value;
  }
  if (config.g_steps > 0) stats.generator_loss = loss_sum / static_cast<double>(config.g_steps);
  stats.mean_reward = std::numeric_limits<double>::quiet_NaN();
  stats.discriminator_loss = update_discriminator(disc, lm, real_pool, config, derive_seed(seed, "relax/d"));
  if (!std::isfinite(stats.discriminator_loss)) return abort();
  return stats;
}

}  // namespace seqdisc::adversarial
