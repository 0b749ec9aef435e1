#include <chrono>

#include "seqdisc/adversarial.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::adversarial {

namespace {

// Two classes that share no content token: only the first symbol versus only
// the second, random lengths.
corpus::SplitCorpus sanity_split(const corpus::Vocab& vocab, int max_length, std::size_t n, std::uint64_t seed) {
  if (vocab.content_size() < 2) throw ParameterError("sanity task needs two content tokens");
  Rng rng(seed);
  auto side = [&](int symbol) {
    std::vector<corpus::TokenSeq> out(n);
    for (auto& x : out) {
      x.assign(1 + rng.below(static_cast<std::uint64_t>(max_length)), corpus::id_of(symbol));
    }
    return out;
  };
  const auto a = side(0);
  const auto b = side(1);
  return corpus::split(a, b, 0.4, derive_seed(seed, "split"));
}

}  // namespace

void ThirdPartyConfig::validate() const {
  disc.validate();
  train.validate();
  if (samples_per_side < 10) throw ParameterError("third party: samples_per_side must be >= 10");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) throw ParameterError("third party: bad held-out fraction");
}

Measurement measure(const corpus::SequenceDensity& real, const corpus::SequenceDensity& generator,
                    const ThirdPartyConfig& config, std::uint64_t seed) {
  config.validate();
  if (real.vocab() != generator.vocab() || real.max_length() != generator.max_length()) {
    throw ParameterError("measure: real and generated sides must share vocab and max length");
  }
  const auto a = real.sample(config.samples_per_side, derive_seed(seed, "measure/real"));
  const auto b = generator.sample(config.samples_per_side, derive_seed(seed, "measure/gen"));
  const auto splits = corpus::split(a, b, config.heldout_fraction, derive_seed(seed, "measure/split"));
  models::SeqDiscriminator disc(real.vocab(), real.max_length(), config.disc, derive_seed(seed, "measure/disc-init"));
  nn::TrainConfig tc = config.train;
  tc.seed = derive_seed(seed, "measure/disc-train");
  Measurement m;
  m.log = models::disc_train(disc, splits, tc, config.train_options);
  m.disc_hash = disc.hash();
  metrics::ScoreSet test{disc.score_batch(splits.test_a), disc.score_batch(splits.test_b), {}, {}};
  metrics::ReportOptions ro = config.report;
  ro.seed = derive_seed(seed, "measure/bootstrap");
  m.report = metrics::make_report(test, ro);
  return m;
}

std::vector<RoundRecord> third_party_eval(const std::vector<const corpus::SequenceDensity*>& rounds,
                                          const std::vector<std::string>& labels,
                                          const corpus::SequenceDensity& source, const ThirdPartyConfig& config) {
  config.validate();
  if (rounds.empty()) throw ParameterError("third_party_eval: no checkpoints");
  if (labels.size() != rounds.size()) throw ParameterError("third_party_eval: one label per checkpoint");
  std::vector<RoundRecord> out;
  for (std::size_t r = 0; r < rounds.size(); ++r) {
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = derive_seed(config.seed, "third-party/round-" + std::to_string(r));

    {
      const auto sanity = sanity_split(source.vocab(), source.max_length(), config.sanity_samples,
                                       derive_seed(seed, "sanity/data"));
      models::SeqDiscriminator probe(source.vocab(), source.max_length(), config.disc,
                                     derive_seed(seed, "measure/disc-init"));
      nn::TrainConfig tc = config.train;
      tc.seed = derive_seed(seed, "sanity/train");
      tc.max_epochs = std::min<std::size_t>(tc.max_epochs, 10);
      const auto log = models::disc_train(probe, sanity, tc, config.train_options);
      const double best = log.epochs.empty() ? 0.0 : log.epochs[log.best_epoch - 1].dev_metric;
      if (!(best > 0.5)) {
        throw HarnessFault("round " + std::to_string(r) + ": discriminator reached only " + std::to_string(best) +
                           " dev accuracy on separable sanity data");
      }
    }

    auto m = measure(source, *rounds[r], config, seed);
    RoundRecord rec;
    rec.round = r;
    rec.checkpoint = labels[r];
    rec.disc_hash = m.disc_hash;
    rec.report = m.report;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    out.push_back(std::move(rec));
  }
  return out;
}

std::string round_ledger_csv(const std::vector<RoundRecord>& records) {
  using metrics::fmt;
  std::string out = "round,d_s,d_a,u_d,u_theta,accuracy,residual,ci_d_s_lo,ci_d_s_hi,ci_d_a_lo,ci_d_a_hi,seconds\n";
  for (const auto& r : records) {
    const auto& p = r.report;
    out += std::to_string(r.round) + "," + fmt(p.d_s) + "," + fmt(p.d_a) + "," + fmt(p.u_d) + "," + fmt(p.u_theta) +
           "," + fmt(p.accuracy) + "," + fmt(p.constraint_residual) + "," + fmt(p.ci_d_s.lo) + "," +
           fmt(p.ci_d_s.hi) + "," + fmt(p.ci_d_a.lo) + "," + fmt(p.ci_d_a.hi) + "," + fmt(r.seconds, 3) + "\n";
  }
  return out;
}

}  // namespace seqdisc::adversarial
