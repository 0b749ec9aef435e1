#include <cmath>

#include "doctest.h"
#include "gradcases.hpp"
#include "seqdisc/adversarial.hpp"
#include "seqdisc/error.hpp"

using namespace seqdisc;
using namespace seqdisc::adversarial;
using corpus::id_of;
using corpus::TokenSeq;

namespace {

const corpus::Vocab kVocab = corpus::Vocab::synthetic(3);

models::AutoregressiveLM lm_for_test(std::uint64_t seed) {
  models::AutoregressiveLM lm(kVocab, 4, {6, 8}, seed);
  gradcases::perturb(lm.params(), seed);
  return lm;
}

models::SeqDiscriminator disc_for_test(std::uint64_t seed) {
  models::DiscConfig c;
  c.embed_dim = 6;
  c.filters = 6;
  return models::SeqDiscriminator(kVocab, 4, c, seed);
}

nn::TrainConfig one_epoch(double lr, std::size_t batch) {
  nn::TrainConfig c;
  c.learning_rate = lr;
  c.batch_size = batch;
  c.max_epochs = 1;
  return c;
}

}  // namespace

TEST_SUITE("adversarial") {

TEST_CASE("band boundaries are half-open") {
  auto b = BandSpec::band(0.3, 0.5);
  CHECK_FALSE(b.contains(0.2));
  CHECK(b.contains(0.3));
  CHECK(b.contains(0.49));
  CHECK_FALSE(b.contains(0.5));
  const auto bands = standard_bands();
  REQUIRE(bands.size() == 5);
  CHECK(bands[0].contains(0.0));
  CHECK(bands[3].contains(1.0));
  CHECK(bands[4].contains(0.123));
  CHECK(bands[0].label() == "<0.3");
  CHECK(bands[1].label() == "0.3-0.5");
  CHECK(bands[2].label() == "0.5-0.9");
  CHECK(bands[3].label() == ">=0.9");
  CHECK(bands[4].label() == "random");
  CHECK(standard_multipliers() == std::vector<double>{0.1, 0.5, 1, 2, 5});
  CHECK_THROWS_AS(BandSpec::band(0.5, 0.3), ParameterError);
}

TEST_CASE("hw_select on a half-scoring discriminator") {
  auto disc = disc_for_test(1);
  const auto xs = gradcases::toy_batch();
  CHECK(hw_select(xs, disc, standard_bands()[3]).empty());
  CHECK(hw_select(xs, disc, BandSpec::random()) == xs);
  CHECK(hw_select(xs, disc, BandSpec::band(0.5, 0.9)) == xs);
  CHECK(hw_select(xs, disc, BandSpec::band(0.3, 0.5)).empty());
}

TEST_CASE("hw_update: abort, identity and unfiltered equivalence") {
  auto disc = disc_for_test(1);
  HwConfig cfg;
  cfg.sample_multiplier = 0.5;
  cfg.train = one_epoch(0.01, 16);
  cfg.seed = 3;

  auto lm = lm_for_test(2);
  const auto h = lm.hash();
  cfg.band = standard_bands()[3];
  auto out = hw_update(lm, disc, 100, cfg);
  CHECK(out.aborted);
  CHECK(out.attempts == 2);
  CHECK(out.selected == 0);
  CHECK(lm.hash() == h);

  cfg.band = BandSpec::random();
  cfg.train.max_epochs = 0;
  out = hw_update(lm, disc, 100, cfg);
  CHECK_FALSE(out.aborted);
  CHECK(out.generated == 50);
  CHECK(lm.hash() == h);

  cfg.train.max_epochs = 1;
  out = hw_update(lm, disc, 100, cfg);
  CHECK(out.selected == 50);
  CHECK(lm.hash() != h);
  auto manual = lm_for_test(2);
  auto tc = cfg.train;
  tc.seed = derive_seed(cfg.seed, "hw/finetune");
  models::lm_finetune(manual, manual.sample(50, derive_seed(cfg.seed, "hw/sample-0")), tc);
  CHECK(manual.hash() == lm.hash());
}

TEST_CASE("policy gradient with equal rewards leaves the generator alone") {
  auto lm = lm_for_test(4);
  const auto samples = lm.sample(32, 1);
  lm.params().zero_grad();
  {
    nn::Graph g({&lm.params()});
    g.backward(pg_surrogate(g, lm, samples, std::vector<double>(32, 0.73)));
  }
  CHECK(lm.params().grad_norm_sq() == 0.0);

  std::vector<double> varied(32);
  for (std::size_t i = 0; i < 32; ++i) varied[i] = i % 3 * 0.2;
  {
    nn::Graph g({&lm.params()});
    g.backward(pg_surrogate(g, lm, samples, varied));
  }
  CHECK(lm.params().grad_norm_sq() > 0.0);

  // an untrained discriminator rewards every sample with exactly 0.5
  auto fresh = lm_for_test(4);
  auto disc = disc_for_test(2);
  RoundConfig rc;
  rc.generator = one_epoch(0.01, 64);
  rc.discriminator = one_epoch(0.01, 16);
  rc.g_steps = 3;
  rc.d_steps = 2;
  const auto h = fresh.hash();
  const auto dh = disc.hash();
  auto stats = pg_round(fresh, disc, lm_for_test(9).sample(200, 3), rc, 5);
  CHECK_FALSE(stats.aborted);
  CHECK(stats.mean_reward == 0.5);
  CHECK(fresh.hash() == h);
  CHECK(disc.hash() != dh);
}

TEST_CASE("pg update shrinks as the batch grows against a constant discriminator") {
  // rewards independent of the sample: the estimator is unbiased for zero
  auto lm = lm_for_test(6);
  Rng rng(1);
  auto norm_at = [&](std::size_t n) {
    const auto samples = lm.sample(n, n);
    std::vector<double> rewards(n);
    for (double& r : rewards) r = rng.uniform();
    lm.params().zero_grad();
    nn::Graph g({&lm.params()});
    g.backward(pg_surrogate(g, lm, samples, rewards));
    return std::sqrt(lm.params().grad_norm_sq());
  };
  const double small = norm_at(64), large = norm_at(4096);
  CHECK(large < small);
  CHECK(large < 0.5 * small);
}

TEST_CASE("relaxed generator loss vanishes when D is identically one") {
  auto lm = lm_for_test(3);
  auto disc = disc_for_test(2);
  disc.params().get("disc.score.b").value[0] = 800.0;
  nn::Graph g({&lm.params()});
  Rng rng(2);
  std::vector<TokenSeq> seqs;
  nn::Var loss = relax_generator_loss(g, lm, disc, 16, 0.01, rng, &seqs);
  CHECK(g.value(loss)[0] == 0.0);
  CHECK(seqs.size() == 16);

  RoundConfig rc;
  rc.temperature = 0.0;
  CHECK_THROWS_AS(relax_round(lm, disc, {{id_of(0)}}, rc, 1), ParameterError);
}

TEST_CASE("relax round is deterministic") {
  RoundConfig rc;
  rc.generator = one_epoch(0.01, 16);
  rc.discriminator = one_epoch(0.01, 16);
  rc.g_steps = 2;
  rc.d_steps = 2;
  auto run = [&] {
    auto lm = lm_for_test(5);
    auto disc = disc_for_test(5);
    auto s = relax_round(lm, disc, lm_for_test(7).sample(100, 1), rc, 11);
    CHECK_FALSE(s.aborted);
    return std::pair{lm.hash(), disc.hash()};
  };
  CHECK(run() == run());
}

TEST_CASE("third-party evaluation: control, identical checkpoints, sanity fault") {
  auto src = corpus::GroundTruthSource::make(7, 3, 1, 4, 0.5);
  ThirdPartyConfig cfg;
  cfg.disc.embed_dim = 8;
  cfg.disc.filters = 8;
  cfg.train = one_epoch(0.005, 32);
  cfg.train.max_epochs = 15;
  cfg.train.patience = 5;
  cfg.samples_per_side = 1500;
  cfg.report.resamples = 300;
  cfg.seed = 3;

  auto lm = lm_for_test(8);
  const std::vector<const corpus::SequenceDensity*> rounds{&src, &lm, &lm};
  auto recs = third_party_eval(rounds, {"source", "a", "b"}, src, cfg);
  REQUIRE(recs.size() == 3);
  CHECK(std::abs(recs[0].report.d_s) <= 0.1);
  const auto& a = recs[1].report;
  const auto& b = recs[2].report;
  CHECK(std::abs(a.d_s - b.d_s) <= (a.ci_d_s.hi - a.ci_d_s.lo) + (b.ci_d_s.hi - b.ci_d_s.lo));
  CHECK(recs[1].checkpoint == "a");
  CHECK(round_ledger_csv(recs).rfind("round,d_s,d_a", 0) == 0);

  cfg.train.max_epochs = 0;
  CHECK_THROWS_AS(third_party_eval({&src}, {"x"}, src, cfg), HarnessFault);
}

}
