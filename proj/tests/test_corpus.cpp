#include <cmath>
#include <filesystem>
#include <map>

#include "doctest.h"
#include "fixtures.hpp"
#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

using namespace seqdisc;
using namespace seqdisc::corpus;

namespace {

double support_mass(const SequenceDensity& d) {
  double m = 0.0;
  enumerate_support(d, [&](const TokenSeq&, double lp) { m += std::exp(lp); });
  return m;
}

std::vector<TokenSeq> numbered(int n, int tag) {
  std::vector<TokenSeq> out;
  for (int i = 0; i < n; ++i) out.push_back({id_of(tag), id_of(i % 2), id_of((i / 2) % 2)});
  return out;
}

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("vocab reserves BOS/EOS/PAD and round-trips tokens") {
  Vocab v = Vocab::synthetic(3);
  CHECK(v.size() == 6);
  CHECK(v.content_size() == 3);
  CHECK(v.token(id_of(2)) == "w2");
  CHECK(v.id("w1") == id_of(1));
  CHECK_FALSE(v.is_content(kEos));
  CHECK_THROWS_AS(v.id("nope"), ParameterError);
  CHECK_THROWS_AS(Vocab({"a", "a"}), ParameterError);
  CHECK(v.hash() == Vocab::synthetic(3).hash());
  CHECK(v.hash() != Vocab::synthetic(4).hash());
}

TEST_CASE("exact_prob is the product of transitions") {
  auto src = fixtures::degenerate(0.6, 5);
  const int t = fixtures::tok();
  CHECK(src.exact_prob({t}) == doctest::Approx(0.24).epsilon(1e-15));
  CHECK(src.exact_prob({t, t}) == doctest::Approx(0.144).epsilon(1e-15));
  CHECK(std::exp(src.log_prob({t, t})) == doctest::Approx(0.144).epsilon(1e-14));
  // EOS is forced once max_length tokens are out
  CHECK(src.exact_prob({t, t, t, t, t}) == doctest::Approx(std::pow(0.6, 5)).epsilon(1e-14));
  CHECK_THROWS_AS(src.exact_prob({99}), ParameterError);
  CHECK_THROWS_AS(src.exact_prob({t, t, t, t, t, t}), ParameterError);
}

TEST_CASE("generated sources are normalized and deterministic") {
  auto a = GroundTruthSource::make(1, 2, 1, 3, 1.0);
  auto b = GroundTruthSource::make(1, 2, 1, 3, 1.0);
  CHECK(support_mass(a) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::vector<double>(a.transition().begin(), a.transition().end()) ==
        std::vector<double>(b.transition().begin(), b.transition().end()));
  auto c = GroundTruthSource::make(2, 6, 1, 8, 0.5);
  CHECK(support_size(6, 8) == 1 + 6 + 36 + 216 + 1296 + 7776 + 46656 + 279936 + 1679616);
  CHECK(support_mass(c) == doctest::Approx(1.0).epsilon(1e-9));
  for (double p : c.transition()) CHECK(p > 0.0);
  CHECK_THROWS_AS(GroundTruthSource::make(1, 1, 1, 3, 1.0), ParameterError);
  CHECK_THROWS_AS(GroundTruthSource::make(1, 3, 0, 3, 1.0), ParameterError);
  CHECK_THROWS_AS(GroundTruthSource::make(1, 3, 1, 3, 0.0), ParameterError);
}

TEST_CASE("enumeration refuses supports above the cap") {
  auto src = GroundTruthSource::make(4, 4, 1, 6, 1.0);
  CHECK_THROWS_AS(enumerate_support(src, [](const TokenSeq&, double) {}, 100), CapacityError);
}

TEST_CASE("sampling matches the exact length distribution") {
  auto src = fixtures::degenerate(0.6, 8);
  CHECK_THROWS_AS(src.sample(0, 7), ParameterError);
  const std::size_t n = 100000;
  auto xs = src.sample(n, 7);
  CHECK(xs == src.sample(n, 7));
  std::size_t len1 = 0;
  for (const auto& x : xs) len1 += x.size() == 1;
  const double p = src.exact_prob({fixtures::tok()});
  const double sigma = std::sqrt(p * (1 - p) / n);
  CHECK(std::abs(static_cast<double>(len1) / n - p) <= 4 * sigma);
  CHECK(std::abs(static_cast<double>(len1) / n - p) <= 0.01);
}

TEST_CASE("sampling frequencies follow exact_prob on a random source") {
  auto src = GroundTruthSource::make(5, 3, 2, 3, 1.0);
  const std::size_t n = 50000;
  std::map<TokenSeq, std::size_t> counts;
  for (const auto& x : src.sample(n, 9)) ++counts[x];
  for (const auto& [x, c] : counts) {
    const double p = src.exact_prob(x);
    const double sigma = std::sqrt(p * (1 - p) / n);
    CHECK(std::abs(static_cast<double>(c) / n - p) <= 5 * sigma + 1e-12);
  }
}

TEST_CASE("greedy picks the argmax path") {
  auto src = fixtures::degenerate(0.6, 3);
  const int t = fixtures::tok();
  CHECK(src.greedy() == TokenSeq{t, t, t});
  CHECK_THROWS_AS(src.sample(3, 1, 0.0), ParameterError);
}

TEST_CASE("split sizes, truncation and determinism") {
  auto real = numbered(1000, 0), gen = numbered(1000, 1);
  auto s = split(real, gen, 0.2, 5);
  CHECK(s.train_a.size() == 800);
  CHECK(s.dev_a.size() == 100);
  CHECK(s.test_a.size() == 100);
  CHECK(s.balanced());
  for (const auto& x : s.train_b) CHECK(x[0] == id_of(1));

  auto gen900 = numbered(900, 1);
  auto u = split(real, gen900, 0.2, 5);
  CHECK(u.balanced());
  CHECK(u.train_a.size() + u.dev_a.size() + u.test_a.size() == 900);
  CHECK(u.train_b.size() + u.dev_b.size() + u.test_b.size() == 900);

  auto again = split(real, gen, 0.2, 5);
  CHECK(again.train_a == s.train_a);
  CHECK(again.test_b == s.test_b);
  CHECK_THROWS_AS(split(numbered(2, 0), numbered(2, 1), 0.2, 5), ParameterError);
  CHECK_THROWS_AS(split(real, gen, 1.0, 5), ParameterError);
}

TEST_CASE("text formats round-trip including the empty sequence") {
  Vocab v = Vocab::synthetic(3);
  std::vector<TokenSeq> xs{{id_of(0), id_of(2)}, {}, {id_of(1)}};
  const std::string text = format_corpus(v, xs);
  CHECK(text == "w0 w2\n\nw1\n");
  CHECK(parse_corpus(v, text) == xs);
  CHECK_THROWS_AS(parse_corpus(v, "w0 w9\n"), ParameterError);

  const auto dir = std::filesystem::temp_directory_path() / "seqdisc_corpus_test";
  std::filesystem::create_directories(dir);
  write_vocab(dir / "vocab.txt", v);
  CHECK(read_vocab(dir / "vocab.txt") == v);
  write_corpus(dir / "c.txt", v, xs);
  CHECK(read_corpus(dir / "c.txt", v) == xs);

  auto src = GroundTruthSource::make(3, 3, 2, 4, 0.5);
  save_source(dir / "s.json", src);
  auto back = load_source(dir / "s.json");
  CHECK(std::equal(src.transition().begin(), src.transition().end(), back.transition().begin()));
  CHECK(back.order() == 2);
  std::filesystem::remove_all(dir);
}

TEST_CASE("derived seeds are stable and label-sensitive") {
  CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
  CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
  CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
  Rng r(1);
  for (int i = 0; i < 1000; ++i) {
    const double u = r.uniform_open();
    CHECK((u > 0.0 && u < 1.0));
  }
}

}
