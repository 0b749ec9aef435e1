#include <algorithm>
#include <cmath>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::corpus {

SplitCorpus split(std::span<const TokenSeq> real, std::span<const TokenSeq> generated, double heldout_fraction,
                  std::uint64_t seed) {
  if (real.empty() || generated.empty()) throw ParameterError("split: both sides must be non-empty");
  if (!(heldout_fraction > 0.0 && heldout_fraction < 1.0)) {
    throw ParameterError("split: held-out fraction must be in (0, 1)");
  }
  const std::size_t m = std::min(real.size(), generated.size());
  const auto held = static_cast<std::size_t>(std::llround(static_cast<double>(m) * heldout_fraction));
  const std::size_t dev = held / 2;
  const std::size_t test = held - dev;
  if (dev == 0 || test == 0 || held >= m) {
    throw ParameterError("split: " + std::to_string(m) + " sequences per side is too few for non-empty splits");
  }

  std::vector<TokenSeq> a(real.begin(), real.begin() + static_cast<std::ptrdiff_t>(m));
  std::vector<TokenSeq> b(generated.begin(), generated.begin() + static_cast<std::ptrdiff_t>(m));
  Rng rng_a(derive_seed(seed, "split/a"));
  Rng rng_b(derive_seed(seed, "split/b"));
  rng_a.shuffle(a);
  rng_b.shuffle(b);

  const std::size_t train = m - held;
  auto cut = [&](std::vector<TokenSeq>& side, std::vector<TokenSeq>& tr, std::vector<TokenSeq>& dv,
                 std::vector<TokenSeq>& ts) {
    auto it = side.begin();
    tr.assign(std::make_move_iterator(it), std::make_move_iterator(it + static_cast<std::ptrdiff_t>(train)));
    it += static_cast<std::ptrdiff_t>(train);
    dv.assign(std::make_move_iterator(it), std::make_move_iterator(it + static_cast<std::ptrdiff_t>(dev)));
    it += static_cast<std::ptrdiff_t>(dev);
    ts.assign(std::make_move_iterator(it), std::make_move_iterator(side.end()));
  };
  SplitCorpus out;
  cut(a, out.train_a, out.dev_a, out.test_a);
  cut(b, out.train_b, out.dev_b, out.test_b);
  return out;
}

}  // namespace seqdisc::corpus
