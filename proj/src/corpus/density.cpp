#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::corpus {

void SequenceDensity::check_sequence(const TokenSeq& x) const {
  if (static_cast<int>(x.size()) > max_length()) {
    throw ParameterError("sequence longer than max_length " + std::to_string(max_length()));
  }
  for (int id : x) {
    if (!vocab().is_content(id)) throw ParameterError("non-content token id " + std::to_string(id));
  }
}

double SequenceDensity::log_prob(const TokenSeq& x) const {
  check_sequence(x);
  const int v = content_size();
  std::vector<double> lp(v + 1);
  DecodeState state = initial_state();
  double total = 0.0;
  for (int id : x) {
    next_log_probs(state, lp);
    total += lp[symbol_of(id)];
    advance(state, symbol_of(id));
  }
  if (state.length < max_length()) {
    next_log_probs(state, lp);
    total += lp[v];
  }
  return total;
}

double SequenceDensity::prob(const TokenSeq& x) const { return std::exp(log_prob(x)); }

TokenSeq SequenceDensity::sample_one(Rng& rng, double temperature) const {
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
  const int v = content_size();
  std::vector<double> lp(v + 1), w(v + 1);
  DecodeState state = initial_state();
  TokenSeq out;
  while (state.length < max_length()) {
    next_log_probs(state, lp);
    const double top = *std::max_element(lp.begin(), lp.end());
    for (int i = 0; i <= v; ++i) w[i] = std::exp((lp[i] - top) / temperature);
    const int sym = static_cast<int>(rng.categorical(w));
    if (sym == v) break;
    out.push_back(id_of(sym));
    advance(state, sym);
  }
  return out;
}

std::vector<TokenSeq> SequenceDensity::sample(std::size_t n, std::uint64_t seed, double temperature) const {
  if (n == 0) throw ParameterError("sample size must be >= 1");
  Rng rng(seed);
  std::vector<TokenSeq> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(sample_one(rng, temperature));
  return out;
}

TokenSeq SequenceDensity::greedy() const {
  const int v = content_size();
  std::vector<double> lp(v + 1);
  DecodeState state = initial_state();
  TokenSeq out;
  while (state.length < max_length()) {
    next_log_probs(state, lp);
    const int sym = static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
    if (sym == v) break;
    out.push_back(id_of(sym));
    advance(state, sym);
  }
  return out;
}

std::size_t support_size(int content_size, int max_length) {
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t total = 0;
  std::size_t level = 1;
  for (int l = 0; l <= max_length; ++l) {
    if (total > kMax - level) return kMax;
    total += level;
    if (l < max_length) {
      if (level > kMax / static_cast<std::size_t>(content_size)) return kMax;
      level *= static_cast<std::size_t>(content_size);
    }
  }
  return total;
}

namespace {

void dfs(const SequenceDensity& density, DecodeState& state, TokenSeq& prefix, double prefix_lp,
         const std::function<void(const TokenSeq&, double)>& visit) {
  const int v = density.content_size();
  if (state.length >= density.max_length()) {
    visit(prefix, prefix_lp);
    return;
  }
  std::vector<double> lp(v + 1);
  density.next_log_probs(state, lp);
  visit(prefix, prefix_lp + lp[v]);
  for (int s = 0; s < v; ++s) {
    DecodeState child = state;
    density.advance(child, s);
    prefix.push_back(id_of(s));
    dfs(density, child, prefix, prefix_lp + lp[s], visit);
    prefix.pop_back();
  }
}

}  // namespace

void enumerate_support(const SequenceDensity& density,
                       const std::function<void(const TokenSeq&, double)>& visit, std::size_t cap) {
  const std::size_t n = support_size(density.content_size(), density.max_length());
  if (n > cap) {
    throw CapacityError("support of " + std::to_string(n) + " sequences exceeds enumeration cap " +
                        std::to_string(cap));
  }
  DecodeState state = density.initial_state();
  TokenSeq prefix;
  dfs(density, state, prefix, 0.0, visit);
}

}  // namespace seqdisc::corpus
