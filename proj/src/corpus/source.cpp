#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::corpus {

namespace {

constexpr std::size_t kMaxContexts = 1u << 22;
constexpr double kRowTolerance = 1e-12;
// Floor applied to Dirichlet draws so every row keeps EOS (and every other
// symbol) reachable even at small concentrations.
constexpr double kEntryFloor = 1e-6;

std::size_t count_contexts(int content_size, int order) {
  std::size_t n = 1;
  for (int i = 0; i < order; ++i) {
    n *= static_cast<std::size_t>(content_size + 1);
    if (n > kMaxContexts) throw CapacityError("Markov context table too large");
  }
  return n;
}

}  // namespace

GroundTruthSource::GroundTruthSource(Vocab vocab, int order, int max_length, std::vector<double> transition)
    : vocab_(std::move(vocab)), order_(order), max_length_(max_length) {
  if (order_ < 1) throw ParameterError("source order must be >= 1");
  if (max_length_ < 1) throw ParameterError("source max_length must be >= 1");
  const int v = vocab_.content_size();
  num_contexts_ = count_contexts(v, order_);
  const std::size_t width = static_cast<std::size_t>(v) + 1;
  if (transition.size() != num_contexts_ * width) {
    throw ParameterError("transition table has " + std::to_string(transition.size()) + " entries, expected " +
                         std::to_string(num_contexts_ * width));
  }
  for (std::size_t c = 0; c < num_contexts_; ++c) {
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      const double p = transition[c * width + j];
      if (!(p >= 0.0) || !std::isfinite(p)) throw ParameterError("transition entries must be finite and >= 0");
      s += p;
    }
    if (std::abs(s - 1.0) > kRowTolerance) {
      throw ParameterError("transition row " + std::to_string(c) + " sums to " + std::to_string(s));
    }
  }
  transition_ = std::move(transition);
}

GroundTruthSource GroundTruthSource::make(std::uint64_t seed, int vocab_size, int order, int max_length,
                                          double concentration) {
  if (vocab_size < 2) throw ParameterError("make_source: vocab_size must be >= 2 content tokens");
  if (order < 1) throw ParameterError("make_source: order must be >= 1");
  if (max_length < 1) throw ParameterError("make_source: max_length must be >= 1");
  if (!(concentration > 0.0) || !std::isfinite(concentration)) {
    throw ParameterError("make_source: concentration must be positive");
  }
  const std::size_t contexts = count_contexts(vocab_size, order);
  const std::size_t width = static_cast<std::size_t>(vocab_size) + 1;
  Rng rng(seed);
  std::gamma_distribution<double> gamma(concentration, 1.0);
  std::vector<double> table(contexts * width);
  for (std::size_t c = 0; c < contexts; ++c) {
    double* row = table.data() + c * width;
    double s = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      row[j] = gamma(rng.engine());
      s += row[j];
    }
    double floored = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      row[j] = s > 0.0 ? std::max(row[j] / s, kEntryFloor) : 1.0;
      floored += row[j];
    }
    for (std::size_t j = 0; j < width; ++j) row[j] /= floored;
  }
  return GroundTruthSource(Vocab::synthetic(vocab_size), order, max_length, std::move(table));
}

std::span<const double> GroundTruthSource::row(std::size_t context) const {
  if (context >= num_contexts_) throw ParameterError("context index out of range");
  const std::size_t width = static_cast<std::size_t>(content_size()) + 1;
  return std::span<const double>(transition_).subspan(context * width, width);
}

std::size_t GroundTruthSource::context_index(std::span<const int> context) const {
  // context holds order_ entries: 0 = BOS padding, s + 1 = content symbol s
  const std::size_t base = static_cast<std::size_t>(content_size()) + 1;
  std::size_t idx = 0;
  for (int c : context) idx = idx * base + static_cast<std::size_t>(c);
  return idx;
}

DecodeState GroundTruthSource::initial_state() const {
  DecodeState s;
  s.context.assign(order_, 0);
  return s;
}

void GroundTruthSource::next_log_probs(const DecodeState& state, std::span<double> out) const {
  const auto r = row(context_index(state.context));
  for (std::size_t j = 0; j < r.size(); ++j) out[j] = std::log(r[j]);
}

void GroundTruthSource::advance(DecodeState& state, int symbol) const {
  std::rotate(state.context.begin(), state.context.begin() + 1, state.context.end());
  state.context.back() = symbol + 1;
  ++state.length;
}

double GroundTruthSource::exact_prob(const TokenSeq& x) const {
  check_sequence(x);
  const int v = content_size();
  DecodeState state = initial_state();
  double p = 1.0;
  for (int id : x) {
    p *= row(context_index(state.context))[symbol_of(id)];
    advance(state, symbol_of(id));
  }
  if (state.length < max_length_) p *= row(context_index(state.context))[v];
  return p;
}

double GroundTruthSource::log_prob(const TokenSeq& x) const { return std::log(exact_prob(x)); }

nlohmann::json GroundTruthSource::to_json() const {
  nlohmann::json doc;
  doc["format"] = "seqdisc-source";
  doc["version"] = 1;
  doc["order"] = order_;
  doc["max_length"] = max_length_;
  doc["vocab"] = std::vector<std::string>(vocab_.content_tokens().begin(), vocab_.content_tokens().end());
  doc["transition"] = transition_;
  return doc;
}

GroundTruthSource GroundTruthSource::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "seqdisc-source") throw ParameterError("not a source document");
    return GroundTruthSource(Vocab(doc.at("vocab").get<std::vector<std::string>>()), doc.at("order").get<int>(),
                             doc.at("max_length").get<int>(), doc.at("transition").get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed source document: ") + e.what());
  }
}

}  // namespace seqdisc::corpus
