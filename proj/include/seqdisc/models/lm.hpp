#pragma once

// GRU language model over content symbols plus EOS with exact sequence
// likelihoods. Symbols follow corpus::symbol_of: content s in [0, V), EOS = V.
// Embedding rows: 0 = BOS, s + 1 = content symbol s.

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "seqdisc/corpus.hpp"
#include "seqdisc/nnet/graph.hpp"
#include "seqdisc/nnet/layers.hpp"

namespace seqdisc::models {

struct LmConfig {
  std::size_t embed_dim = 16;
  std::size_t hidden = 32;

  void validate() const;
  nlohmann::json to_json() const;
  static LmConfig from_json(const nlohmann::json& doc);
};

/// A batch of Gumbel-softmax rollouts recorded on a graph.
struct RelaxedRollout {
  /// Hard sequences (argmax of the perturbed logits at each step).
  std::vector<corpus::TokenSeq> sequences;
  /// Relaxed rows [steps * batch, V + 1], time-major (row t * batch + b).
  nn::Var rows;
  std::size_t steps = 0;
};

class AutoregressiveLM final : public corpus::SequenceDensity {
 public:
  AutoregressiveLM(corpus::Vocab vocab, int max_length, LmConfig config, std::uint64_t seed);

  const corpus::Vocab& vocab() const override { return vocab_; }
  int max_length() const override { return max_length_; }
  const LmConfig& config() const { return config_; }
  std::size_t num_outputs() const { return static_cast<std::size_t>(vocab_.content_size()) + 1; }

  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  corpus::DecodeState initial_state() const override;
  void next_log_probs(const corpus::DecodeState& state, std::span<double> out) const override;
  void advance(corpus::DecodeState& state, int symbol) const override;

  /// Batched ancestral sampling; same distribution as sample_one.
  std::vector<corpus::TokenSeq> sample(std::size_t n, std::uint64_t seed, double temperature = 1.0) const override;

  /// sum_b weights[b] * (-log p(x_b)) including the EOS step; `weights`
  /// empty means 1 for every sequence.
  nn::Var batch_nll(nn::Graph& g, const std::vector<corpus::TokenSeq>& batch,
                    std::vector<double> weights = {}) const;
  /// Same objective divided by the number of predicted tokens.
  nn::Var mean_token_nll(nn::Graph& g, const std::vector<corpus::TokenSeq>& batch) const;

  /// Per-step: hard token = argmax(logits + gumbel), relaxed row =
  /// softmax((logits + gumbel) / temperature). Gumbel noise comes from `rng`.
  RelaxedRollout relaxed_rollout(nn::Graph& g, std::size_t batch, double temperature, Rng& rng) const;

  /// Number of predicted tokens of x (content tokens plus EOS unless forced).
  int num_tokens(const corpus::TokenSeq& x) const;

  std::uint64_t hash() const { return params_.hash(); }
  nlohmann::json to_json() const;
  static AutoregressiveLM from_json(const nlohmann::json& doc);

 private:
  nn::Var h0(nn::Graph& g, std::size_t batch) const;
  nn::Var step(nn::Graph& g, nn::Var h, std::vector<int> rows) const;
  nn::Var logits(nn::Graph& g, nn::Var h) const;

  corpus::Vocab vocab_;
  int max_length_;
  LmConfig config_;
  nn::ParamStore params_;
  nn::Embedding embed_;
  nn::GruCell cell_;
  nn::Dense head_;
};

/// exp(total NLL / total predicted tokens).
double perplexity(const corpus::SequenceDensity& model, const std::vector<corpus::TokenSeq>& data);

}  // namespace seqdisc::models
