#pragma once

// Binary sequence classifier D(x) in (0, 1); label 1 = real.
// Input frame per sequence: [BOS, x_1 .. x_n, EOS, PAD ...] of fixed length.

#include <cstdint>
#include <vector>

#include "json.hpp"
#include "seqdisc/corpus.hpp"
#include "seqdisc/nnet/graph.hpp"
#include "seqdisc/nnet/layers.hpp"

namespace seqdisc::models {

enum class Encoder { kConv, kGru };

struct DiscConfig {
  Encoder encoder = Encoder::kConv;
  std::size_t embed_dim = 16;
  /// Filters per convolution width.
  std::size_t filters = 16;
  std::vector<std::size_t> widths = {2, 3};
  /// GRU encoder state size.
  std::size_t hidden = 16;

  void validate() const;
  nlohmann::json to_json() const;
  static DiscConfig from_json(const nlohmann::json& doc);
};

class SeqDiscriminator {
 public:
  SeqDiscriminator(corpus::Vocab vocab, int max_length, DiscConfig config, std::uint64_t seed);

  const corpus::Vocab& vocab() const { return vocab_; }
  int max_length() const { return max_length_; }
  const DiscConfig& config() const { return config_; }
  nn::ParamStore& params() { return params_; }
  const nn::ParamStore& params() const { return params_; }

  /// Rows per sequence frame.
  std::size_t frame_length() const { return frame_; }
  /// Row of position `pos` of sequence `b` in a frame block of `batch`
  /// sequences (layout depends on the encoder).
  std::size_t frame_row(std::size_t b, std::size_t pos, std::size_t batch) const;
  /// Vocab ids of every frame row for the batch.
  std::vector<int> frame_ids(const std::vector<corpus::TokenSeq>& batch) const;

  /// Pre-sigmoid scores [batch x 1].
  nn::Var logits(nn::Graph& g, const std::vector<corpus::TokenSeq>& batch) const;
  /// Same, from soft rows over the vocab ([batch * frame_length, vocab size])
  /// mixed through the embedding table.
  nn::Var logits_from_rows(nn::Graph& g, nn::Var rows, std::size_t batch) const;

  double score(const corpus::TokenSeq& x) const;
  std::vector<double> score_batch(const std::vector<corpus::TokenSeq>& xs) const;

  std::uint64_t hash() const { return params_.hash(); }
  nlohmann::json to_json() const;
  static SeqDiscriminator from_json(const nlohmann::json& doc);

 private:
  nn::Var encode(nn::Graph& g, nn::Var x, std::size_t batch) const;

  corpus::Vocab vocab_;
  int max_length_;
  DiscConfig config_;
  std::size_t frame_ = 0;
  nn::ParamStore params_;
  nn::Embedding embed_;
  std::vector<nn::TemporalConv> convs_;
  nn::GruCell cell_;
  nn::Dense scorer_;
};

}  // namespace seqdisc::models
