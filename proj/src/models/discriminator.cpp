#include "seqdisc/models/discriminator.hpp"

#include <algorithm>
#include <cmath>

#include "seqdisc/error.hpp"
#include "seqdisc/nnet/train.hpp"

namespace seqdisc::models {

namespace {

constexpr std::size_t kScoreChunk = 512;

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

void DiscConfig::validate() const {
  if (embed_dim == 0) throw ParameterError("disc embed_dim must be positive");
  if (encoder == Encoder::kConv) {
    if (filters == 0 || widths.empty()) throw ParameterError("conv encoder needs filters and widths");
    for (std::size_t w : widths) {
      if (w == 0) throw ParameterError("conv width must be positive");
    }
  } else if (hidden == 0) {
    throw ParameterError("gru encoder needs a positive hidden size");
  }
}

nlohmann::json DiscConfig::to_json() const {
  return {{"encoder", encoder == Encoder::kConv ? "conv" : "gru"},
          {"embed_dim", embed_dim},
          {"filters", filters},
          {"widths", widths},
          {"hidden", hidden}};
}

DiscConfig DiscConfig::from_json(const nlohmann::json& doc) {
  DiscConfig c;
  const auto enc = doc.at("encoder").get<std::string>();
  if (enc == "conv") {
    c.encoder = Encoder::kConv;
  } else if (enc == "gru") {
    c.encoder = Encoder::kGru;
  } else {
    throw ParameterError("unknown encoder '" + enc + "'");
  }
  c.embed_dim = doc.at("embed_dim").get<std::size_t>();
  c.filters = doc.at("filters").get<std::size_t>();
  c.widths = doc.at("widths").get<std::vector<std::size_t>>();
  c.hidden = doc.at("hidden").get<std::size_t>();
  c.validate();
  return c;
}

SeqDiscriminator::SeqDiscriminator(corpus::Vocab vocab, int max_length, DiscConfig config, std::uint64_t seed)
    : vocab_(std::move(vocab)), max_length_(max_length), config_(std::move(config)) {
  config_.validate();
  if (max_length_ < 1) throw ParameterError("disc max_length must be >= 1");
  frame_ = static_cast<std::size_t>(max_length_) + 2;
  if (config_.encoder == Encoder::kConv) {
    frame_ = std::max(frame_, *std::max_element(config_.widths.begin(), config_.widths.end()));
  }
  Rng rng(seed);
  embed_ = nn::Embedding(params_, "disc.embed", static_cast<std::size_t>(vocab_.size()), config_.embed_dim, rng);
  std::size_t features = 0;
  if (config_.encoder == Encoder::kConv) {
    for (std::size_t w : config_.widths) {
      convs_.emplace_back(params_, "disc.conv" + std::to_string(w), config_.embed_dim, w, config_.filters, rng);
      features += config_.filters;
    }
  } else {
    cell_ = nn::GruCell(params_, "disc.gru", config_.embed_dim, config_.hidden, rng);
    features = config_.hidden;
  }
  // Zero scorer: every input scores exactly 0.5 before training.
  scorer_ = nn::Dense(params_, "disc.score", features, 1, rng, nn::Init::kZero);
}

std::size_t SeqDiscriminator::frame_row(std::size_t b, std::size_t pos, std::size_t batch) const {
  return config_.encoder == Encoder::kConv ? b * frame_ + pos : pos * batch + b;
}

std::vector<int> SeqDiscriminator::frame_ids(const std::vector<corpus::TokenSeq>& batch) const {
  std::vector<int> ids(batch.size() * frame_, corpus::kPad);
  for (std::size_t b = 0; b < batch.size(); ++b) {
    const auto& x = batch[b];
    if (static_cast<int>(x.size()) > max_length_) throw ParameterError("sequence longer than max_length");
    ids[frame_row(b, 0, batch.size())] = corpus::kBos;
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!vocab_.is_content(x[i])) throw ParameterError("non-content token id " + std::to_string(x[i]));
      ids[frame_row(b, i + 1, batch.size())] = x[i];
    }
    ids[frame_row(b, x.size() + 1, batch.size())] = corpus::kEos;
  }
  return ids;
}

nn::Var SeqDiscriminator::encode(nn::Graph& g, nn::Var x, std::size_t batch) const {
  nn::Var features;
  if (config_.encoder == Encoder::kConv) {
    std::vector<nn::Var> pooled;
    for (const auto& conv : convs_) {
      pooled.push_back(g.max_pool(g.relu(conv.forward(g, params_, x, batch, frame_)), batch));
    }
    features = pooled.size() == 1 ? pooled[0] : g.concat_cols(pooled);
  } else {
    nn::Var proj = cell_.project_input(g, params_, x);
    nn::Var h = g.constant(nn::Tensor::matrix(batch, cell_.hidden()));
    nn::Var total;
    for (std::size_t t = 0; t < frame_; ++t) {
      h = cell_.step(g, params_, g.slice_rows(proj, t * batch, (t + 1) * batch), h);
      total = t == 0 ? h : g.add(total, h);
    }
    features = g.scale(total, 1.0 / static_cast<double>(frame_));
  }
  return scorer_.forward(g, params_, features);
}

nn::Var SeqDiscriminator::logits(nn::Graph& g, const std::vector<corpus::TokenSeq>& batch) const {
  if (batch.empty()) throw ParameterError("discriminator: empty batch");
  return encode(g, embed_.lookup(g, params_, frame_ids(batch)), batch.size());
}

nn::Var SeqDiscriminator::logits_from_rows(nn::Graph& g, nn::Var rows, std::size_t batch) const {
  const nn::Tensor& r = g.value(rows);
  if (r.rows() != batch * frame_ || r.cols() != static_cast<std::size_t>(vocab_.size())) {
    throw StructuralError("discriminator rows must be [batch * frame_length, vocab size]");
  }
  return encode(g, embed_.mix(g, params_, rows), batch);
}

double SeqDiscriminator::score(const corpus::TokenSeq& x) const { return score_batch({x})[0]; }

std::vector<double> SeqDiscriminator::score_batch(const std::vector<corpus::TokenSeq>& xs) const {
  std::vector<double> out;
  out.reserve(xs.size());
  for (std::size_t start = 0; start < xs.size(); start += kScoreChunk) {
    const std::size_t end = std::min(xs.size(), start + kScoreChunk);
    std::vector<corpus::TokenSeq> chunk(xs.begin() + static_cast<std::ptrdiff_t>(start),
                                        xs.begin() + static_cast<std::ptrdiff_t>(end));
    nn::Graph g;
    const nn::Tensor& z = g.value(logits(g, chunk));
    for (std::size_t i = 0; i < chunk.size(); ++i) out.push_back(sigmoid(z.at(i, 0)));
  }
  return out;
}

nlohmann::json SeqDiscriminator::to_json() const {
  return {{"kind", "seqdisc-disc"},
          {"vocab_hash", vocab_.hash()},
          {"vocab", vocab_.content_tokens()},
          {"max_length", max_length_},
          {"config", config_.to_json()},
          {"params", nn::params_to_json(params_, true)}};
}

SeqDiscriminator SeqDiscriminator::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "seqdisc-disc") throw ParameterError("not a discriminator checkpoint");
    corpus::Vocab vocab(doc.at("vocab").get<std::vector<std::string>>());
    if (vocab.hash() != doc.at("vocab_hash").get<std::uint64_t>()) {
      throw ParameterError("discriminator checkpoint vocab hash mismatch");
    }
    SeqDiscriminator d(std::move(vocab), doc.at("max_length").get<int>(), DiscConfig::from_json(doc.at("config")), 1);
    nn::params_from_json(d.params_, doc.at("params"));
    return d;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed discriminator checkpoint: ") + e.what());
  }
}

}  // namespace seqdisc::models
