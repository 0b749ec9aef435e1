#include "seqdisc/models/lm.hpp"

#include <algorithm>
#include <cmath>

#include "seqdisc/error.hpp"
#include "seqdisc/nnet/train.hpp"

namespace seqdisc::models {

namespace {

constexpr std::size_t kSampleChunk = 1024;

std::vector<double> row_values(const nn::Tensor& t, std::size_t r) {
  return std::vector<double>(t.row(r), t.row(r) + t.cols());
}

}  // namespace

void LmConfig::validate() const {
  if (embed_dim == 0 || hidden == 0) throw ParameterError("lm sizes must be positive");
}

nlohmann::json LmConfig::to_json() const { return {{"embed_dim", embed_dim}, {"hidden", hidden}}; }

LmConfig LmConfig::from_json(const nlohmann::json& doc) {
  LmConfig c;
  c.embed_dim = doc.at("embed_dim").get<std::size_t>();
  c.hidden = doc.at("hidden").get<std::size_t>();
  c.validate();
  return c;
}

AutoregressiveLM::AutoregressiveLM(corpus::Vocab vocab, int max_length, LmConfig config, std::uint64_t seed)
    : vocab_(std::move(vocab)), max_length_(max_length), config_(config) {
  config_.validate();
  if (max_length_ < 1) throw ParameterError("lm max_length must be >= 1");
  Rng rng(seed);
  const std::size_t v = static_cast<std::size_t>(vocab_.content_size());
  embed_ = nn::Embedding(params_, "lm.embed", v + 1, config_.embed_dim, rng);
  cell_ = nn::GruCell(params_, "lm.gru", config_.embed_dim, config_.hidden, rng);
  // Zero head: the untrained model is uniform over the V + 1 symbols.
  head_ = nn::Dense(params_, "lm.head", config_.hidden, v + 1, rng, nn::Init::kZero);
}

nn::Var AutoregressiveLM::h0(nn::Graph& g, std::size_t batch) const {
  return step(g, g.constant(nn::Tensor::matrix(batch, config_.hidden)), std::vector<int>(batch, 0));
}

nn::Var AutoregressiveLM::step(nn::Graph& g, nn::Var h, std::vector<int> rows) const {
  return cell_.forward(g, params_, embed_.lookup(g, params_, std::move(rows)), h);
}

nn::Var AutoregressiveLM::logits(nn::Graph& g, nn::Var h) const { return head_.forward(g, params_, h); }

corpus::DecodeState AutoregressiveLM::initial_state() const {
  nn::Graph g;
  corpus::DecodeState s;
  s.hidden = row_values(g.value(h0(g, 1)), 0);
  return s;
}

void AutoregressiveLM::next_log_probs(const corpus::DecodeState& state, std::span<double> out) const {
  if (out.size() != num_outputs()) throw ParameterError("next_log_probs: output span has wrong size");
  nn::Graph g;
  nn::Var h = g.constant(nn::Tensor({1, config_.hidden}, state.hidden));
  const nn::Tensor& lp = g.value(g.log_softmax(logits(g, h)));
  std::copy_n(lp.row(0), out.size(), out.begin());
}

void AutoregressiveLM::advance(corpus::DecodeState& state, int symbol) const {
  if (symbol < 0 || symbol >= vocab_.content_size()) throw ParameterError("advance: not a content symbol");
  nn::Graph g;
  nn::Var h = g.constant(nn::Tensor({1, config_.hidden}, state.hidden));
  state.hidden = row_values(g.value(step(g, h, {symbol + 1})), 0);
  ++state.length;
}

std::vector<corpus::TokenSeq> AutoregressiveLM::sample(std::size_t n, std::uint64_t seed, double temperature) const {
  if (n == 0) throw ParameterError("sample size must be >= 1");
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
  Rng rng(seed);
  const std::size_t v = num_outputs() - 1;
  std::vector<corpus::TokenSeq> out(n);
  std::vector<double> w(v + 1);
  for (std::size_t start = 0; start < n; start += kSampleChunk) {
    const std::size_t count = std::min(kSampleChunk, n - start);
    std::vector<std::size_t> active(count);
    for (std::size_t i = 0; i < count; ++i) active[i] = start + i;
    nn::Tensor h;
    {
      nn::Graph g;
      h = g.value(h0(g, count));
    }
    for (int t = 0; t < max_length_ && !active.empty(); ++t) {
      nn::Graph g;
      nn::Var hv = g.constant(h);
      const nn::Tensor& lp = g.value(g.log_softmax(logits(g, hv)));
      std::vector<std::size_t> keep_rows;
      std::vector<std::size_t> next_active;
      std::vector<int> inputs;
      for (std::size_t r = 0; r < active.size(); ++r) {
        const double* row = lp.row(r);
        const double top = *std::max_element(row, row + v + 1);
        for (std::size_t i = 0; i <= v; ++i) w[i] = std::exp((row[i] - top) / temperature);
        const std::size_t sym = rng.categorical(w);
        if (sym == v) continue;
        out[active[r]].push_back(corpus::id_of(static_cast<int>(sym)));
        keep_rows.push_back(r);
        next_active.push_back(active[r]);
        inputs.push_back(static_cast<int>(sym) + 1);
      }
      if (next_active.empty() || t + 1 == max_length_) break;
      nn::Tensor kept = nn::Tensor::matrix(keep_rows.size(), config_.hidden);
      for (std::size_t i = 0; i < keep_rows.size(); ++i) std::copy_n(h.row(keep_rows[i]), config_.hidden, kept.row(i));
      nn::Var hn = step(g, g.constant(std::move(kept)), std::move(inputs));
      h = g.value(hn);
      active = std::move(next_active);
    }
  }
  return out;
}

int AutoregressiveLM::num_tokens(const corpus::TokenSeq& x) const {
  const int len = static_cast<int>(x.size());
  return len < max_length_ ? len + 1 : len;
}

nn::Var AutoregressiveLM::batch_nll(nn::Graph& g, const std::vector<corpus::TokenSeq>& batch,
                                    std::vector<double> weights) const {
  if (batch.empty()) throw ParameterError("batch_nll: empty batch");
  if (weights.empty()) weights.assign(batch.size(), 1.0);
  if (weights.size() != batch.size()) throw ParameterError("batch_nll: weights/batch length mismatch");
  const std::size_t b_count = batch.size();
  const int eos = static_cast<int>(num_outputs()) - 1;
  std::size_t steps = 0;
  for (const auto& x : batch) {
    check_sequence(x);
    steps = std::max(steps, static_cast<std::size_t>(num_tokens(x)));
  }
  // Step t consumes input t (BOS, then x_1 ...) and predicts symbol t.
  std::vector<int> inputs(steps * b_count, 0);
  std::vector<int> targets(steps * b_count, -1);
  std::vector<double> row_weights(steps * b_count, 0.0);
  for (std::size_t b = 0; b < b_count; ++b) {
    const auto& x = batch[b];
    const std::size_t len = x.size();
    for (std::size_t t = 0; t < steps; ++t) {
      const std::size_t r = t * b_count + b;
      if (t >= 1 && t - 1 < len) inputs[r] = corpus::symbol_of(x[t - 1]) + 1;
      if (t < len) {
        targets[r] = corpus::symbol_of(x[t]);
      } else if (t == len && static_cast<int>(len) < max_length_) {
        targets[r] = eos;
      }
      if (targets[r] >= 0) row_weights[r] = weights[b];
    }
  }
  nn::Var proj = cell_.project_input(g, params_, embed_.lookup(g, params_, std::move(inputs)));
  nn::Var h = g.constant(nn::Tensor::matrix(b_count, config_.hidden));
  std::vector<nn::Var> hs;
  hs.reserve(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    h = cell_.step(g, params_, g.slice_rows(proj, t * b_count, (t + 1) * b_count), h);
    hs.push_back(h);
  }
  nn::Var all = hs.size() == 1 ? hs[0] : g.concat_rows(hs);
  return g.nll(logits(g, all), std::move(targets), std::move(row_weights));
}

nn::Var AutoregressiveLM::mean_token_nll(nn::Graph& g, const std::vector<corpus::TokenSeq>& batch) const {
  double tokens = 0.0;
  for (const auto& x : batch) tokens += num_tokens(x);
  return g.scale(batch_nll(g, batch), 1.0 / tokens);
}

RelaxedRollout AutoregressiveLM::relaxed_rollout(nn::Graph& g, std::size_t batch, double temperature,
                                                 Rng& rng) const {
  if (batch == 0) throw ParameterError("relaxed_rollout: empty batch");
  if (!(temperature > 0.0)) throw ParameterError("temperature must be positive");
  const std::size_t v = num_outputs() - 1;
  RelaxedRollout out;
  out.sequences.resize(batch);
  std::vector<bool> done(batch, false);
  std::vector<nn::Var> rows;
  nn::Var h = h0(g, batch);
  for (int t = 0; t < max_length_; ++t) {
    nn::Tensor noise = nn::Tensor::matrix(batch, v + 1);
    for (double& e : noise.values()) e = rng.gumbel();
    nn::Var perturbed = g.add(logits(g, h), g.constant(noise));
    rows.push_back(g.softmax(g.scale(perturbed, 1.0 / temperature)));
    const nn::Tensor& pv = g.value(perturbed);
    std::vector<int> inputs(batch, 0);
    bool any = false;
    for (std::size_t b = 0; b < batch; ++b) {
      if (done[b]) continue;
      const double* row = pv.row(b);
      const auto sym = static_cast<std::size_t>(std::max_element(row, row + v + 1) - row);
      if (sym == v) {
        done[b] = true;
        continue;
      }
      out.sequences[b].push_back(corpus::id_of(static_cast<int>(sym)));
      inputs[b] = static_cast<int>(sym) + 1;
      any = true;
    }
    if (!any || t + 1 == max_length_) break;
    h = step(g, h, std::move(inputs));
  }
  out.steps = rows.size();
  out.rows = rows.size() == 1 ? rows[0] : g.concat_rows(rows);
  return out;
}

nlohmann::json AutoregressiveLM::to_json() const {
  return {{"kind", "seqdisc-lm"},
          {"vocab_hash", vocab_.hash()},
          {"vocab", vocab_.content_tokens()},
          {"max_length", max_length_},
          {"config", config_.to_json()},
          {"params", nn::params_to_json(params_, true)}};
}

AutoregressiveLM AutoregressiveLM::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("kind").get<std::string>() != "seqdisc-lm") throw ParameterError("not an lm checkpoint");
    corpus::Vocab vocab(doc.at("vocab").get<std::vector<std::string>>());
    if (vocab.hash() != doc.at("vocab_hash").get<std::uint64_t>()) {
      throw ParameterError("lm checkpoint vocab hash mismatch");
    }
    AutoregressiveLM lm(std::move(vocab), doc.at("max_length").get<int>(), LmConfig::from_json(doc.at("config")), 1);
    nn::params_from_json(lm.params_, doc.at("params"));
    return lm;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed lm checkpoint: ") + e.what());
  }
}

double perplexity(const corpus::SequenceDensity& model, const std::vector<corpus::TokenSeq>& data) {
  if (data.empty()) throw ParameterError("perplexity: empty data");
  double nll = 0.0;
  double tokens = 0.0;
  for (const auto& x : data) {
    nll -= model.log_prob(x);
    tokens += static_cast<double>(x.size() < static_cast<std::size_t>(model.max_length()) ? x.size() + 1 : x.size());
  }
  if (tokens == 0.0) throw ParameterError("perplexity: no predicted tokens");
  return std::exp(nll / tokens);
}

}  // namespace seqdisc::models
