#include "seqdisc/pipeline/config.hpp"

#include <set>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::pipeline {

namespace {

using nlohmann::json;

// Reads fields from one object and rejects whatever was not read.
class Block {
 public:
  Block(const json& doc, std::string path) : doc_(doc), path_(std::move(path)) {
    if (!doc_.is_object()) throw ParameterError("config: '" + path_ + "' must be an object");
  }

  template <class T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!doc_.contains(key)) return;
    try {
      out = doc_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ParameterError("config: '" + path_ + "." + key + "' has the wrong type");
    }
  }

  bool has(const char* key) {
    seen_.insert(key);
    return doc_.contains(key);
  }
  const json& at(const char* key) const { return doc_.at(key); }
  std::string path(const char* key) const { return path_ + "." + key; }

  void finish() const {
    for (const auto& item : doc_.items()) {
      if (!seen_.count(item.key())) throw ParameterError("config: unknown key '" + path_ + "." + item.key() + "'");
    }
  }

 private:
  const json& doc_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_train(Block& parent, const char* key, nn::TrainConfig& tc) {
  if (!parent.has(key)) return;
  Block b(parent.at(key), parent.path(key));
  b.get("learning_rate", tc.learning_rate);
  b.get("batch_size", tc.batch_size);
  b.get("max_epochs", tc.max_epochs);
  b.get("max_steps", tc.max_steps);
  b.get("patience", tc.patience);
  b.finish();
}

json train_json(const nn::TrainConfig& tc) {
  return {{"learning_rate", tc.learning_rate},
          {"batch_size", tc.batch_size},
          {"max_epochs", tc.max_epochs},
          {"max_steps", tc.max_steps},
          {"patience", tc.patience}};
}

}  // namespace

void RunConfig::validate() const {
  if (seed == 0) throw ParameterError("config: seed must be non-zero");
  if (source.vocab_size < 2 || source.order < 1 || source.max_length < 1 || !(source.concentration > 0.0)) {
    throw ParameterError("config: invalid source block");
  }
  if (source.corpus_size < 10) throw ParameterError("config: source.corpus_size must be >= 10");
  if (!(source.heldout_fraction > 0.0 && source.heldout_fraction < 1.0)) {
    throw ParameterError("config: source.heldout_fraction must be in (0, 1)");
  }
  lm.validate();
  lm_train.validate();
  disc.validate();
  disc_train.validate();
  if (disc_options.dev_batch == 0 || !(disc_options.ema_alpha > 0.0 && disc_options.ema_alpha <= 1.0)) {
    throw ParameterError("config: invalid disc dev_batch or ema_alpha");
  }
  if (measure.samples_per_side < 10 || !(measure.heldout_fraction > 0.0 && measure.heldout_fraction < 1.0)) {
    throw ParameterError("config: invalid measure block");
  }
  if (measure.resamples < 200) throw ParameterError("config: measure.resamples must be >= 200");
  if (!(measure.threshold > 0.0 && measure.threshold < 1.0)) throw ParameterError("config: threshold in (0, 1)");
  if (hw.multipliers.empty()) throw ParameterError("config: hw.multipliers is empty");
  for (double m : hw.multipliers) {
    if (!(m > 0.0)) throw ParameterError("config: hw multipliers must be positive");
  }
  hw.finetune.validate();
  gan.round.validate();
}

json RunConfig::to_json() const {
  return {{"seed", seed},
          {"source",
           {{"vocab_size", source.vocab_size},
            {"order", source.order},
            {"max_length", source.max_length},
            {"concentration", source.concentration},
            {"corpus_size", source.corpus_size},
            {"heldout_fraction", source.heldout_fraction}}},
          {"lm", {{"embed_dim", lm.embed_dim}, {"hidden", lm.hidden}, {"train", train_json(lm_train)}}},
          {"disc",
           {{"encoder", disc.encoder == models::Encoder::kConv ? "conv" : "gru"},
            {"embed_dim", disc.embed_dim},
            {"filters", disc.filters},
            {"widths", disc.widths},
            {"hidden", disc.hidden},
            {"dev_batch", disc_options.dev_batch},
            {"ema_alpha", disc_options.ema_alpha},
            {"train", train_json(disc_train)}}},
          {"measure",
           {{"samples_per_side", measure.samples_per_side},
            {"heldout_fraction", measure.heldout_fraction},
            {"resamples", measure.resamples},
            {"threshold", measure.threshold}}},
          {"hw", {{"multipliers", hw.multipliers}, {"finetune", train_json(hw.finetune)}}},
          {"gan",
           {{"rounds", gan.rounds},
            {"g_steps", gan.round.g_steps},
            {"d_steps", gan.round.d_steps},
            {"temperature", gan.round.temperature},
            {"generator", train_json(gan.round.generator)},
            {"discriminator", train_json(gan.round.discriminator)}}},
          {"third_party", {{"sanity_samples", third_party.sanity_samples}}}};
}

RunConfig RunConfig::from_json(const json& doc) {
  RunConfig c;
  Block root(doc, "config");
  root.get("seed", c.seed);
  if (root.has("source")) {
    Block b(root.at("source"), "source");
    b.get("vocab_size", c.source.vocab_size);
    b.get("order", c.source.order);
    b.get("max_length", c.source.max_length);
    b.get("concentration", c.source.concentration);
    b.get("corpus_size", c.source.corpus_size);
    b.get("heldout_fraction", c.source.heldout_fraction);
    b.finish();
  }
  if (root.has("lm")) {
    Block b(root.at("lm"), "lm");
    b.get("embed_dim", c.lm.embed_dim);
    b.get("hidden", c.lm.hidden);
    read_train(b, "train", c.lm_train);
    b.finish();
  }
  if (root.has("disc")) {
    Block b(root.at("disc"), "disc");
    std::string encoder = c.disc.encoder == models::Encoder::kConv ? "conv" : "gru";
    b.get("encoder", encoder);
    if (encoder == "conv") {
      c.disc.encoder = models::Encoder::kConv;
    } else if (encoder == "gru") {
      c.disc.encoder = models::Encoder::kGru;
    } else {
      throw ParameterError("config: disc.encoder must be 'conv' or 'gru'");
    }
    b.get("embed_dim", c.disc.embed_dim);
    b.get("filters", c.disc.filters);
    b.get("widths", c.disc.widths);
    b.get("hidden", c.disc.hidden);
    b.get("dev_batch", c.disc_options.dev_batch);
    b.get("ema_alpha", c.disc_options.ema_alpha);
    read_train(b, "train", c.disc_train);
    b.finish();
  }
  if (root.has("measure")) {
    Block b(root.at("measure"), "measure");
    b.get("samples_per_side", c.measure.samples_per_side);
    b.get("heldout_fraction", c.measure.heldout_fraction);
    b.get("resamples", c.measure.resamples);
    b.get("threshold", c.measure.threshold);
    b.finish();
  }
  if (root.has("hw")) {
    Block b(root.at("hw"), "hw");
    b.get("multipliers", c.hw.multipliers);
    read_train(b, "finetune", c.hw.finetune);
    b.finish();
  }
  if (root.has("gan")) {
    Block b(root.at("gan"), "gan");
    b.get("rounds", c.gan.rounds);
    b.get("g_steps", c.gan.round.g_steps);
    b.get("d_steps", c.gan.round.d_steps);
    b.get("temperature", c.gan.round.temperature);
    read_train(b, "generator", c.gan.round.generator);
    read_train(b, "discriminator", c.gan.round.discriminator);
    b.finish();
  }
  if (root.has("third_party")) {
    Block b(root.at("third_party"), "third_party");
    b.get("sanity_samples", c.third_party.sanity_samples);
    b.finish();
  }
  root.finish();
  c.validate();
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(corpus::read_text(path));
  } catch (const json::parse_error& e) {
    throw ParameterError("config " + path.string() + ": " + e.what());
  }
  return from_json(doc);
}

adversarial::ThirdPartyConfig RunConfig::evaluation(std::string_view phase) const {
  adversarial::ThirdPartyConfig t;
  t.disc = disc;
  t.train = disc_train;
  t.train_options = disc_options;
  t.samples_per_side = measure.samples_per_side;
  t.heldout_fraction = measure.heldout_fraction;
  t.report.threshold = measure.threshold;
  t.report.resamples = measure.resamples;
  t.sanity_samples = third_party.sanity_samples;
  t.seed = phase_seed(phase);
  return t;
}

}  // namespace seqdisc::pipeline
