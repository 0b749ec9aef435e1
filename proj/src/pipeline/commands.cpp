#include "seqdisc/pipeline/commands.hpp"

#include <cmath>
#include <cstdio>

#include "phase.hpp"
#include "seqdisc/adversarial.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::pipeline {

namespace fs = std::filesystem;
using detail::dump;
using detail::Phase;

namespace detail {

Phase::Phase(const CommandContext& ctx, std::string name)
    : ctx_(ctx),
      lock_(ctx.out),
      manifest_(Manifest::open(ctx.out)),
      name_(std::move(name)),
      start_(std::chrono::steady_clock::now()) {
  ctx_.config.validate();
}

void Phase::guard(const std::vector<std::string>& outputs) const {
  if (ctx_.force) return;
  for (const auto& rel : outputs) {
    if (fs::exists(path(rel))) {
      throw ParameterError("refusing to overwrite " + path(rel).string() + " (pass --force)");
    }
  }
}

void Phase::require(const std::string& relative, const char* producer) const {
  if (!fs::exists(path(relative))) {
    throw ParameterError("missing " + path(relative).string() + "; run '" + producer + "' first");
  }
}

void Phase::write(const std::string& relative, std::string_view text) {
  corpus::write_text(path(relative), text);
  manifest_.add_artifact(relative);
}

void Phase::finish() {
  manifest_.set_config(ctx_.config.to_json());
  manifest_.set_timing(name_, std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count());
  manifest_.save();
  const auto bad = manifest_.verify();
  if (!bad.empty()) throw HarnessFault("manifest hash mismatch for " + bad.front());
}

std::string dump(const nlohmann::json& doc) { return doc.dump() + "\n"; }

}  // namespace detail

namespace {

corpus::GroundTruthSource load_source(const Phase& ph) {
  ph.require("source.json", "synth");
  return corpus::load_source(ph.path("source.json"));
}

std::vector<corpus::TokenSeq> load_split(const Phase& ph, const corpus::Vocab& vocab, const std::string& name) {
  const std::string rel = "corpus/" + name + ".txt";
  ph.require(rel, "synth");
  return corpus::read_corpus(ph.path(rel), vocab);
}

nlohmann::json load_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(corpus::read_text(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParameterError("cannot parse " + path.string() + ": " + e.what());
  }
}

models::AutoregressiveLM load_lm(const fs::path& path) { return models::AutoregressiveLM::from_json(load_json(path)); }
models::SeqDiscriminator load_disc(const fs::path& path) {
  return models::SeqDiscriminator::from_json(load_json(path));
}

void check_pair(const corpus::GroundTruthSource& source, const models::AutoregressiveLM& lm) {
  if (source.vocab() != lm.vocab() || source.max_length() != lm.max_length()) {
    throw ParameterError("checkpoint does not match the source vocabulary or max length");
  }
}

std::string multiplier_label(double m) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%gS", m);
  return buf;
}

std::string round_name(std::size_t r, const char* kind) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "round_%02zu.%s.json", r, kind);
  return buf;
}

std::uint64_t config_hash(const RunConfig& c) { return fnv1a64(c.to_json().dump()); }

std::string rounds_csv(const nlohmann::json& stats) {
  using metrics::fmt;
  std::string out = "round,generator_loss,mean_reward,discriminator_loss,aborted\n";
  for (const auto& s : stats) {
    const auto num = [&](const char* k) {
      return s.at(k).is_null() ? std::string() : fmt(s.at(k).get<double>(), 9);
    };
    out += std::to_string(s.at("round").get<std::size_t>()) + "," + num("generator_loss") + "," +
           num("mean_reward") + "," + num("discriminator_loss") + "," + (s.at("aborted").get<bool>() ? "1" : "0") +
           "\n";
  }
  return out;
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

std::string mode_name(GanMode mode) { return mode == GanMode::kPolicyGradient ? "pg" : "relax"; }

GanMode parse_mode(const std::string& name) {
  if (name == "pg") return GanMode::kPolicyGradient;
  if (name == "relax") return GanMode::kRelax;
  throw ParameterError("unknown gan mode '" + name + "' (expected pg or relax)");
}

void cmd_synth(const CommandContext& ctx) {
  Phase ph(ctx, "synth");
  const auto& c = ph.config();
  ph.guard({"source.json", "vocab.txt", "corpus/train.txt", "corpus/dev.txt", "corpus/test.txt"});
  const auto source = corpus::GroundTruthSource::make(c.phase_seed("synth/source"), c.source.vocab_size,
                                                      c.source.order, c.source.max_length, c.source.concentration);
  const auto data = source.sample(c.source.corpus_size, c.phase_seed("synth/corpus"));
  const auto held =
      static_cast<std::size_t>(std::llround(static_cast<double>(data.size()) * c.source.heldout_fraction));
  const std::size_t dev = held / 2;
  const std::size_t test = held - dev;
  const std::size_t train = data.size() - held;
  if (dev == 0 || test == 0 || train == 0) throw ParameterError("synth: corpus too small for train/dev/test");
  const std::span<const corpus::TokenSeq> all(data);
  ph.write("source.json", dump(source.to_json()));
  ph.write("vocab.txt", [&] {
    std::string text;
    for (const auto& t : source.vocab().content_tokens()) text += t + "\n";
    return text;
  }());
  ph.write("corpus/train.txt", corpus::format_corpus(source.vocab(), all.subspan(0, train)));
  ph.write("corpus/dev.txt", corpus::format_corpus(source.vocab(), all.subspan(train, dev)));
  ph.write("corpus/test.txt", corpus::format_corpus(source.vocab(), all.subspan(train + dev, test)));
  ph.finish();
}

void cmd_pretrain(const CommandContext& ctx) {
  Phase ph(ctx, "pretrain");
  const auto& c = ph.config();
  ph.guard({"lm.json", "lm_log.csv", "disc.json", "disc_log.csv"});
  const auto source = load_source(ph);
  const auto train = load_split(ph, source.vocab(), "train");
  const auto dev = load_split(ph, source.vocab(), "dev");

  models::AutoregressiveLM lm(source.vocab(), source.max_length(), c.lm, c.phase_seed("pretrain/lm-init"));
  nn::TrainConfig lm_tc = c.lm_train;
  lm_tc.seed = c.phase_seed("pretrain/lm-train");
  const auto lm_log = models::lm_train_mle(lm, train, dev, lm_tc);
  ph.write("lm.json", dump(lm.to_json()));
  ph.write("lm_log.csv", lm_log.to_csv());

  // The in-loop discriminator: real training corpus against as many samples
  // of the pre-trained generator.
  const auto generated = lm.sample(train.size(), c.phase_seed("pretrain/disc-gen"));
  const auto splits = corpus::split(train, generated, c.measure.heldout_fraction, c.phase_seed("pretrain/disc-split"));
  models::SeqDiscriminator disc(source.vocab(), source.max_length(), c.disc, c.phase_seed("pretrain/disc-init"));
  nn::TrainConfig d_tc = c.disc_train;
  d_tc.seed = c.phase_seed("pretrain/disc-train");
  const auto d_log = models::disc_train(disc, splits, d_tc, c.disc_options);
  ph.write("disc.json", dump(disc.to_json()));
  ph.write("disc_log.csv", d_log.to_csv());
  ph.finish();
}

metrics::DiscrepancyReport cmd_measure(const CommandContext& ctx, const MeasureOptions& options) {
  Phase ph(ctx, "measure");
  const auto& c = ph.config();
  ph.guard({"measure.csv", "measure.json"});
  const auto source = load_source(ph);
  const fs::path lm_path = options.lm.value_or(ph.path("lm.json"));
  if (!fs::exists(lm_path)) throw ParameterError("missing " + lm_path.string() + "; run 'pretrain' first");
  const auto lm = load_lm(lm_path);
  check_pair(source, lm);

  const auto eval = c.evaluation("measure");
  struct Row {
    std::string name;
    metrics::DiscrepancyReport report;
    const corpus::SequenceDensity* model;
  };
  std::vector<Row> rows{{"lm", adversarial::measure(source, lm, eval, eval.seed).report, &lm}};
  if (options.control) {
    rows.push_back({"control", adversarial::measure(source, source, eval, c.phase_seed("measure/control")).report,
                    &source});
  }

  std::string csv = "model," + metrics::report_csv_header();
  if (options.oracle) csv += ",tv_exact,da_exact,ds_posterior_mc";
  csv += "\n";
  nlohmann::ordered_json doc;
  for (const auto& row : rows) {
    csv += row.name + "," + metrics::report_csv_row(row.report);
    auto entry = metrics::report_to_json(row.report);
    if (options.oracle) {
      const metrics::OracleDensities oracle(source, *row.model);
      const double tv = metrics::tv_exact(oracle);
      const double da = metrics::da_exact(oracle);
      const double mc = metrics::ds_estimate_appendix_a(oracle, 100000, c.phase_seed("measure/oracle-" + row.name));
      csv += "," + metrics::fmt(tv) + "," + metrics::fmt(da) + "," + metrics::fmt(mc);
      entry["tv_exact"] = tv;
      entry["da_exact"] = da;
      entry["ds_posterior_mc"] = mc;
    }
    csv += "\n";
    doc[row.name] = entry;
  }
  ph.write("measure.csv", csv);
  ph.write("measure.json", doc.dump(2) + "\n");
  ph.finish();
  return rows.front().report;
}

void cmd_hw(const CommandContext& ctx) {
  Phase ph(ctx, "hw");
  const auto& c = ph.config();
  ph.guard({"hw/d_s.csv", "hw/d_a.csv", "hw/counts.csv"});
  const auto source = load_source(ph);
  const auto train = load_split(ph, source.vocab(), "train");
  ph.require("lm.json", "pretrain");
  ph.require("disc.json", "pretrain");
  const auto lm = load_lm(ph.path("lm.json"));
  const auto disc = load_disc(ph.path("disc.json"));
  check_pair(source, lm);

  // Same seed as the measure command, so the reference row matches it.
  const auto reference_eval = c.evaluation("measure");
  const auto reference = adversarial::measure(source, lm, reference_eval, reference_eval.seed).report;

  const auto bands = adversarial::standard_bands();
  const auto& mults = c.hw.multipliers;
  std::string header = "band";
  for (double m : mults) header += "," + multiplier_label(m);
  header += "\n";
  std::string pad(mults.size() - 1, ',');
  std::string ds_csv = header + "pre-train," + metrics::fmt(reference.d_s) + pad + "\n";
  std::string da_csv = header + "pre-train," + metrics::fmt(reference.d_a) + pad + "\n";
  std::string counts = "band,multiplier,generated,selected,attempts,aborted\n";

  for (std::size_t bi = 0; bi < bands.size(); ++bi) {
    const auto& band = bands[bi];
    ds_csv += band.label();
    da_csv += band.label();
    for (std::size_t mi = 0; mi < mults.size(); ++mi) {
      const std::string cell = "hw/" + band.label() + "/" + multiplier_label(mults[mi]);
      models::AutoregressiveLM updated = lm;
      adversarial::HwConfig hc;
      hc.sample_multiplier = mults[mi];
      hc.band = band;
      hc.train = c.hw.finetune;
      hc.seed = c.phase_seed(cell);
      const auto outcome = adversarial::hw_update(updated, disc, train.size(), hc);
      counts += band.label() + "," + multiplier_label(mults[mi]) + "," + std::to_string(outcome.generated) + "," +
                std::to_string(outcome.selected) + "," + std::to_string(outcome.attempts) + "," +
                (outcome.aborted ? "1" : "0") + "\n";
      if (outcome.aborted) {
        ds_csv += ",NA";
        da_csv += ",NA";
        continue;
      }
      const auto m = adversarial::measure(source, updated, c.evaluation("hw"), c.phase_seed(cell + "/measure"));
      ds_csv += "," + metrics::fmt(m.report.d_s);
      da_csv += "," + metrics::fmt(m.report.d_a);
      ph.write("hw/logs/band" + std::to_string(bi) + "_" + multiplier_label(mults[mi]) + ".csv", m.log.to_csv());
    }
    ds_csv += "\n";
    da_csv += "\n";
  }
  ph.write("hw/d_s.csv", ds_csv);
  ph.write("hw/d_a.csv", da_csv);
  ph.write("hw/counts.csv", counts);
  ph.finish();
}

void cmd_gan(const CommandContext& ctx, GanMode mode) {
  Phase ph(ctx, "gan-" + mode_name(mode));
  const auto& c = ph.config();
  const std::string dir = "gan_" + mode_name(mode) + "/";
  const std::string state_rel = dir + "state.json";
  const auto source = load_source(ph);
  const auto train = load_split(ph, source.vocab(), "train");

  if (ctx.force && fs::exists(ph.path(dir))) fs::remove_all(ph.path(dir));

  nlohmann::json state;
  std::size_t done = 0;
  std::optional<models::AutoregressiveLM> lm;
  std::optional<models::SeqDiscriminator> disc;
  if (fs::exists(ph.path(state_rel))) {
    state = load_json(ph.path(state_rel));
    if (state.at("config_hash").get<std::uint64_t>() != config_hash(c) ||
        state.at("mode").get<std::string>() != mode_name(mode)) {
      throw ParameterError(state_rel + " was written with a different config; pass --force to restart");
    }
    done = state.at("completed").get<std::size_t>();
    lm.emplace(load_lm(ph.path(dir + round_name(done, "lm"))));
    disc.emplace(load_disc(ph.path(dir + round_name(done, "disc"))));
  } else {
    ph.require("lm.json", "pretrain");
    ph.require("disc.json", "pretrain");
    lm.emplace(load_lm(ph.path("lm.json")));
    disc.emplace(load_disc(ph.path("disc.json")));
    check_pair(source, *lm);
    state = {{"mode", mode_name(mode)}, {"config_hash", config_hash(c)}, {"completed", 0},
             {"stats", nlohmann::json::array()}};
    ph.write(dir + round_name(0, "lm"), dump(lm->to_json()));
    ph.write(dir + round_name(0, "disc"), dump(disc->to_json()));
    ph.write(state_rel, dump(state));
  }

  adversarial::RoundConfig rc = c.gan.round;
  if (rc.g_steps == 0) rc.g_steps = (train.size() + rc.generator.batch_size - 1) / rc.generator.batch_size;
  for (std::size_t r = done + 1; r <= c.gan.rounds; ++r) {
    const auto seed = c.phase_seed("gan/" + mode_name(mode) + "/round-" + std::to_string(r));
    const auto stats = mode == GanMode::kPolicyGradient ? adversarial::pg_round(*lm, *disc, train, rc, seed)
                                                        : adversarial::relax_round(*lm, *disc, train, rc, seed);
    ph.write(dir + round_name(r, "lm"), dump(lm->to_json()));
    ph.write(dir + round_name(r, "disc"), dump(disc->to_json()));
    state["stats"].push_back({{"round", r},
                              {"generator_loss", number_or_null(stats.generator_loss)},
                              {"mean_reward", number_or_null(stats.mean_reward)},
                              {"discriminator_loss", number_or_null(stats.discriminator_loss)},
                              {"aborted", stats.aborted}});
    state["completed"] = r;
    // The state file goes last: a crash before this line replays round r.
    ph.write(state_rel, dump(state));
  }
  ph.write(dir + "rounds.csv", rounds_csv(state.at("stats")));
  ph.finish();
}

void cmd_eval_rounds(const CommandContext& ctx, GanMode mode) {
  Phase ph(ctx, "eval-rounds-" + mode_name(mode));
  const auto& c = ph.config();
  const std::string dir = "gan_" + mode_name(mode) + "/";
  ph.guard({dir + "third_party.csv", dir + "third_party.json"});
  const auto source = load_source(ph);
  ph.require(dir + "state.json", "gan");
  const auto state = load_json(ph.path(dir + "state.json"));
  const auto done = state.at("completed").get<std::size_t>();

  std::vector<models::AutoregressiveLM> lms;
  std::vector<std::string> labels;
  lms.reserve(done + 1);
  for (std::size_t r = 0; r <= done; ++r) {
    labels.push_back(dir + round_name(r, "lm"));
    lms.push_back(load_lm(ph.path(labels.back())));
    check_pair(source, lms.back());
  }
  std::vector<const corpus::SequenceDensity*> rounds;
  for (const auto& lm : lms) rounds.push_back(&lm);
  const auto records = adversarial::third_party_eval(rounds, labels, source, c.evaluation("eval-rounds/" + mode_name(mode)));

  nlohmann::ordered_json doc = nlohmann::ordered_json::array();
  for (const auto& rec : records) {
    nlohmann::ordered_json entry;
    entry["round"] = rec.round;
    entry["checkpoint"] = rec.checkpoint;
    entry["checkpoint_hash"] = file_hash(ph.path(rec.checkpoint));
    entry["disc_hash"] = rec.disc_hash;
    entry["report"] = metrics::report_to_json(rec.report);
    doc.push_back(entry);
  }
  ph.write(dir + "third_party.csv", adversarial::round_ledger_csv(records));
  ph.write(dir + "third_party.json", doc.dump(2) + "\n");
  ph.finish();
}

std::vector<std::string> verify_outputs(const fs::path& out) { return Manifest::open(out).verify(); }

}  // namespace seqdisc::pipeline
