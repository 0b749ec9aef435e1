// seqdisc: discriminator-based discrepancy experiments on synthetic sources.

#include <cstdio>
#include <iostream>

#include "CLI11.hpp"
#include "seqdisc/error.hpp"
#include "seqdisc/pipeline/commands.hpp"

namespace sp = seqdisc::pipeline;

int main(int argc, char** argv) {
  CLI::App app{"Discriminator-based discrepancy between a reference source and a learned generator"};
  app.require_subcommand(1);

  std::string config_path;
  std::uint64_t seed = 0;
  std::string out = "run";
  bool force = false;
  app.add_option("--config", config_path, "Run config (JSON); defaults apply when omitted");
  app.add_option("--seed", seed, "Master seed override");
  app.add_option("--out", out, "Output directory")->capture_default_str();
  app.add_flag("--force", force, "Overwrite existing outputs / restart GAN runs");

  auto* synth = app.add_subcommand("synth", "Sample the ground-truth source and write the real corpus");
  auto* pretrain = app.add_subcommand("pretrain", "Train the generator by MLE, then the in-loop discriminator");

  auto* measure = app.add_subcommand("measure", "Train a fresh discriminator and report d_s, d_a");
  std::string lm_path;
  bool oracle = false, control = false;
  measure->add_option("--lm", lm_path, "Generator checkpoint (default <out>/lm.json)");
  measure->add_flag("--oracle", oracle, "Also report exact tv / d_a by enumerating the support");
  measure->add_flag("--control", control, "Also measure real against real");

  auto* hw = app.add_subcommand("hw", "Score-band fine-tuning grid");
  std::string mode = "pg";
  auto* gan = app.add_subcommand("gan", "Adversarial rounds (resumable)");
  gan->add_option("--mode", mode, "pg or relax")->check(CLI::IsMember({"pg", "relax"}))->capture_default_str();
  std::string eval_mode = "pg";
  auto* eval = app.add_subcommand("eval-rounds", "Third-party discriminator per GAN round");
  eval->add_option("--mode", eval_mode, "pg or relax")->check(CLI::IsMember({"pg", "relax"}))->capture_default_str();
  auto* report = app.add_subcommand("report", "Collect plot-data CSVs and the manifest under <out>/report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(seqdisc::ExitCode::kParameter);
  }

  try {
    sp::CommandContext ctx;
    ctx.config = config_path.empty() ? sp::RunConfig{} : sp::RunConfig::load(config_path);
    if (seed != 0) ctx.config.seed = seed;
    ctx.config.validate();
    ctx.out = out;
    ctx.force = force;

    if (synth->parsed()) {
      sp::cmd_synth(ctx);
    } else if (pretrain->parsed()) {
      sp::cmd_pretrain(ctx);
    } else if (measure->parsed()) {
      sp::MeasureOptions mo;
      if (!lm_path.empty()) mo.lm = lm_path;
      mo.oracle = oracle;
      mo.control = control;
      const auto r = sp::cmd_measure(ctx, mo);
      std::printf("d_s %.6f  d_a %.6f  accuracy %.6f  u_d %.6f  u_theta %.6f\n", r.d_s, r.d_a, r.accuracy, r.u_d,
                  r.u_theta);
    } else if (hw->parsed()) {
      sp::cmd_hw(ctx);
    } else if (gan->parsed()) {
      sp::cmd_gan(ctx, sp::parse_mode(mode));
    } else if (eval->parsed()) {
      sp::cmd_eval_rounds(ctx, sp::parse_mode(eval_mode));
    } else if (report->parsed()) {
      sp::cmd_report(ctx);
    }
  } catch (const seqdisc::Error& e) {
    std::cerr << "seqdisc: " << e.what() << "\n";
    return static_cast<int>(e.exit_code());
  } catch (const std::exception& e) {
    std::cerr << "seqdisc: internal error: " << e.what() << "\n";
    return static_cast<int>(seqdisc::ExitCode::kHarnessFault);
  }
  return 0;
}
