#pragma once

// Shared plumbing for the subcommands: lock, manifest, overwrite guard.

#include <chrono>
#include <filesystem>
#include <string>
#include <vector>

#include "seqdisc/corpus.hpp"
#include "seqdisc/pipeline/commands.hpp"
#include "seqdisc/pipeline/manifest.hpp"

namespace seqdisc::pipeline::detail {

class Phase {
 public:
  Phase(const CommandContext& ctx, std::string name);

  std::filesystem::path path(const std::string& relative) const { return ctx_.out / relative; }
  /// Throws ParameterError if any of the outputs exists and --force is off.
  void guard(const std::vector<std::string>& outputs) const;
  /// Throws ParameterError naming the command that produces a missing input.
  void require(const std::string& relative, const char* producer) const;

  void write(const std::string& relative, std::string_view text);
  /// Saves the manifest and checks every recorded hash.
  void finish();

  const RunConfig& config() const { return ctx_.config; }
  Manifest& manifest() { return manifest_; }

 private:
  const CommandContext& ctx_;
  DirLock lock_;
  Manifest manifest_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

std::string dump(const nlohmann::json& doc);

}  // namespace seqdisc::pipeline::detail
