#pragma once

// Output directory bookkeeping: the manifest of artifact hashes and phase
// timings, and the per-directory lock.

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"

namespace seqdisc::pipeline {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kManifestName = "manifest.json";

/// FNV-1a of the file bytes as 16 hex digits.
std::string file_hash(const std::filesystem::path& path);

class Manifest {
 public:
  /// Loads `dir/manifest.json` when present.
  static Manifest open(const std::filesystem::path& dir);

  void set_config(nlohmann::json config) { config_ = std::move(config); }
  /// Records (or refreshes) the hash of `dir/relative`.
  void add_artifact(const std::string& relative);
  void set_timing(const std::string& phase, double seconds) { timings_[phase] = seconds; }
  const std::map<std::string, std::string>& artifacts() const { return artifacts_; }

  void save() const;
  /// Paths whose current hash differs from the recorded one (missing files
  /// included).
  std::vector<std::string> verify() const;

 private:
  std::filesystem::path dir_;
  nlohmann::json config_;
  std::map<std::string, std::string> artifacts_;
  std::map<std::string, double> timings_;
};

/// Exclusive lock on an output directory for one command; released on
/// destruction. Throws HarnessFault when another command holds it.
class DirLock {
 public:
  explicit DirLock(const std::filesystem::path& dir);
  ~DirLock();
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  std::filesystem::path path_;
  int fd_ = -1;
};

}  // namespace seqdisc::pipeline
