#include "seqdisc/pipeline/manifest.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cstdio>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"
#include "seqdisc/random.hpp"

namespace seqdisc::pipeline {

namespace fs = std::filesystem;

std::string file_hash(const fs::path& path) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(corpus::read_text(path))));
  return buf;
}

Manifest Manifest::open(const fs::path& dir) {
  Manifest m;
  m.dir_ = dir;
  const fs::path file = dir / kManifestName;
  if (!fs::exists(file)) return m;
  try {
    const auto doc = nlohmann::json::parse(corpus::read_text(file));
    m.config_ = doc.at("config");
    m.artifacts_ = doc.at("artifacts").get<std::map<std::string, std::string>>();
    m.timings_ = doc.at("timings").get<std::map<std::string, double>>();
  } catch (const nlohmann::json::exception& e) {
    throw HarnessFault("unreadable manifest " + file.string() + ": " + e.what());
  }
  return m;
}

void Manifest::add_artifact(const std::string& relative) { artifacts_[relative] = file_hash(dir_ / relative); }

void Manifest::save() const {
  nlohmann::ordered_json doc;
  doc["tool"] = "seqdisc";
  doc["version"] = kToolVersion;
  doc["config"] = config_;
  doc["artifacts"] = artifacts_;
  doc["timings"] = timings_;
  corpus::write_text(dir_ / kManifestName, doc.dump(2) + "\n");
}

std::vector<std::string> Manifest::verify() const {
  std::vector<std::string> bad;
  for (const auto& [path, hash] : artifacts_) {
    if (!fs::exists(dir_ / path) || file_hash(dir_ / path) != hash) bad.push_back(path);
  }
  return bad;
}

DirLock::DirLock(const fs::path& dir) : path_(dir / ".lock") {
  fs::create_directories(dir);
  fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd_ < 0) {
    throw HarnessFault("output directory " + dir.string() + " is locked by another command (" + path_.string() +
                       ")");
  }
  const std::string pid = std::to_string(::getpid()) + "\n";
  if (::write(fd_, pid.data(), pid.size()) < 0) {
    // The pid is informational only.
  }
}

DirLock::~DirLock() {
  if (fd_ >= 0) {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
}

}  // namespace seqdisc::pipeline
