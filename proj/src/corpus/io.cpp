#include <fstream>
#include <sstream>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::corpus {

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  // Write beside the target and rename, so readers never see half a file.
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ParameterError("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw ParameterError("write failed for " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string format_corpus(const Vocab& vocab, std::span<const TokenSeq> seqs) {
  std::string out;
  for (const auto& s : seqs) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (!vocab.is_content(s[i])) throw ParameterError("corpus contains a non-content id");
      if (i) out += ' ';
      out += vocab.token(s[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<TokenSeq> parse_corpus(const Vocab& vocab, std::string_view text) {
  std::vector<TokenSeq> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    TokenSeq seq;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && line[i] == ' ') ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ') ++j;
      if (j > i) {
        const int id = vocab.id(line.substr(i, j - i));
        if (!vocab.is_content(id)) throw ParameterError("reserved token in corpus line");
        seq.push_back(id);
      }
      i = j;
    }
    out.push_back(std::move(seq));
    pos = eol + 1;
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, const Vocab& vocab, std::span<const TokenSeq> seqs) {
  write_text(path, format_corpus(vocab, seqs));
}

std::vector<TokenSeq> read_corpus(const std::filesystem::path& path, const Vocab& vocab) {
  return parse_corpus(vocab, read_text(path));
}

void write_vocab(const std::filesystem::path& path, const Vocab& vocab) {
  std::string text;
  for (const auto& t : vocab.content_tokens()) text += t + "\n";
  write_text(path, text);
}

Vocab read_vocab(const std::filesystem::path& path) {
  std::vector<std::string> toks;
  std::istringstream in(read_text(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) toks.push_back(line);
  }
  return Vocab(std::move(toks));
}

void save_source(const std::filesystem::path& path, const GroundTruthSource& source) {
  write_text(path, source.to_json().dump(1) + "\n");
}

GroundTruthSource load_source(const std::filesystem::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError("cannot parse " + path.string() + ": " + e.what());
  }
  return GroundTruthSource::from_json(doc);
}

}  // namespace seqdisc::corpus
