#include <string>

#include "seqdisc/corpus.hpp"
#include "seqdisc/error.hpp"

namespace seqdisc::corpus {

Vocab::Vocab(std::vector<std::string> content_tokens) {
  if (content_tokens.empty()) throw ParameterError("vocab needs at least one content token");
  tokens_ = {"<bos>", "<eos>", "<pad>"};
  tokens_.reserve(content_tokens.size() + kNumReserved);
  for (auto& t : content_tokens) {
    if (t.empty() || t.find_first_of(" \t\r\n") != std::string::npos) {
      throw ParameterError("vocab token must be non-empty without whitespace: '" + t + "'");
    }
    tokens_.push_back(std::move(t));
  }
  for (int i = 0; i < size(); ++i) {
    if (!index_.emplace(tokens_[i], i).second) {
      throw ParameterError("duplicate vocab token '" + tokens_[i] + "'");
    }
  }
}

Vocab Vocab::synthetic(int content_size) {
  if (content_size < 1) throw ParameterError("synthetic vocab needs content_size >= 1");
  std::vector<std::string> toks;
  toks.reserve(content_size);
  for (int i = 0; i < content_size; ++i) toks.push_back("w" + std::to_string(i));
  return Vocab(std::move(toks));
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || id >= size()) throw ParameterError("token id out of range: " + std::to_string(id));
  return tokens_[id];
}

int Vocab::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  if (it == index_.end()) throw ParameterError("unknown token '" + std::string(token) + "'");
  return it->second;
}

std::uint64_t Vocab::hash() const {
  std::uint64_t h = fnv1a64("");
  for (const auto& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  }
  return h;
}

}  // namespace seqdisc::corpus
