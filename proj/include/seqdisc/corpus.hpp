#pragma once

// Token sequences, vocabularies, exact sequence densities (the synthetic
// Markov ground truth and anything else that can score prefixes), balanced
// dataset splits, and the plain-text corpus formats.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "seqdisc/random.hpp"

namespace seqdisc::corpus {

// Reserved ids occupy the first slots of every vocabulary.
inline constexpr int kBos = 0;
inline constexpr int kEos = 1;
inline constexpr int kPad = 2;
inline constexpr int kNumReserved = 3;

/// Content-token ids in vocabulary space (>= kNumReserved). BOS/EOS are
/// implicit. The empty sequence is a legal draw: EOS may come first.
using TokenSeq = std::vector<int>;

/// Maps a content id to its 0-based symbol index; EOS is symbol V.
inline int symbol_of(int id) { return id - kNumReserved; }
inline int id_of(int symbol) { return symbol + kNumReserved; }

class Vocab {
 public:
  /// `content_tokens` excludes the reserved entries.
  explicit Vocab(std::vector<std::string> content_tokens);

  /// "w0", "w1", ... for synthetic languages.
  static Vocab synthetic(int content_size);

  int size() const { return static_cast<int>(tokens_.size()); }
  int content_size() const { return size() - kNumReserved; }
  bool is_content(int id) const { return id >= kNumReserved && id < size(); }

  const std::string& token(int id) const;
  int id(std::string_view token) const;
  std::span<const std::string> content_tokens() const {
    return std::span<const std::string>(tokens_).subspan(kNumReserved);
  }
  std::uint64_t hash() const;

  friend bool operator==(const Vocab& a, const Vocab& b) { return a.tokens_ == b.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
};

/// Incremental decoding state. Markov sources use `context`, recurrent
/// models use `hidden`.
struct DecodeState {
  std::vector<int> context;
  std::vector<double> hidden;
  int length = 0;
};

/// A distribution over token sequences with exact, prefix-factorized
/// probabilities. EOS is forced once max_length content tokens are emitted.
class SequenceDensity {
 public:
  virtual ~SequenceDensity() = default;

  virtual const Vocab& vocab() const = 0;
  virtual int max_length() const = 0;
  int content_size() const { return vocab().content_size(); }

  virtual DecodeState initial_state() const = 0;
  /// Fills `out` (size V+1: content symbols then EOS) with next-symbol
  /// log-probabilities. Only valid while state.length < max_length().
  virtual void next_log_probs(const DecodeState& state, std::span<double> out) const = 0;
  virtual void advance(DecodeState& state, int symbol) const = 0;

  /// Sum of per-step log-probabilities including the EOS step.
  virtual double log_prob(const TokenSeq& x) const;
  double prob(const TokenSeq& x) const;

  /// Ancestral sample with logits divided by `temperature`.
  TokenSeq sample_one(Rng& rng, double temperature = 1.0) const;
  virtual std::vector<TokenSeq> sample(std::size_t n, std::uint64_t seed, double temperature = 1.0) const;
  /// Zero-temperature limit: argmax at every step (lowest index on ties).
  TokenSeq greedy() const;

 protected:
  void check_sequence(const TokenSeq& x) const;
};

/// Number of sequences of length 0..max_length over V content symbols,
/// saturating at SIZE_MAX.
std::size_t support_size(int content_size, int max_length);

/// Calls `visit(x, log_prob(x))` for every sequence in the support in
/// lexicographic-by-length DFS order. Throws CapacityError when the support
/// exceeds `cap`.
void enumerate_support(const SequenceDensity& density,
                       const std::function<void(const TokenSeq&, double)>& visit,
                       std::size_t cap = 10'000'000);

/// Order-k Markov chain over content symbols plus EOS. The context is the
/// last k symbols with BOS padding on the left.
class GroundTruthSource final : public SequenceDensity {
 public:
  /// `transition` is row-major: one row of V+1 probabilities per context.
  GroundTruthSource(Vocab vocab, int order, int max_length, std::vector<double> transition);

  /// Rows drawn from a symmetric Dirichlet(concentration); deterministic in
  /// `seed`. Every entry (EOS included) is bounded away from zero.
  static GroundTruthSource make(std::uint64_t seed, int vocab_size, int order, int max_length,
                                double concentration);

  const Vocab& vocab() const override { return vocab_; }
  int max_length() const override { return max_length_; }
  int order() const { return order_; }
  std::size_t num_contexts() const { return num_contexts_; }
  std::span<const double> transition() const { return transition_; }
  std::span<const double> row(std::size_t context) const;

  DecodeState initial_state() const override;
  void next_log_probs(const DecodeState& state, std::span<double> out) const override;
  void advance(DecodeState& state, int symbol) const override;

  /// Direct product of transition probabilities.
  double exact_prob(const TokenSeq& x) const;
  double log_prob(const TokenSeq& x) const override;

  nlohmann::json to_json() const;
  static GroundTruthSource from_json(const nlohmann::json& doc);

 private:
  std::size_t context_index(std::span<const int> context) const;

  Vocab vocab_;
  int order_;
  int max_length_;
  std::size_t num_contexts_;
  std::vector<double> transition_;
};

/// Six-way partition for discriminator training. Side A is real, side B is
/// generated.
struct SplitCorpus {
  std::vector<TokenSeq> train_a, train_b;
  std::vector<TokenSeq> dev_a, dev_b;
  std::vector<TokenSeq> test_a, test_b;

  bool balanced() const {
    return train_a.size() == train_b.size() && dev_a.size() == dev_b.size() &&
           test_a.size() == test_b.size();
  }
};

/// Truncates the larger side to the smaller, shuffles each side, then holds
/// out `heldout_fraction` of each side and halves it into dev and test.
SplitCorpus split(std::span<const TokenSeq> real, std::span<const TokenSeq> generated,
                  double heldout_fraction, std::uint64_t seed);

// Plain-text formats: one sequence per line, tokens separated by single
// spaces, empty line = empty sequence. Vocab file lists content tokens, one
// per line; line i has id i + kNumReserved.
std::string format_corpus(const Vocab& vocab, std::span<const TokenSeq> seqs);
std::vector<TokenSeq> parse_corpus(const Vocab& vocab, std::string_view text);
void write_corpus(const std::filesystem::path& path, const Vocab& vocab, std::span<const TokenSeq> seqs);
std::vector<TokenSeq> read_corpus(const std::filesystem::path& path, const Vocab& vocab);
void write_vocab(const std::filesystem::path& path, const Vocab& vocab);
Vocab read_vocab(const std::filesystem::path& path);
void save_source(const std::filesystem::path& path, const GroundTruthSource& source);
GroundTruthSource load_source(const std::filesystem::path& path);

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, std::string_view text);

}  // namespace seqdisc::corpus
