#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace seqdisc {

/// Seeded random stream. mt19937_64 is fully specified by the standard, and
/// the uniform conversion below is ours, so draws are identical across
/// standard library implementations (Dirichlet draws still go through
/// std::gamma_distribution).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in (0, 1); never returns 0, safe for log().
  double uniform_open() {
    return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  /// Standard Gumbel(0, 1) draw.
  double gumbel();

  /// Index drawn from unnormalized non-negative weights.
  std::size_t categorical(std::span<const double> weights);

  /// Fisher-Yates; std::shuffle's algorithm differs between libraries.
  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

/// Sub-seed for a labeled phase; adding new labels never changes the seeds
/// handed to existing ones.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

/// FNV-1a 64-bit content hash.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace seqdisc
