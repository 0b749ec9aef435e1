#pragma once

// Small hand-built sources shared by the unit and acceptance tests.

#include <cmath>
#include <vector>

#include "seqdisc/corpus.hpp"

namespace fixtures {

using seqdisc::corpus::GroundTruthSource;
using seqdisc::corpus::Vocab;

/// One content token: P(tok) = p_tok, P(EOS) = 1 - p_tok in every context.
inline GroundTruthSource degenerate(double p_tok, int max_length) {
  return GroundTruthSource(Vocab::synthetic(1), 1, max_length, {p_tok, 1.0 - p_tok, p_tok, 1.0 - p_tok});
}

/// Two-outcome support {[], [tok]} with P([tok]) = p_tok.
inline GroundTruthSource two_outcome(double p_tok) { return degenerate(p_tok, 1); }

inline int tok() { return seqdisc::corpus::id_of(0); }

/// Relative comparison for values that should agree to rounding.
inline bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

}  // namespace fixtures
