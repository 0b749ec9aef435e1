#pragma once

// Parameterized building blocks. Layers only hold parameter indices; the
// owning model passes its ParamStore on every call, so models stay plain
// copyable values.

#include <string>
#include <vector>

#include "seqdisc/nnet/graph.hpp"
#include "seqdisc/random.hpp"

namespace seqdisc::nn {

enum class Init {
  kGlorot,  // uniform(-sqrt(6/(fan_in+fan_out)), +...)
  kZero,
};

Tensor init_tensor(std::size_t rows, std::size_t cols, Init init, Rng& rng);

struct Identity {
  Var forward(Graph&, Var x) const { return x; }
};

/// y = x W + b
class Dense {
 public:
  Dense() = default;
  Dense(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng,
        Init init = Init::kGlorot);
  Var forward(Graph& g, const ParamStore& ps, Var x) const;
  std::size_t in() const { return in_; }
  std::size_t out() const { return out_; }
  std::size_t weight() const { return w_; }
  std::size_t bias() const { return b_; }

 private:
  std::size_t w_ = 0, b_ = 0, in_ = 0, out_ = 0;
};

class Embedding {
 public:
  Embedding() = default;
  Embedding(ParamStore& ps, const std::string& name, std::size_t rows, std::size_t dim, Rng& rng);
  Var lookup(Graph& g, const ParamStore& ps, std::vector<int> ids) const;
  /// Soft lookup: each row of `weights` ([n x rows]) mixes embedding rows.
  Var mix(Graph& g, const ParamStore& ps, Var weights) const;
  std::size_t rows() const { return rows_; }
  std::size_t dim() const { return dim_; }
  std::size_t table() const { return table_; }

 private:
  std::size_t table_ = 0, rows_ = 0, dim_ = 0;
};

/// Gated recurrent unit:
///   z = s(x Wz + h Uz + bz), r = s(x Wr + h Ur + br)
///   n = tanh(x Wn + (r * h) Un + bn), h' = n + z * (h - n)
class GruCell {
 public:
  GruCell() = default;
  GruCell(ParamStore& ps, const std::string& name, std::size_t in, std::size_t hidden, Rng& rng);
  /// Input projection x [Wz|Wr|Wn] + b for any number of rows; can be
  /// computed once for a whole sequence batch.
  Var project_input(Graph& g, const ParamStore& ps, Var x) const;
  /// One step from a precomputed input projection.
  Var step(Graph& g, const ParamStore& ps, Var x_proj, Var h) const;
  Var forward(Graph& g, const ParamStore& ps, Var x, Var h) const {
    return step(g, ps, project_input(g, ps, x), h);
  }
  std::size_t hidden() const { return hidden_; }

 private:
  std::size_t wx_ = 0, bx_ = 0, uzr_ = 0, un_ = 0, hidden_ = 0;
};

/// 1-D convolution over time: `width` consecutive rows per window,
/// `filters` outputs per window.
class TemporalConv {
 public:
  TemporalConv() = default;
  TemporalConv(ParamStore& ps, const std::string& name, std::size_t in, std::size_t width, std::size_t filters,
               Rng& rng);
  /// x: [groups * steps, in] -> [groups * (steps - width + 1), filters]
  Var forward(Graph& g, const ParamStore& ps, Var x, std::size_t groups, std::size_t steps) const;
  std::size_t width() const { return width_; }

 private:
  Dense proj_;
  std::size_t width_ = 0;
};

}  // namespace seqdisc::nn
