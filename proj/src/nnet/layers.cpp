#include "seqdisc/nnet/layers.hpp"

#include <cmath>

#include "seqdisc/error.hpp"

namespace seqdisc::nn {

Tensor init_tensor(std::size_t rows, std::size_t cols, Init init, Rng& rng) {
  Tensor t = Tensor::matrix(rows, cols);
  if (init == Init::kGlorot) {
    const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (double& v : t.values()) v = (2.0 * rng.uniform() - 1.0) * limit;
  }
  return t;
}

Dense::Dense(ParamStore& ps, const std::string& name, std::size_t in, std::size_t out, Rng& rng, Init init)
    : in_(in), out_(out) {
  if (in == 0 || out == 0) throw ParameterError("dense layer '" + name + "' needs non-zero sizes");
  w_ = ps.add(name + ".w", init_tensor(in, out, init, rng));
  b_ = ps.add(name + ".b", Tensor::matrix(1, out));
}

Var Dense::forward(Graph& g, const ParamStore& ps, Var x) const {
  return g.add_row(g.matmul(x, g.param(ps, w_)), g.param(ps, b_));
}

Embedding::Embedding(ParamStore& ps, const std::string& name, std::size_t rows, std::size_t dim, Rng& rng)
    : rows_(rows), dim_(dim) {
  if (rows == 0 || dim == 0) throw ParameterError("embedding '" + name + "' needs non-zero sizes");
  table_ = ps.add(name + ".table", init_tensor(rows, dim, Init::kGlorot, rng));
}

Var Embedding::lookup(Graph& g, const ParamStore& ps, std::vector<int> ids) const {
  return g.gather_rows(g.param(ps, table_), std::move(ids));
}

Var Embedding::mix(Graph& g, const ParamStore& ps, Var weights) const {
  return g.matmul(weights, g.param(ps, table_));
}

GruCell::GruCell(ParamStore& ps, const std::string& name, std::size_t in, std::size_t hidden, Rng& rng)
    : hidden_(hidden) {
  if (in == 0 || hidden == 0) throw ParameterError("GRU '" + name + "' needs non-zero sizes");
  wx_ = ps.add(name + ".wx", init_tensor(in, 3 * hidden, Init::kGlorot, rng));
  bx_ = ps.add(name + ".bx", Tensor::matrix(1, 3 * hidden));
  uzr_ = ps.add(name + ".uzr", init_tensor(hidden, 2 * hidden, Init::kGlorot, rng));
  un_ = ps.add(name + ".un", init_tensor(hidden, hidden, Init::kGlorot, rng));
}

Var GruCell::project_input(Graph& g, const ParamStore& ps, Var x) const {
  return g.add_row(g.matmul(x, g.param(ps, wx_)), g.param(ps, bx_));
}

Var GruCell::step(Graph& g, const ParamStore& ps, Var x_proj, Var h) const {
  const std::size_t H = hidden_;
  Var hzr = g.matmul(h, g.param(ps, uzr_));
  Var z = g.sigmoid(g.add(g.slice_cols(x_proj, 0, H), g.slice_cols(hzr, 0, H)));
  Var r = g.sigmoid(g.add(g.slice_cols(x_proj, H, 2 * H), g.slice_cols(hzr, H, 2 * H)));
  Var n = g.tanh(g.add(g.slice_cols(x_proj, 2 * H, 3 * H), g.matmul(g.mul(r, h), g.param(ps, un_))));
  return g.add(n, g.mul(z, g.sub(h, n)));
}

TemporalConv::TemporalConv(ParamStore& ps, const std::string& name, std::size_t in, std::size_t width,
                           std::size_t filters, Rng& rng)
    : proj_(ps, name, in * width, filters, rng), width_(width) {}

Var TemporalConv::forward(Graph& g, const ParamStore& ps, Var x, std::size_t groups, std::size_t steps) const {
  return proj_.forward(g, ps, g.windows(x, groups, steps, width_));
}

}  // namespace seqdisc::nn
