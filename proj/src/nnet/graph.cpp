#include "seqdisc/nnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "seqdisc/error.hpp"
#include "seqdisc/kernels.hpp"

namespace seqdisc::nn {

namespace kn = seqdisc::kernels;

namespace {

void require(bool ok, const char* op, const std::string& detail) {
  if (!ok) throw StructuralError(std::string(op) + ": " + detail);
}

std::string dims(const Tensor& t) { return std::to_string(t.rows()) + "x" + std::to_string(t.cols()); }

double stable_sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(1 + exp(x)) without overflow.
double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

}  // namespace

Graph::Graph(std::vector<ParamStore*> trainable) : recording_(true), trainable_(std::move(trainable)) {}

const Graph::Node& Graph::node(Var v) const {
  if (!v.valid() || v.id >= nodes_.size()) throw UsageError("variable does not belong to this graph");
  return nodes_[v.id];
}

const Tensor& Graph::value(Var v) const {
  node(v);
  return val(v.id);
}

Tensor Graph::grad(Var v) const {
  const Node& n = node(v);
  if (n.grad.size() == 0) return Tensor(val(v.id).shape(), 0.0);
  return n.grad;
}

Tensor& Graph::gradient(std::uint32_t id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0 && val(id).size() != 0) n.grad = Tensor(val(id).shape(), 0.0);
  return n.grad;
}

Var Graph::emit(Tensor value, bool needs_grad, std::function<void()> back) {
  if (checked_mode()) require_finite(value, "graph op output");
  Node n;
  n.value = std::move(value);
  n.needs_grad = recording_ && needs_grad;
  if (n.needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<std::uint32_t>(nodes_.size() - 1)};
}

Var Graph::param(const ParamStore& store, std::size_t index) {
  auto key = std::make_pair(&store, index);
  if (auto it = param_cache_.find(key); it != param_cache_.end()) return it->second;
  Node n;
  n.external = &store[index].value;
  for (ParamStore* s : trainable_) {
    if (s == &store) {
      n.needs_grad = true;
      n.store = s;
      n.param_index = index;
    }
  }
  nodes_.push_back(std::move(n));
  Var v{static_cast<std::uint32_t>(nodes_.size() - 1)};
  param_cache_.emplace(key, v);
  return v;
}

Var Graph::constant(Tensor t) {
  if (checked_mode()) require_finite(t, "graph constant");
  return emit(std::move(t), false, nullptr);
}

Var Graph::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.cols() == B.rows(), "matmul", dims(A) + " * " + dims(B));
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor y = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ai = A.row(i);
    double* yi = y.row(i);
    for (std::size_t kk = 0; kk < k; ++kk) {
      if (ai[kk] != 0.0) kn::axpy(ai[kk], B.row(kk), yi, m);
    }
  }
  const bool na = needs(a), nb = needs(b);
  return emit(std::move(y), na || nb, [this, a, b, na, nb, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& A = val(a.id);
    const Tensor& B = val(b.id);
    const Tensor& dy = nodes_[self].grad;
    const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
    if (na) {
      Tensor& da = gradient(a.id);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t kk = 0; kk < k; ++kk) da.row(i)[kk] += kn::dot(dy.row(i), B.row(kk), m);
      }
    }
    if (nb) {
      Tensor& db = gradient(b.id);
      for (std::size_t i = 0; i < n; ++i) {
        const double* ai = A.row(i);
        for (std::size_t kk = 0; kk < k; ++kk) {
          if (ai[kk] != 0.0) kn::axpy(ai[kk], dy.row(i), db.row(kk), m);
        }
      }
    }
  });
}

Var Graph::add_row(Var a, Var bias) {
  const Tensor& A = value(a);
  const Tensor& b = value(bias);
  require(b.size() == A.cols(), "add_row", dims(A) + " + " + dims(b));
  Tensor y = A;
  for (std::size_t i = 0; i < A.rows(); ++i) kn::add(b.data(), y.row(i), A.cols());
  const bool na = needs(a), nb = needs(bias);
  return emit(std::move(y), na || nb, [this, a, bias, na, nb, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    if (na) kn::add(dy.data(), gradient(a.id).data(), dy.size());
    if (nb) {
      Tensor& db = gradient(bias.id);
      for (std::size_t i = 0; i < dy.rows(); ++i) kn::add(dy.row(i), db.data(), dy.cols());
    }
  });
}

Var Graph::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "add", dims(A) + " + " + dims(B));
  Tensor y = A;
  kn::add(B.data(), y.data(), y.size());
  const bool na = needs(a), nb = needs(b);
  return emit(std::move(y), na || nb, [this, a, b, na, nb, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    if (na) kn::add(dy.data(), gradient(a.id).data(), dy.size());
    if (nb) kn::add(dy.data(), gradient(b.id).data(), dy.size());
  });
}

Var Graph::sub(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "sub", dims(A) + " - " + dims(B));
  Tensor y = A;
  kn::axpy(-1.0, B.data(), y.data(), y.size());
  const bool na = needs(a), nb = needs(b);
  return emit(std::move(y), na || nb, [this, a, b, na, nb, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    if (na) kn::add(dy.data(), gradient(a.id).data(), dy.size());
    if (nb) kn::axpy(-1.0, dy.data(), gradient(b.id).data(), dy.size());
  });
}

Var Graph::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.same_shape(B), "mul", dims(A) + " * " + dims(B));
  Tensor y(A.shape(), 0.0);
  kn::hadamard_acc(A.data(), B.data(), y.data(), y.size());
  const bool na = needs(a), nb = needs(b);
  return emit(std::move(y), na || nb, [this, a, b, na, nb, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    if (na) kn::hadamard_acc(dy.data(), val(b.id).data(), gradient(a.id).data(), dy.size());
    if (nb) kn::hadamard_acc(dy.data(), val(a.id).data(), gradient(b.id).data(), dy.size());
  });
}

Var Graph::one_minus(Var a) {
  Tensor y = value(a);
  for (double& x : y.values()) x = 1.0 - x;
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    kn::axpy(-1.0, dy.data(), gradient(a.id).data(), dy.size());
  });
}

Var Graph::scale(Var a, double s) {
  Tensor y = value(a);
  for (double& x : y.values()) x *= s;
  return emit(std::move(y), needs(a), [this, a, s, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    kn::axpy(s, dy.data(), gradient(a.id).data(), dy.size());
  });
}

Var Graph::tanh(Var a) {
  Tensor y = value(a);
  for (double& x : y.values()) x = std::tanh(x);
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    const Tensor& y = nodes_[self].value;
    Tensor& da = gradient(a.id);
    for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * (1.0 - y[i] * y[i]);
  });
}

Var Graph::relu(Var a) {
  Tensor y = value(a);
  for (double& x : y.values()) x = x > 0.0 ? x : 0.0;
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    const Tensor& x = val(a.id);
    Tensor& da = gradient(a.id);
    for (std::size_t i = 0; i < dy.size(); ++i) da[i] += x[i] > 0.0 ? dy[i] : 0.0;
  });
}

Var Graph::sigmoid(Var a) {
  Tensor y = value(a);
  for (double& x : y.values()) x = stable_sigmoid(x);
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    const Tensor& y = nodes_[self].value;
    Tensor& da = gradient(a.id);
    for (std::size_t i = 0; i < dy.size(); ++i) da[i] += dy[i] * y[i] * (1.0 - y[i]);
  });
}

Var Graph::softmax(Var a) {
  Tensor y = value(a);
  const std::size_t c = y.cols();
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double* r = y.row(i);
    const double top = *std::max_element(r, r + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      r[j] = std::exp(r[j] - top);
      s += r[j];
    }
    for (std::size_t j = 0; j < c; ++j) r[j] /= s;
  }
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    const Tensor& y = nodes_[self].value;
    Tensor& da = gradient(a.id);
    const std::size_t c = y.cols();
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const double inner = kn::dot(dy.row(i), y.row(i), c);
      for (std::size_t j = 0; j < c; ++j) da.row(i)[j] += y.row(i)[j] * (dy.row(i)[j] - inner);
    }
  });
}

Var Graph::log_softmax(Var a) {
  Tensor y = value(a);
  const std::size_t c = y.cols();
  for (std::size_t i = 0; i < y.rows(); ++i) {
    double* r = y.row(i);
    const double top = *std::max_element(r, r + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(r[j] - top);
    const double lse = top + std::log(s);
    for (std::size_t j = 0; j < c; ++j) r[j] -= lse;
  }
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    const Tensor& y = nodes_[self].value;
    Tensor& da = gradient(a.id);
    const std::size_t c = y.cols();
    for (std::size_t i = 0; i < y.rows(); ++i) {
      const double total = kn::sum(dy.row(i), c);
      for (std::size_t j = 0; j < c; ++j) da.row(i)[j] += dy.row(i)[j] - std::exp(y.row(i)[j]) * total;
    }
  });
}

Var Graph::gather_rows(Var table, std::vector<int> ids) {
  const Tensor& T = value(table);
  const std::size_t c = T.cols();
  Tensor y = Tensor::matrix(ids.size(), c);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < T.rows(), "gather_rows",
            "id " + std::to_string(ids[i]) + " outside table of " + std::to_string(T.rows()) + " rows");
    std::copy_n(T.row(static_cast<std::size_t>(ids[i])), c, y.row(i));
  }
  return emit(std::move(y), needs(table),
              [this, table, ids = std::move(ids), self = static_cast<std::uint32_t>(nodes_.size())] {
                const Tensor& dy = nodes_[self].grad;
                Tensor& dt = gradient(table.id);
                for (std::size_t i = 0; i < ids.size(); ++i) {
                  kn::add(dy.row(i), dt.row(static_cast<std::size_t>(ids[i])), dy.cols());
                }
              });
}

Var Graph::slice_cols(Var a, std::size_t begin, std::size_t end) {
  const Tensor& A = value(a);
  require(begin < end && end <= A.cols(), "slice_cols", "bad range for " + dims(A));
  const std::size_t w = end - begin;
  Tensor y = Tensor::matrix(A.rows(), w);
  for (std::size_t i = 0; i < A.rows(); ++i) std::copy_n(A.row(i) + begin, w, y.row(i));
  return emit(std::move(y), needs(a), [this, a, begin, w, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    Tensor& da = gradient(a.id);
    for (std::size_t i = 0; i < dy.rows(); ++i) kn::add(dy.row(i), da.row(i) + begin, w);
  });
}

Var Graph::slice_rows(Var a, std::size_t begin, std::size_t end) {
  const Tensor& A = value(a);
  require(begin < end && end <= A.rows(), "slice_rows", "bad range for " + dims(A));
  const std::size_t c = A.cols();
  Tensor y = Tensor::matrix(end - begin, c);
  std::copy_n(A.row(begin), (end - begin) * c, y.data());
  return emit(std::move(y), needs(a), [this, a, begin, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    Tensor& da = gradient(a.id);
    kn::add(dy.row(0), da.row(begin), dy.size());
  });
}

Var Graph::concat_cols(std::span<const Var> parts) {
  require(!parts.empty(), "concat_cols", "no inputs");
  const std::size_t n = value(parts[0]).rows();
  std::size_t total = 0;
  bool any = false;
  for (Var p : parts) {
    require(value(p).rows() == n, "concat_cols", "row counts differ");
    total += value(p).cols();
    any = any || needs(p);
  }
  Tensor y = Tensor::matrix(n, total);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& P = value(p);
    for (std::size_t i = 0; i < n; ++i) std::copy_n(P.row(i), P.cols(), y.row(i) + off);
    off += P.cols();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return emit(std::move(y), any, [this, ps, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    std::size_t off = 0;
    for (Var p : ps) {
      const std::size_t c = val(p.id).cols();
      if (nodes_[p.id].needs_grad) {
        Tensor& dp = gradient(p.id);
        for (std::size_t i = 0; i < dy.rows(); ++i) kn::add(dy.row(i) + off, dp.row(i), c);
      }
      off += c;
    }
  });
}

Var Graph::concat_rows(std::span<const Var> parts) {
  require(!parts.empty(), "concat_rows", "no inputs");
  const std::size_t c = value(parts[0]).cols();
  std::size_t total = 0;
  bool any = false;
  for (Var p : parts) {
    require(value(p).cols() == c, "concat_rows", "column counts differ");
    total += value(p).rows();
    any = any || needs(p);
  }
  Tensor y = Tensor::matrix(total, c);
  std::size_t off = 0;
  for (Var p : parts) {
    const Tensor& P = value(p);
    std::copy_n(P.data(), P.size(), y.row(off));
    off += P.rows();
  }
  std::vector<Var> ps(parts.begin(), parts.end());
  return emit(std::move(y), any, [this, ps, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    std::size_t off = 0;
    for (Var p : ps) {
      const std::size_t r = val(p.id).rows();
      if (nodes_[p.id].needs_grad) kn::add(dy.row(off), gradient(p.id).data(), r * dy.cols());
      off += r;
    }
  });
}

Var Graph::place_rows(Tensor base, Var src, std::vector<std::size_t> dest) {
  const Tensor& S = value(src);
  require(S.rows() == dest.size(), "place_rows", "one destination per source row required");
  require(S.cols() == base.cols(), "place_rows", "column counts differ");
  for (std::size_t i = 0; i < dest.size(); ++i) {
    require(dest[i] < base.rows(), "place_rows", "destination row out of range");
    std::copy_n(S.row(i), S.cols(), base.row(dest[i]));
  }
  return emit(std::move(base), needs(src),
              [this, src, dest = std::move(dest), self = static_cast<std::uint32_t>(nodes_.size())] {
                const Tensor& dy = nodes_[self].grad;
                Tensor& ds = gradient(src.id);
                for (std::size_t i = 0; i < dest.size(); ++i) kn::add(dy.row(dest[i]), ds.row(i), dy.cols());
              });
}

Var Graph::windows(Var x, std::size_t groups, std::size_t steps, std::size_t width) {
  const Tensor& X = value(x);
  require(X.rows() == groups * steps, "windows", "rows must equal groups * steps");
  require(width >= 1 && width <= steps, "windows", "width must be in [1, steps]");
  const std::size_t e = X.cols();
  const std::size_t per = steps - width + 1;
  Tensor y = Tensor::matrix(groups * per, width * e);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t t = 0; t < per; ++t) {
      std::copy_n(X.row(g * steps + t), width * e, y.row(g * per + t));
    }
  }
  return emit(std::move(y), needs(x),
              [this, x, groups, steps, width, self = static_cast<std::uint32_t>(nodes_.size())] {
                const Tensor& dy = nodes_[self].grad;
                Tensor& dx = gradient(x.id);
                const std::size_t e = dx.cols();
                const std::size_t per = steps - width + 1;
                for (std::size_t g = 0; g < groups; ++g) {
                  for (std::size_t t = 0; t < per; ++t) {
                    kn::add(dy.row(g * per + t), dx.row(g * steps + t), width * e);
                  }
                }
              });
}

Var Graph::max_pool(Var x, std::size_t groups) {
  const Tensor& X = value(x);
  require(groups > 0 && X.rows() % groups == 0, "max_pool", "rows not divisible into groups");
  const std::size_t per = X.rows() / groups, c = X.cols();
  Tensor y = Tensor::matrix(groups, c);
  std::vector<std::size_t> arg(groups * c);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t j = 0; j < c; ++j) {
      std::size_t best = g * per;
      for (std::size_t r = g * per + 1; r < (g + 1) * per; ++r) {
        if (X.at(r, j) > X.at(best, j)) best = r;
      }
      arg[g * c + j] = best;
      y.at(g, j) = X.at(best, j);
    }
  }
  return emit(std::move(y), needs(x), [this, x, arg = std::move(arg), self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    Tensor& dx = gradient(x.id);
    const std::size_t c = dy.cols();
    for (std::size_t i = 0; i < arg.size(); ++i) dx.at(arg[i], i % c) += dy[i];
  });
}

Var Graph::mean_pool(Var x, std::size_t groups) {
  const Tensor& X = value(x);
  require(groups > 0 && X.rows() % groups == 0, "mean_pool", "rows not divisible into groups");
  const std::size_t per = X.rows() / groups, c = X.cols();
  const double inv = 1.0 / static_cast<double>(per);
  Tensor y = Tensor::matrix(groups, c);
  for (std::size_t g = 0; g < groups; ++g) {
    for (std::size_t r = 0; r < per; ++r) kn::axpy(inv, X.row(g * per + r), y.row(g), c);
  }
  return emit(std::move(y), needs(x), [this, x, per, inv, self = static_cast<std::uint32_t>(nodes_.size())] {
    const Tensor& dy = nodes_[self].grad;
    Tensor& dx = gradient(x.id);
    for (std::size_t r = 0; r < dx.rows(); ++r) kn::axpy(inv, dy.row(r / per), dx.row(r), dx.cols());
  });
}

Var Graph::sum(Var a) {
  const Tensor& A = value(a);
  Tensor y = Tensor::matrix(1, 1, kn::sum(A.data(), A.size()));
  return emit(std::move(y), needs(a), [this, a, self = static_cast<std::uint32_t>(nodes_.size())] {
    const double g = nodes_[self].grad[0];
    Tensor& da = gradient(a.id);
    for (double& v : da.values()) v += g;
  });
}

Var Graph::nll(Var logits, std::vector<int> targets, std::vector<double> weights) {
  const Tensor& Z = value(logits);
  const std::size_t n = Z.rows(), c = Z.cols();
  require(targets.size() == n && weights.size() == n, "nll", "one target and weight per row required");
  Tensor probs = Tensor::matrix(n, c);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (targets[i] < 0) continue;
    require(static_cast<std::size_t>(targets[i]) < c, "nll", "target out of range");
    const double* z = Z.row(i);
    const double top = *std::max_element(z, z + c);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) {
      probs.row(i)[j] = std::exp(z[j] - top);
      s += probs.row(i)[j];
    }
    for (std::size_t j = 0; j < c; ++j) probs.row(i)[j] /= s;
    const double lse = top + std::log(s);
    loss += weights[i] * (lse - z[targets[i]]);
  }
  return emit(Tensor::matrix(1, 1, loss), needs(logits),
              [this, logits, targets = std::move(targets), weights = std::move(weights), probs = std::move(probs),
               self = static_cast<std::uint32_t>(nodes_.size())] {
                const double g = nodes_[self].grad[0];
                Tensor& dz = gradient(logits.id);
                const std::size_t c = dz.cols();
                for (std::size_t i = 0; i < targets.size(); ++i) {
                  if (targets[i] < 0) continue;
                  const double w = g * weights[i];
                  kn::axpy(w, probs.row(i), dz.row(i), c);
                  dz.row(i)[targets[i]] -= w;
                }
              });
}

Var Graph::bce_with_logits(Var logits, std::vector<double> labels, std::vector<double> weights) {
  const Tensor& Z = value(logits);
  require(Z.cols() == 1, "bce_with_logits", "logits must be a column");
  require(labels.size() == Z.rows() && weights.size() == Z.rows(), "bce_with_logits",
          "one label and weight per row required");
  double loss = 0.0;
  for (std::size_t i = 0; i < Z.rows(); ++i) {
    // -[y log s(z) + (1-y) log(1-s(z))] = softplus(z) - y z
    loss += weights[i] * (softplus(Z[i]) - labels[i] * Z[i]);
  }
  return emit(Tensor::matrix(1, 1, loss), needs(logits),
              [this, logits, labels = std::move(labels), weights = std::move(weights),
               self = static_cast<std::uint32_t>(nodes_.size())] {
                const double g = nodes_[self].grad[0];
                const Tensor& Z = val(logits.id);
                Tensor& dz = gradient(logits.id);
                for (std::size_t i = 0; i < Z.rows(); ++i) dz[i] += g * weights[i] * (stable_sigmoid(Z[i]) - labels[i]);
              });
}

void Graph::backward(Var loss) {
  const Tensor& L = value(loss);
  if (L.size() != 1) throw StructuralError("backward(loss) needs a scalar; use backward(out, upstream)");
  backward(loss, Tensor(L.shape(), 1.0));
}

void Graph::backward(Var out, const Tensor& upstream) {
  if (!recording_) throw UsageError("graph was built without gradient recording");
  if (consumed_) throw UsageError("backward already ran on this graph; run a fresh forward pass");
  const Tensor& Y = value(out);
  if (upstream.size() != Y.size()) throw StructuralError("upstream gradient shape mismatch");
  consumed_ = true;
  if (!nodes_[out.id].needs_grad) return;
  kn::add(upstream.data(), gradient(out.id).data(), upstream.size());
  for (std::size_t i = out.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.back) n.back();
    if (n.store != nullptr) {
      Tensor& pg = (*n.store)[n.param_index].grad;
      kn::add(n.grad.data(), pg.data(), pg.size());
    }
  }
}

}  // namespace seqdisc::nn
