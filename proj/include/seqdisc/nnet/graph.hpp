#pragma once

// Reverse-mode differentiation over a fixed inventory of rank-2 ops. A Graph
// records one forward pass; backward() walks it once in reverse and
// accumulates parameter gradients into the trainable ParamStores given at
// construction. Parameters from any other store enter as constants.

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "seqdisc/nnet/params.hpp"
#include "seqdisc/nnet/tensor.hpp"

namespace seqdisc::nn {

struct Var {
  std::uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
};

class Graph {
 public:
  /// Inference only: no gradient bookkeeping.
  Graph() = default;
  explicit Graph(std::vector<ParamStore*> trainable);

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return recording_; }
  std::size_t num_nodes() const { return nodes_.size(); }

  Var param(const ParamStore& store, std::size_t index);
  Var constant(Tensor t);

  const Tensor& value(Var v) const;
  /// Gradient of the last backward pass w.r.t. `v` (zeros if unreached).
  Tensor grad(Var v) const;

  Var matmul(Var a, Var b);
  Var add_row(Var a, Var bias);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var one_minus(Var a);
  Var scale(Var a, double s);

  Var tanh(Var a);
  Var relu(Var a);
  Var sigmoid(Var a);
  Var softmax(Var a);
  Var log_softmax(Var a);

  /// Rows of `table` picked by `ids` (embedding lookup).
  Var gather_rows(Var table, std::vector<int> ids);
  Var slice_cols(Var a, std::size_t begin, std::size_t end);
  Var slice_rows(Var a, std::size_t begin, std::size_t end);
  Var concat_cols(std::span<const Var> parts);
  Var concat_rows(std::span<const Var> parts);
  /// Copy of `base` with rows `dest[i]` replaced by row i of `src`.
  Var place_rows(Tensor base, Var src, std::vector<std::size_t> dest);

  /// `x` holds `groups` blocks of `steps` consecutive rows. Returns every
  /// window of `width` consecutive rows within a block, flattened into one
  /// row: shape [groups * (steps - width + 1), width * cols].
  Var windows(Var x, std::size_t groups, std::size_t steps, std::size_t width);
  /// Max (first index on ties) / mean over each of `groups` equal blocks of rows.
  Var max_pool(Var x, std::size_t groups);
  Var mean_pool(Var x, std::size_t groups);

  Var sum(Var a);
  /// sum_i w_i * -log softmax(logits_i)[targets_i]; rows with target < 0
  /// are skipped.
  Var nll(Var logits, std::vector<int> targets, std::vector<double> weights);
  /// sum_i w_i * BCE(sigmoid(logit_i), label_i) in the stable logits form.
  Var bce_with_logits(Var logits, std::vector<double> labels, std::vector<double> weights);

  /// Backpropagates from a [1 x 1] scalar.
  void backward(Var loss);
  /// Backpropagates an arbitrary upstream gradient of out's shape.
  void backward(Var out, const Tensor& upstream);

 private:
  struct Node {
    Tensor value;
    const Tensor* external = nullptr;
    Tensor grad;
    bool needs_grad = false;
    ParamStore* store = nullptr;
    std::size_t param_index = 0;
    std::function<void()> back;
  };

  const Node& node(Var v) const;
  const Tensor& val(std::uint32_t id) const {
    const Node& n = nodes_[id];
    return n.external ? *n.external : n.value;
  }
  Tensor& gradient(std::uint32_t id);
  bool needs(Var v) const { return recording_ && nodes_[v.id].needs_grad; }
  Var emit(Tensor value, bool needs_grad, std::function<void()> back);

  bool recording_ = false;
  bool consumed_ = false;
  std::vector<ParamStore*> trainable_;
  std::vector<Node> nodes_;
  std::map<std::pair<const ParamStore*, std::size_t>, Var> param_cache_;
};

}  // namespace seqdisc::nn
