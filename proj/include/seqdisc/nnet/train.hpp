#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"
#include "seqdisc/nnet/graph.hpp"

namespace seqdisc::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 32;
  std::size_t max_epochs = 10;
  /// Optimizer-step cap across all epochs; 0 = no cap.
  std::size_t max_steps = 0;
  std::uint64_t seed = 1;
  /// Dev checks (one per epoch) without improvement before stopping.
  std::size_t patience = 200;

  /// Throws ParameterError on a non-positive field. max_epochs may be 0.
  void validate() const;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

/// One bias-corrected Adam update from the accumulated gradients, which are
/// cleared afterwards. Moments are zero-initialized on first use.
void adam_step(ParamStore& params, const AdamConfig& config);
inline void adam_step(ParamStore& params, const TrainConfig& config) {
  adam_step(params, AdamConfig{config.learning_rate});
}

struct ParamCheck {
  std::string name;
  double max_rel_error = 0.0;
  bool pass = true;
};

struct GradCheckReport {
  std::vector<ParamCheck> params;
  double max_rel_error = 0.0;
  bool pass = true;
};

/// Builds the scalar loss on the given graph.
using Objective = std::function<Var(Graph&)>;

/// Compares reverse-mode gradients of `loss` w.r.t. every value in `params`
/// against central differences with step `step`. Per element error is
/// |a - n| / (|a| + |n| + 1e-8). `params` values are restored afterwards;
/// its gradient buffers are overwritten with the analytic gradient.
GradCheckReport grad_check(ParamStore& params, const Objective& loss, double tolerance, double step = 1e-4);
/// The comparison half of grad_check: takes the analytic gradient from the
/// store's gradient buffers as they are.
GradCheckReport compare_gradients(ParamStore& params, const Objective& loss, double tolerance, double step = 1e-4);

/// Text checkpoint of a ParamStore (names, shapes, values; optionally Adam
/// moments). Doubles are written in shortest round-trip form, so loading
/// reproduces every bit.
nlohmann::json params_to_json(const ParamStore& params, bool include_optimizer_state);
/// Loads values (and moments if present) into a store with the same layout.
void params_from_json(ParamStore& params, const nlohmann::json& doc);

}  // namespace seqdisc::nn
