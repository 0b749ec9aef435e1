#include <cmath>

#include "seqdisc/error.hpp"
#include "seqdisc/nnet/train.hpp"

namespace seqdisc::nn {

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ParameterError("learning_rate must be > 0");
  if (batch_size == 0) throw ParameterError("batch_size must be >= 1");
  if (seed == 0) throw ParameterError("seed must be non-zero");
  if (patience == 0) throw ParameterError("patience must be >= 1");
}

void adam_step(ParamStore& params, const AdamConfig& config) {
  const std::uint64_t t = params.adam_steps() + 1;
  params.set_adam_steps(t);
  const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(t));
  for (Param& p : params) {
    if (p.m.size() != p.value.size()) p.m = Tensor(p.value.shape(), 0.0);
    if (p.v.size() != p.value.size()) p.v = Tensor(p.value.shape(), 0.0);
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      p.m[i] = config.beta1 * p.m[i] + (1.0 - config.beta1) * g;
      p.v[i] = config.beta2 * p.v[i] + (1.0 - config.beta2) * g * g;
      const double mhat = p.m[i] / c1;
      const double vhat = p.v[i] / c2;
      p.value[i] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.epsilon);
    }
    p.grad.fill(0.0);
  }
}

}  // namespace seqdisc::nn
