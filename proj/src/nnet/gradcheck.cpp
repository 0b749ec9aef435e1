#include <algorithm>
#include <cmath>

#include "seqdisc/nnet/train.hpp"

namespace seqdisc::nn {

namespace {

double evaluate(const Objective& loss) {
  Graph g;
  Var out = loss(g);
  return g.value(out)[0];
}

}  // namespace

GradCheckReport grad_check(ParamStore& params, const Objective& loss, double tolerance, double step) {
  params.zero_grad();
  {
    Graph g({&params});
    g.backward(loss(g));
  }
  return compare_gradients(params, loss, tolerance, step);
}

GradCheckReport compare_gradients(ParamStore& params, const Objective& loss, double tolerance, double step) {
  GradCheckReport report;
  for (Param& p : params) {
    ParamCheck pc;
    pc.name = p.name;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double saved = p.value[i];
      p.value[i] = saved + step;
      const double up = evaluate(loss);
      p.value[i] = saved - step;
      const double down = evaluate(loss);
      p.value[i] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic = p.grad[i];
      const double rel = std::abs(analytic - numeric) / (std::abs(analytic) + std::abs(numeric) + 1e-8);
      pc.max_rel_error = std::max(pc.max_rel_error, rel);
    }
    pc.pass = pc.max_rel_error <= tolerance;
    report.max_rel_error = std::max(report.max_rel_error, pc.max_rel_error);
    report.pass = report.pass && pc.pass;
    report.params.push_back(std::move(pc));
  }
  return report;
}

}  // namespace seqdisc::nn
