#include <cmath>

#include "doctest.h"
#include "gradcases.hpp"
#include "seqdisc/error.hpp"
#include "seqdisc/nnet/layers.hpp"
#include "seqdisc/nnet/train.hpp"

using namespace seqdisc;
using namespace seqdisc::nn;

namespace {

void run_cases(const std::vector<gradcases::Case>& cases, int seeds) {
  for (const auto& c : cases) {
    for (int s = 1; s <= seeds; ++s) {
      const auto report = c.run(static_cast<std::uint64_t>(s));
      INFO(c.name << " seed " << s << " max rel error " << report.max_rel_error);
      CHECK(report.pass);
    }
  }
}

}  // namespace

TEST_SUITE("nnet") {

TEST_CASE("every op passes finite differences over 20 seeds") {
  set_checked_mode(true);
  run_cases(gradcases::op_cases(), 20);
  set_checked_mode(false);
}

TEST_CASE("every layer passes finite differences over 20 seeds") {
  set_checked_mode(true);
  run_cases(gradcases::layer_cases(), 20);
  set_checked_mode(false);
}

TEST_CASE("tensor shapes") {
  Tensor t({2, 3, 4});
  CHECK(t.rows() == 2);
  CHECK(t.cols() == 12);
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), StructuralError);
}

TEST_CASE("identity and zero dense layers") {
  Rng rng(1);
  Graph g;
  Tensor x = gradcases::away_from_zero(3, 2, rng);
  Var in = g.constant(x);
  CHECK(g.value(Identity{}.forward(g, in)) == x);

  ParamStore ps;
  Dense d(ps, "d", 2, 4, rng, Init::kZero);
  const Tensor& y = g.value(d.forward(g, ps, in));
  for (double v : y.values()) CHECK(v == 0.0);
}

TEST_CASE("shape mismatches are structural errors") {
  Graph g;
  Var a = g.constant(Tensor::matrix(2, 3));
  Var b = g.constant(Tensor::matrix(2, 3));
  CHECK_THROWS_AS(g.matmul(a, b), StructuralError);
  CHECK_THROWS_AS(g.add(a, g.constant(Tensor::matrix(3, 2))), StructuralError);
}

TEST_CASE("w^2 at 3 has gradient 6") {
  ParamStore ps;
  ps.add("w", Tensor({1, 1}, std::vector<double>{3.0}));
  Graph g({&ps});
  Var w = g.param(ps, 0);
  g.backward(g.mul(w, w));
  CHECK(ps[0].grad[0] == 6.0);
}

TEST_CASE("constant graph leaves gradients at zero") {
  ParamStore ps;
  ps.add("w", Tensor({2, 2}, 1.5));
  Graph g({&ps});
  Var c = g.constant(Tensor::matrix(1, 1, 2.0));
  g.backward(g.mul(c, c));
  for (double v : ps[0].grad.values()) CHECK(v == 0.0);
}

TEST_CASE("backward misuse is a usage error") {
  ParamStore ps;
  ps.add("w", Tensor({1, 1}, 1.0));
  Graph inference;
  Var w = inference.param(ps, 0);
  CHECK_THROWS_AS(inference.backward(inference.mul(w, w)), UsageError);

  Graph g({&ps});
  Var loss = g.sum(g.param(ps, 0));
  g.backward(loss);
  CHECK_THROWS_AS(g.backward(loss), UsageError);
  Graph other;
  CHECK_THROWS_AS(other.value(loss), UsageError);
}

TEST_CASE("checked mode turns non-finite values into errors") {
  set_checked_mode(true);
  Graph g;
  Var a = g.constant(Tensor::matrix(1, 1, 1e308));
  CHECK_THROWS_AS(g.scale(a, 10.0), NumericError);
  set_checked_mode(false);
  Graph h;
  Var b = h.constant(Tensor::matrix(1, 1, 1e308));
  CHECK_FALSE(h.value(h.scale(b, 10.0)).all_finite());
}

TEST_CASE("grad_check: linear regression passes, corrupted gradient fails, empty store passes") {
  Rng rng(4);
  ParamStore ps;
  Dense lin(ps, "lin", 3, 1, rng);
  Tensor x = gradcases::away_from_zero(8, 3, rng);
  Tensor y = gradcases::away_from_zero(8, 1, rng);
  Objective mse = [&](Graph& g) {
    Var r = g.sub(lin.forward(g, ps, g.constant(x)), g.constant(y));
    return g.scale(g.sum(g.mul(r, r)), 1.0 / 8);
  };
  CHECK(grad_check(ps, mse, 1e-4).pass);

  ps.zero_grad();
  {
    Graph g({&ps});
    g.backward(mse(g));
  }
  ps[0].grad[1] += 0.1;
  const auto bad = compare_gradients(ps, mse, 1e-4);
  CHECK_FALSE(bad.pass);
  CHECK_FALSE(bad.params[0].pass);
  CHECK(bad.params[1].pass);

  ParamStore none;
  const auto vacuous = grad_check(none, [](Graph& g) { return g.constant(Tensor::matrix(1, 1, 2.0)); }, 1e-4);
  CHECK(vacuous.pass);
  CHECK(vacuous.params.empty());
}

TEST_CASE("adam: zero gradient, first step, determinism") {
  ParamStore ps;
  ps.add("w", Tensor({1, 3}, std::vector<double>{1.0, -2.0, 0.5}));
  const Tensor before = ps[0].value;
  adam_step(ps, AdamConfig{0.01});
  CHECK(ps[0].value == before);
  CHECK(ps.adam_steps() == 1);

  ParamStore q;
  q.add("w", Tensor({1, 3}, std::vector<double>{1.0, -2.0, 0.5}));
  q[0].grad = Tensor({1, 3}, std::vector<double>{0.3, -4.0, 1e-3});
  adam_step(q, AdamConfig{0.01});
  CHECK(q[0].value[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-6));
  CHECK(q[0].value[1] == doctest::Approx(-2.0 + 0.01).epsilon(1e-6));
  CHECK(q[0].value[2] == doctest::Approx(0.5 - 0.01).epsilon(1e-4));
  for (double g : q[0].grad.values()) CHECK(g == 0.0);

  auto run = [] {
    Rng rng(9);
    ParamStore s;
    Dense d(s, "d", 2, 2, rng);
    Tensor x = gradcases::away_from_zero(4, 2, rng);
    for (int i = 0; i < 10; ++i) {
      Graph g({&s});
      g.backward(gradcases::project(g, g.tanh(d.forward(g, s, g.constant(x))), 3));
      adam_step(s, AdamConfig{0.05});
    }
    return s.hash();
  };
  CHECK(run() == run());
}

TEST_CASE("checkpoint round trip reproduces every bit") {
  Rng rng(5);
  ParamStore ps;
  GruCell cell(ps, "g", 3, 4, rng);
  for (auto& p : ps) p.grad = Tensor(p.value.shape(), 0.123456789);
  adam_step(ps, AdamConfig{0.01});
  const auto doc = params_to_json(ps, true);

  Rng other(6);
  ParamStore fresh;
  GruCell cell2(fresh, "g", 3, 4, other);
  CHECK(fresh.hash() != ps.hash());
  params_from_json(fresh, nlohmann::json::parse(doc.dump()));
  CHECK(fresh.hash() == ps.hash());
  CHECK(fresh.adam_steps() == 1);
  for (std::size_t i = 0; i < ps.size(); ++i) {
    CHECK(fresh[i].m == ps[i].m);
    CHECK(fresh[i].v == ps[i].v);
  }

  ParamStore wrong;
  Dense d(wrong, "d", 2, 2, rng);
  CHECK_THROWS_AS(params_from_json(wrong, doc), StructuralError);
}

TEST_CASE("train config validation") {
  TrainConfig c;
  CHECK_NOTHROW(c.validate());
  c.learning_rate = 0.0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = TrainConfig{};
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

}
