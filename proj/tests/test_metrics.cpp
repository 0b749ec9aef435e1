#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"
#include "seqdisc/error.hpp"
#include "seqdisc/metrics.hpp"

using namespace seqdisc;
using namespace seqdisc::metrics;

namespace {

ScoreSet constant(double r, double g, std::size_t n) {
  return {std::vector<double>(n, r), std::vector<double>(n, g), {}, {}};
}

ScoreSet random_scores(std::size_t n, double shift, std::uint64_t seed) {
  Rng rng(seed);
  ScoreSet s;
  for (std::size_t i = 0; i < n; ++i) {
    s.real.push_back(std::min(1.0, rng.uniform() * (1.0 - shift) + shift));
    s.gen.push_back(rng.uniform() * (1.0 - shift));
  }
  return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("optimal discriminator") {
  CHECK(optimal_d(0.1, 0.1) == 0.5);
  CHECK(optimal_d(0.2, 0.1) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(optimal_d(0.3, 0.0) == 1.0);
  CHECK_THROWS_AS(optimal_d(0.0, 0.0), UndefinedPointError);
  CHECK_THROWS_AS(optimal_d(-0.1, 0.2), ParameterError);
}

TEST_CASE("approximate discrepancy") {
  auto a = approx_discrepancy(constant(0.7, 0.3, 10));
  CHECK(a.u_d == doctest::Approx(0.7));
  CHECK(a.u_theta == doctest::Approx(0.3));
  CHECK(a.d_a == doctest::Approx(0.4));
  ScoreSet same{{0.1, 0.9, 0.4}, {0.4, 0.1, 0.9}, {}, {}};
  CHECK(approx_discrepancy(same).d_a == 0.0);
  CHECK_THROWS_AS(approx_discrepancy(ScoreSet{{}, {0.5}, {}, {}}), ParameterError);
  CHECK_THROWS_AS(approx_discrepancy(ScoreSet{{1.5}, {0.5}, {}, {}}), ParameterError);
}

TEST_CASE("absolute discrepancy and threshold convention") {
  auto ab = abs_discrepancy(constant(0.9, 0.5, 7));
  CHECK(ab.d_s == 1.0);
  CHECK(ab.accuracy == 1.0);
  // a generated-side score equal to the threshold is "generated", a real one is a miss
  ScoreSet tie{{0.5, 0.8}, {0.5, 0.2}, {}, {}};
  CHECK(abs_discrepancy(tie).accuracy == 0.75);
  CHECK(abs_discrepancy(tie).d_s == 0.5);

  // 71 of 100 right on each side
  ScoreSet t1;
  for (int i = 0; i < 100; ++i) {
    t1.real.push_back(i < 71 ? 0.8 : 0.2);
    t1.gen.push_back(i < 71 ? 0.2 : 0.8);
  }
  auto r = abs_discrepancy(t1);
  CHECK(r.accuracy == doctest::Approx(0.71));
  CHECK(r.d_s == doctest::Approx(0.42));
}

TEST_CASE("unbalanced sets use the four-term form") {
  ScoreSet s{{0.9, 0.9, 0.1}, {0.1}, {}, {}};
  // 1/2 [2/3 - 1/3 + 1 - 0]
  CHECK(abs_discrepancy(s).d_s == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("two-outcome oracle by hand") {
  auto pd = fixtures::two_outcome(0.8);
  auto pt = fixtures::two_outcome(0.5);
  OracleDensities o(pd, pt);
  CHECK(o.size() == 2);
  auto s = o.optimal_scores();
  auto a = approx_discrepancy(s);
  // D*(tok) = 0.8/1.3, D*([]) = 0.2/0.7
  const double da = 0.8 / 1.3, de = 0.2 / 0.7;
  CHECK(a.u_d == doctest::Approx(0.8 * da + 0.2 * de).epsilon(1e-14));
  CHECK(a.u_theta == doctest::Approx(0.5 * da + 0.5 * de).epsilon(1e-14));
  CHECK(a.u_d == doctest::Approx(0.5495).epsilon(1e-4));
  CHECK(a.u_theta == doctest::Approx(0.4505).epsilon(1e-4));
  CHECK(a.d_a == doctest::Approx(0.0989).epsilon(1e-3));
  CHECK(std::abs(abs_discrepancy(s).d_s - 0.3) < 1e-12);
  CHECK(std::abs(tv_exact(o) - 0.3) < 1e-12);
  CHECK(std::abs(da_exact(o) - a.d_a) < 1e-12);
  CHECK(constraint_residual(s) < 1e-12);
}

TEST_CASE("oracle identity and disjoint cases") {
  auto src = corpus::GroundTruthSource::make(2, 3, 1, 4, 0.5);
  OracleDensities self(src, src);
  CHECK(tv_exact(self) == 0.0);
  CHECK(da_exact(self) == 0.0);
  CHECK(approx_discrepancy(self.optimal_scores()).d_a == doctest::Approx(0.0).epsilon(1e-15));

  auto always = fixtures::two_outcome(1.0);
  auto never = fixtures::two_outcome(0.0);
  OracleDensities disjoint(always, never);
  CHECK(tv_exact(disjoint) == 1.0);
  CHECK(abs_discrepancy(disjoint.optimal_scores()).d_s == 1.0);

  auto big = corpus::GroundTruthSource::make(2, 5, 1, 6, 0.5);
  CHECK_THROWS_AS(OracleDensities(big, big, 1000), CapacityError);
  auto shorter = corpus::GroundTruthSource::make(2, 3, 1, 3, 0.5);
  CHECK_THROWS_AS(OracleDensities(src, shorter), ParameterError);
}

TEST_CASE("constraint residual") {
  CHECK(constraint_residual(0.7, 0.3) == doctest::Approx(0.0));
  CHECK(constraint_residual(0.9, 0.9) == doctest::Approx(0.4));
}

TEST_CASE("Monte Carlo total variation") {
  auto pd = fixtures::two_outcome(0.8);
  auto pt = fixtures::two_outcome(0.5);
  OracleDensities o(pd, pt);
  CHECK(std::abs(ds_estimate_appendix_a(o, 100000, 3) - 0.3) <= 0.02);
  OracleDensities same(pd, pd);
  CHECK(std::abs(ds_estimate_appendix_a(same, 10000, 3)) <= 0.05);
  CHECK_THROWS_AS(ds_estimate_appendix_a(o, 99, 3), ParameterError);
  CHECK(ds_estimate_appendix_a(o, 1000, 8) == ds_estimate_appendix_a(o, 1000, 8));
}

TEST_CASE("bootstrap intervals") {
  auto flat = constant(0.6, 0.4, 50);
  auto ci = bootstrap_ci(flat, Statistic::kDa, 500, 1);
  CHECK(ci.lo == doctest::Approx(0.2));
  CHECK(ci.hi == doctest::Approx(0.2));
  CHECK_THROWS_AS(bootstrap_ci(flat, Statistic::kDs, 199, 1), ParameterError);

  auto small = random_scores(400, 0.2, 5);
  auto large = random_scores(1600, 0.2, 6);
  for (Statistic st : {Statistic::kDa, Statistic::kDs}) {
    auto a = bootstrap_ci(small, st, 1000, 7);
    auto b = bootstrap_ci(large, st, 1000, 7);
    const double ratio = (a.hi - a.lo) / (b.hi - b.lo);
    CHECK(ratio == doctest::Approx(2.0).epsilon(0.3));
    auto again = bootstrap_ci(small, st, 1000, 7);
    CHECK(again.lo == a.lo);
    CHECK(again.hi == a.hi);
    const double point = st == Statistic::kDa ? approx_discrepancy(small).d_a : abs_discrepancy(small).d_s;
    CHECK(a.lo <= point);
    CHECK(point <= a.hi);
  }
}

TEST_CASE("exponential moving average") {
  std::vector<double> x{1, 0, 0};
  auto y = ema(x, 0.1);
  CHECK(y[0] == 1.0);
  CHECK(y[1] == doctest::Approx(0.9));
  CHECK(y[2] == doctest::Approx(0.81));
  CHECK(ema(x, 1.0) == x);
  std::vector<double> c(5, 0.37);
  for (double v : ema(c, 0.3)) CHECK(v == doctest::Approx(0.37).epsilon(1e-15));
  CHECK_THROWS_AS(ema(x, 0.0), ParameterError);
  CHECK_THROWS_AS(ema(x, 1.5), ParameterError);
}

TEST_CASE("reports round-trip through json and csv") {
  auto s = random_scores(300, 0.1, 9);
  ReportOptions opt;
  opt.resamples = 300;
  opt.seed = 4;
  auto r = make_report(s, opt);
  CHECK(r.n_real == 300);
  CHECK(r.d_s == doctest::Approx(2 * r.accuracy - 1));
  CHECK(r.ci_d_s.lo <= r.d_s);
  auto back = report_from_json(nlohmann::json::parse(report_to_json(r).dump()));
  CHECK(back.d_s == r.d_s);
  CHECK(back.ci_d_a.hi == r.ci_d_a.hi);
  CHECK(report_csv_row(back) == report_csv_row(r));
  CHECK(report_csv_header().rfind("d_s,d_a,accuracy", 0) == 0);

  ScoreSet worse{{0.1, 0.2}, {0.9, 0.8}, {}, {}};
  opt.resamples = 200;
  auto w = make_report(worse, opt);
  CHECK(w.below_chance);
  CHECK(w.d_s == -1.0);
  CHECK(fmt(0.5, 3) == "0.500");
  CHECK(fmt(std::nan("")).empty());
}

}
