#include "seqdisc/error.hpp"
#include "seqdisc/metrics.hpp"

namespace seqdisc::metrics {

DiscrepancyReport make_report(const ScoreSet& scores, const ReportOptions& options) {
  const auto approx = approx_discrepancy(scores);
  const auto abs = abs_discrepancy(scores, options.threshold);
  DiscrepancyReport r;
  r.d_s = abs.d_s;
  r.d_a = approx.d_a;
  r.accuracy = abs.accuracy;
  r.u_d = approx.u_d;
  r.u_theta = approx.u_theta;
  r.constraint_residual = constraint_residual(approx.u_d, approx.u_theta);
  r.n_real = scores.real.size();
  r.n_gen = scores.gen.size();
  r.threshold = options.threshold;
  r.below_chance = abs.accuracy < 0.5;
  if (scores.weighted()) {
    // Exact expectations carry no sampling uncertainty.
    r.ci_d_s = {r.d_s, r.d_s};
    r.ci_d_a = {r.d_a, r.d_a};
  } else {
    r.ci_d_s = bootstrap_ci(scores, Statistic::kDs, options.resamples, derive_seed(options.seed, "bootstrap/d_s"),
                            0.95, options.threshold);
    r.ci_d_a = bootstrap_ci(scores, Statistic::kDa, options.resamples, derive_seed(options.seed, "bootstrap/d_a"),
                            0.95, options.threshold);
  }
  return r;
}

std::string report_csv_header() {
  return "d_s,d_a,accuracy,u_d,u_theta,residual,ci_d_s_lo,ci_d_s_hi,ci_d_a_lo,ci_d_a_hi,n_real,n_gen";
}

std::string report_csv_row(const DiscrepancyReport& r) {
  return fmt(r.d_s) + "," + fmt(r.d_a) + "," + fmt(r.accuracy) + "," + fmt(r.u_d) + "," + fmt(r.u_theta) + "," +
         fmt(r.constraint_residual) + "," + fmt(r.ci_d_s.lo) + "," + fmt(r.ci_d_s.hi) + "," + fmt(r.ci_d_a.lo) +
         "," + fmt(r.ci_d_a.hi) + "," + std::to_string(r.n_real) + "," + std::to_string(r.n_gen);
}

nlohmann::json report_to_json(const DiscrepancyReport& r) {
  nlohmann::ordered_json doc;
  doc["d_s"] = r.d_s;
  doc["d_a"] = r.d_a;
  doc["accuracy"] = r.accuracy;
  doc["u_d"] = r.u_d;
  doc["u_theta"] = r.u_theta;
  doc["constraint_residual"] = r.constraint_residual;
  doc["ci_d_s"] = {r.ci_d_s.lo, r.ci_d_s.hi};
  doc["ci_d_a"] = {r.ci_d_a.lo, r.ci_d_a.hi};
  doc["n_real"] = r.n_real;
  doc["n_gen"] = r.n_gen;
  doc["threshold"] = r.threshold;
  doc["below_chance"] = r.below_chance;
  return nlohmann::json::parse(doc.dump());
}

DiscrepancyReport report_from_json(const nlohmann::json& doc) {
  try {
    DiscrepancyReport r;
    r.d_s = doc.at("d_s").get<double>();
    r.d_a = doc.at("d_a").get<double>();
    r.accuracy = doc.at("accuracy").get<double>();
    r.u_d = doc.at("u_d").get<double>();
    r.u_theta = doc.at("u_theta").get<double>();
    r.constraint_residual = doc.at("constraint_residual").get<double>();
    r.ci_d_s = {doc.at("ci_d_s").at(0).get<double>(), doc.at("ci_d_s").at(1).get<double>()};
    r.ci_d_a = {doc.at("ci_d_a").at(0).get<double>(), doc.at("ci_d_a").at(1).get<double>()};
    r.n_real = doc.at("n_real").get<std::size_t>();
    r.n_gen = doc.at("n_gen").get<std::size_t>();
    r.threshold = doc.at("threshold").get<double>();
    r.below_chance = doc.at("below_chance").get<bool>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParameterError(std::string("malformed report document: ") + e.what());
  }
}

}  // namespace seqdisc::metrics
