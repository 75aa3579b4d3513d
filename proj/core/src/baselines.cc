#include "linrank/baselines.h"

#include <Eigen/Dense>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

namespace linrank {
namespace {

using Clock = std::chrono::steady_clock;

constexpr int kMaxCuttingRounds = 2000;

struct RankPair {
  std::vector<double> d;  // attrs(higher) - attrs(lower)
  double gap = 0.0;       // required d.w
};

std::vector<RankPair> ChainPairs(const ProblemSpec& spec, const EpsilonConfig& eps) {
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  const std::size_t top = spec.TopCount();
  const Relation& rel = spec.relation;
  auto diff = [&](std::size_t a, std::size_t b) {
    std::vector<double> d(rel.num_attributes());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = rel.tuple(a).attrs[i] - rel.tuple(b).attrs[i];
    return d;
  };
  std::vector<RankPair> pairs;
  for (std::size_t j = 0; j + 1 < top; ++j) {
    if (spec.ranking.relations()[j] == Order::kEqual) {
      pairs.push_back({diff(idx[j], idx[j + 1]), 0.0});
      pairs.push_back({diff(idx[j + 1], idx[j]), 0.0});
    } else {
      pairs.push_back({diff(idx[j], idx[j + 1]), eps.eps1});
    }
  }
  for (std::size_t j = top; j < idx.size(); ++j) pairs.push_back({diff(idx[top - 1], idx[j]), 0.0});
  return pairs;
}

std::vector<lp::VarId> AddSimplexWeights(lp::Program& p, const ProblemSpec& spec) {
  std::vector<lp::VarId> w;
  lp::LinearExpr sum;
  for (const std::string& col : spec.relation.columns()) {
    w.push_back(p.AddContinuous("w_" + col, 0.0, 1.0));
    sum.Add(w.back(), 1.0);
  }
  p.AddConstraint(sum, lp::Sense::kEqual, 1.0, "simplex");
  for (const WeightConstraint& c : spec.predicate.constraints()) {
    lp::LinearExpr e;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (c.coefs[i] != 0.0) e.Add(w[i], c.coefs[i]);
    }
    p.AddConstraint(e, c.sense, c.rhs, "pred");
  }
  return w;
}

double Penalty(const std::vector<RankPair>& pairs, std::span<const double> w, double tau) {
  double total = 0.0;
  for (const RankPair& pair : pairs) {
    double v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) v += pair.d[i] * w[i];
    const double slack = pair.gap - v;
    if (slack > tau) total += slack;
  }
  return total;
}

OrdinalFit SolveDirect(const ProblemSpec& spec, const EpsilonConfig& eps, const std::vector<RankPair>& pairs,
                       double time_limit) {
  lp::Program p;
  const std::vector<lp::VarId> w = AddSimplexWeights(p, spec);
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const lp::VarId xi = p.AddContinuous("xi_" + std::to_string(k));
    p.AddToObjective(xi, 1.0);
    lp::LinearExpr e;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (pairs[k].d[i] != 0.0) e.Add(w[i], pairs[k].d[i]);
    }
    e.Add(xi, 1.0);
    p.AddConstraint(e, lp::Sense::kGreaterEqual, pairs[k].gap);
  }
  lp::SolverConfig config;
  config.feasibility_tol = eps.tau;
  config.time_limit = time_limit;
  const lp::Solution sol = lp::SolveLp(p, config);
  OrdinalFit fit;
  fit.pairs = pairs.size();
  fit.status = sol.status;
  if (sol.status != lp::SolveStatus::kOptimal) return fit;
  for (lp::VarId v : w) fit.weights.push_back(std::max(0.0, sol.values[v]));
  fit.penalty = Penalty(pairs, fit.weights, eps.tau);
  return fit;
}

// Kelley's cutting planes on min_w sum_p max(0, gap_p - d_p.w): each round
// adds the linearization theta >= sum_{p active at w} (gap_p - d_p.w).
OrdinalFit SolveCuttingPlanes(const ProblemSpec& spec, const EpsilonConfig& eps,
                              const std::vector<RankPair>& pairs, double time_limit) {
  const Clock::time_point start = Clock::now();
  const std::size_t m = spec.relation.num_attributes();
  lp::Program p;
  const std::vector<lp::VarId> w = AddSimplexWeights(p, spec);
  const lp::VarId theta = p.AddContinuous("theta");
  p.AddToObjective(theta, 1.0);

  OrdinalFit fit;
  fit.pairs = pairs.size();
  double best = lp::kInf;
  for (int round = 0; round < kMaxCuttingRounds; ++round) {
    lp::SolverConfig config;
    config.feasibility_tol = eps.tau;
    config.time_limit = time_limit - std::chrono::duration<double>(Clock::now() - start).count();
    const lp::Solution sol = lp::SolveLp(p, config);
    if (sol.status != lp::SolveStatus::kOptimal) {
      fit.status = fit.weights.empty() ? sol.status : lp::SolveStatus::kTimeoutBest;
      return fit;
    }
    std::vector<double> x(m);
    for (std::size_t i = 0; i < m; ++i) x[i] = std::max(0.0, sol.values[w[i]]);
    double value = 0.0;
    std::vector<double> grad(m, 0.0);
    double constant = 0.0;
    for (const RankPair& pair : pairs) {
      double v = 0.0;
      for (std::size_t i = 0; i < m; ++i) v += pair.d[i] * x[i];
      if (pair.gap - v <= 0.0) continue;
      value += pair.gap - v;
      constant += pair.gap;
      for (std::size_t i = 0; i < m; ++i) grad[i] += pair.d[i];
    }
    if (value < best) {
      best = value;
      fit.weights = x;
    }
    if (value - sol.values[theta] <= std::max(eps.tau, 1e-9 * std::abs(value))) {
      fit.status = lp::SolveStatus::kOptimal;
      fit.penalty = Penalty(pairs, fit.weights, eps.tau);
      return fit;
    }
    lp::LinearExpr cut;
    cut.Add(theta, 1.0);
    for (std::size_t i = 0; i < m; ++i) {
      if (grad[i] != 0.0) cut.Add(w[i], grad[i]);
    }
    p.AddConstraint(cut, lp::Sense::kGreaterEqual, constant, "cut" + std::to_string(round));
  }
  fit.status = lp::SolveStatus::kTimeoutBest;
  fit.penalty = Penalty(pairs, fit.weights, eps.tau);
  return fit;
}

ExplanationReport BaselineReport(const ProblemSpec& spec, std::vector<double> weights) {
  ExplanationReport report;
  report.mode = "baseline";
  report.k = spec.k;
  report.n = spec.relation.size();
  report.objective = spec.objective;
  report.attributes = spec.relation.columns();
  report.epsilon = spec.epsilon;
  report.weights = std::move(weights);
  if (report.has_weights()) {
    EvaluateReport(report, spec);
    report.status = report.total_error == 0.0 ? ReportStatus::kSatisfiable : ReportStatus::kFeasible;
    report.verified = Verify(report, spec);
  } else {
    report.status = ReportStatus::kInfeasible;
  }
  return report;
}

}  // namespace

RegressionFit LinearRegressionWeights(const Relation& relation, const GivenRanking& ranking) {
  ranking.CheckAgainst(relation);
  const std::size_t n = ranking.size();
  const std::size_t m = relation.num_attributes();
  Eigen::MatrixXd x(n, m + 1);
  Eigen::VectorXd y(n);
  for (std::size_t pos = 0; pos < n; ++pos) {
    const TupleRecord& t = relation.tuple(*relation.IndexOf(ranking.order()[pos]));
    for (std::size_t i = 0; i < m; ++i) x(pos, i) = t.attrs[i];
    x(pos, m) = 1.0;
    y(pos) = -static_cast<double>(ranking.RankAt(pos));
  }
  Eigen::MatrixXd normal = x.transpose() * x;
  normal.diagonal().array() += 1e-9;
  const Eigen::VectorXd beta = normal.ldlt().solve(x.transpose() * y);

  RegressionFit fit;
  fit.raw.assign(beta.data(), beta.data() + m);
  fit.intercept = beta(m);
  double sum = 0.0;
  for (double v : fit.raw) {
    fit.projected.push_back(std::max(0.0, v));
    sum += fit.projected.back();
  }
  if (sum > 0.0) {
    for (double& v : fit.projected) v /= sum;
  } else {
    fit.projected.assign(m, 1.0 / static_cast<double>(m));
  }
  return fit;
}

OrdinalFit OrdinalRegressionWeights(const ProblemSpec& spec, const EpsilonConfig& eps, double time_limit,
                                    std::size_t direct_pair_limit) {
  spec.Validate();
  const std::vector<RankPair> pairs = ChainPairs(spec, eps);
  if (pairs.size() <= direct_pair_limit) return SolveDirect(spec, eps, pairs, time_limit);
  return SolveCuttingPlanes(spec, eps, pairs, time_limit);
}

SamplingResult SamplingSearch(const ProblemSpec& spec, std::int64_t budget, std::uint64_t seed,
                              double time_budget) {
  if (budget <= 0) throw std::invalid_argument("sampling budget must be positive");
  const Clock::time_point start = Clock::now();
  const std::size_t m = spec.relation.num_attributes();
  std::mt19937_64 rng(seed);
  std::exponential_distribution<double> exp(1.0);
  SamplingResult out;
  std::vector<double> w(m);
  const double tol = std::max(1e-9, 10.0 * spec.epsilon.tau);
  for (std::int64_t s = 0; s < budget; ++s) {
    if ((s & 63) == 63 && std::chrono::duration<double>(Clock::now() - start).count() > time_budget) break;
    double sum = 0.0;
    for (double& v : w) {
      v = exp(rng);
      sum += v;
    }
    for (double& v : w) v /= sum;
    ++out.samples;
    if (!spec.predicate.Satisfied(w, tol)) continue;
    const double error = PositionError(spec, w, spec.epsilon.tau).Objective(spec.objective);
    if (out.weights.empty() || error < out.error) {
      out.weights = w;
      out.error = error;
      out.best_index = s;
    }
  }
  return out;
}

ExplanationReport LinearRegressionReport(const ProblemSpec& spec) {
  spec.Validate();
  const RegressionFit fit = LinearRegressionWeights(spec.relation, spec.ranking);
  ExplanationReport report = BaselineReport(spec, fit.projected);
  report.raw_coefficients = fit.raw;
  report.notes.push_back("linear regression on -rank over all n tuples; intercept " +
                         std::to_string(fit.intercept));
  return report;
}

ExplanationReport OrdinalRegressionReport(const ProblemSpec& spec, double time_limit) {
  const OrdinalFit fit = OrdinalRegressionWeights(spec, spec.epsilon, time_limit);
  ExplanationReport report = BaselineReport(spec, fit.weights);
  report.notes.push_back("ordinal regression over " + std::to_string(fit.pairs) +
                         " pairs; penalty " + std::to_string(fit.penalty) + " (" +
                         std::string(lp::ToString(fit.status)) + ")");
  return report;
}

ExplanationReport SamplingReport(const ProblemSpec& spec, std::int64_t budget, std::uint64_t seed) {
  spec.Validate();
  const SamplingResult result = SamplingSearch(spec, budget, seed);
  ExplanationReport report = BaselineReport(spec, result.weights);
  report.notes.push_back("best of " + std::to_string(result.samples) + " samples (seed " +
                         std::to_string(seed) + ")");
  return report;
}

}  // namespace linrank
