// Acceptance suite: prints one PASS/FAIL line per criterion and exits non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "linrank/approx.h"
#include "linrank/baselines.h"
#include "linrank/explain.h"
#include "linrank/formulate.h"
#include "linrank/model.h"

namespace linrank {
namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::string detail;

  void Fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

ProblemSpec ExampleSpec(int k) {
  ProblemSpec spec;
  spec.relation = Relation({"A1", "A2", "A3"}, {{"r", {3, 2, 8}}, {"s", {4, 1, 15}}, {"t", {1, 1, 14}}});
  spec.ranking = GivenRanking::Strict({"r", "s", "t"});
  spec.k = k;
  return spec;
}

GivenRanking ShuffledRanking(const Relation& relation, std::mt19937_64& rng) {
  std::vector<std::string> ids;
  for (const TupleRecord& t : relation.tuples()) ids.push_back(t.id);
  std::shuffle(ids.begin(), ids.end(), rng);
  return GivenRanking::Strict(ids);
}

std::string Fmt(double v) {
  std::ostringstream s;
  s << v;
  return s.str();
}

Outcome ExampleInstance() {
  Outcome o;
  for (int k : {2, 3}) {
    const ExplanationReport sat = ExplainSat(ExampleSpec(k));
    if (sat.status != ReportStatus::kSatisfiable || !sat.verified) {
      o.Fail("SAT k=" + std::to_string(k) + " returned " + std::string(ToString(sat.status)));
    }
  }
  const ExplanationReport opt = ExplainOpt(ExampleSpec(3));
  if (opt.status != ReportStatus::kOptimal || opt.total_error != 0.0 || !opt.verified) {
    o.Fail("OPT k=3 returned " + std::string(ToString(opt.status)) + " error " + Fmt(opt.total_error));
  }
  if (o.pass) o.detail = "SAT k=2,3 verified; OPT k=3 error 0";
  return o;
}

Outcome Dominance() {
  Outcome o;
  // s dominates t, so the indicator "t above s" is resolved to 0.
  const ProblemSpec example = ExampleSpec(3);
  const OptProgram opt = BuildOpt(example, example.epsilon);
  for (const IndicatorPair& p : opt.layout.pairs) {
    if (p.s == 2 && p.r == 1) o.Fail("indicator for t above s was not pruned");
  }
  if (opt.layout.forced_below.size() < 2 || opt.layout.forced_below[1] < 1) {
    o.Fail("t is not counted as forced below s");
  }
  std::mt19937_64 rng(2024);
  int compared = 0;
  for (int trial = 0; trial < 25; ++trial) {
    const std::size_t n = 10 + rng() % 21;
    const std::size_t m = 2 + rng() % 3;
    const int k = 1 + static_cast<int>(rng() % 5);
    ProblemSpec spec;
    std::vector<TupleRecord> tuples = GenerateUniform(n, m, 100 + trial).tuples();
    // Coarse values make dominance pairs common.
    for (TupleRecord& t : tuples) {
      for (double& v : t.attrs) v = std::round(v * 5.0);
    }
    spec.relation = Relation(GenerateUniform(1, m, 0).columns(), tuples);
    spec.ranking = trial % 2 == 0 ? ShuffledRanking(spec.relation, rng) : RankBySum(spec.relation);
    spec.k = k;
    spec.epsilon.eps1 = 1e-6;
    SolveOptions pruned;
    SolveOptions full;
    full.prune = false;
    const ExplanationReport a = ExplainOpt(spec, pruned);
    const ExplanationReport b = ExplainOpt(spec, full);
    if (a.status != ReportStatus::kOptimal || b.status != ReportStatus::kOptimal) {
      o.Fail("trial " + std::to_string(trial) + " did not reach optimality");
      continue;
    }
    if (a.total_error != b.total_error) {
      o.Fail("trial " + std::to_string(trial) + ": pruned " + Fmt(a.total_error) + " vs unpruned " +
             Fmt(b.total_error));
    }
    ++compared;
  }
  if (o.pass) o.detail = "indicator pruned on the example; " + std::to_string(compared) + " instances agree";
  return o;
}

// Minimum position error over w = (w1, 1 - w1): every crossing point of two
// score lines, every midpoint between consecutive crossings, and both ends.
double TwoAttributeOracle(const ProblemSpec& spec) {
  const auto& t = spec.relation.tuples();
  std::vector<double> points = {0.0, 1.0};
  for (std::size_t a = 0; a < t.size(); ++a) {
    for (std::size_t b = a + 1; b < t.size(); ++b) {
      // (a1 - b1) w1 + (a2 - b2)(1 - w1) = 0
      const double slope = (t[a].attrs[0] - t[b].attrs[0]) - (t[a].attrs[1] - t[b].attrs[1]);
      if (slope == 0.0) continue;
      const double w1 = -(t[a].attrs[1] - t[b].attrs[1]) / slope;
      if (w1 > 0.0 && w1 < 1.0) points.push_back(w1);
    }
  }
  std::sort(points.begin(), points.end());
  std::vector<double> candidates = points;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) candidates.push_back(0.5 * (points[i] + points[i + 1]));
  double best = std::numeric_limits<double>::infinity();
  for (double w1 : candidates) {
    const std::vector<double> w = {w1, 1.0 - w1};
    best = std::min(best, PositionError(spec, w, 1e-12).Objective(spec.objective));
  }
  return best;
}

Outcome TwoAttributeOracleEquivalence() {
  Outcome o;
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + rng() % 6;
    ProblemSpec spec;
    spec.relation = GenerateUniform(n, 2, 500 + trial);
    spec.ranking = ShuffledRanking(spec.relation, rng);
    spec.k = 1 + static_cast<int>(rng() % std::min<std::size_t>(n, 5));
    spec.epsilon.eps1 = 1e-7;
    const ExplanationReport opt = ExplainOpt(spec);
    const double oracle = TwoAttributeOracle(spec);
    if (opt.status != ReportStatus::kOptimal) {
      o.Fail("trial " + std::to_string(trial) + " returned " + std::string(ToString(opt.status)));
    } else if (opt.total_error != oracle) {
      o.Fail("trial " + std::to_string(trial) + ": MILP " + Fmt(opt.total_error) + " vs oracle " + Fmt(oracle));
    }
  }
  if (o.pass) o.detail = "50 instances match the exhaustive interval oracle";
  return o;
}

Outcome SatOptConsistency() {
  Outcome o;
  std::mt19937_64 rng(11);
  int satisfiable = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 10 + rng() % 41;
    const std::size_t m = 2 + rng() % 3;
    ProblemSpec spec;
    spec.relation = GenerateUniform(n, m, 900 + trial);
    if (trial % 2 == 0) {
      std::vector<double> w(m);
      for (double& v : w) v = 0.1 + static_cast<double>(rng() % 100) / 100.0;
      spec.ranking = RankByWeights(spec.relation, w);
    } else {
      spec.ranking = BuildUnsatRanking(spec.relation);
    }
    spec.k = 1 + static_cast<int>(rng() % 5);
    const ExplanationReport sat = ExplainSat(spec);
    SolveOptions options;
    // The MILP must reach its answer without the SAT-based probe.
    options.zero_error_probe = false;
    const ExplanationReport opt = ExplainOpt(spec, options);
    if (opt.status != ReportStatus::kOptimal) {
      o.Fail("trial " + std::to_string(trial) + ": OPT returned " + std::string(ToString(opt.status)));
      continue;
    }
    const bool sat_yes = sat.status == ReportStatus::kSatisfiable;
    if (sat_yes != (opt.total_error == 0.0)) {
      o.Fail("trial " + std::to_string(trial) + ": SAT " + std::string(ToString(sat.status)) + " but OPT error " +
             Fmt(opt.total_error));
    }
    satisfiable += sat_yes ? 1 : 0;
  }
  if (o.pass) o.detail = std::to_string(satisfiable) + " satisfiable, " + std::to_string(50 - satisfiable) +
                         " unsatisfiable, all consistent";
  return o;
}

Outcome UnsatConstruction() {
  Outcome o;
  ProblemSpec spec;
  spec.relation = GenerateUniform(200, 8, 42);
  spec.ranking = BuildUnsatRanking(spec.relation);
  spec.k = 5;
  const ExplanationReport sat = ExplainSat(spec);
  if (sat.status != ReportStatus::kUnsatisfiable) o.Fail("SAT returned " + std::string(ToString(sat.status)));
  SolveOptions options;
  options.time_limit = 30.0;
  const ExplanationReport opt = ExplainOpt(spec, options);
  const double bound = opt.best_bound.value_or(0.0);
  const bool proven_positive = (opt.status == ReportStatus::kOptimal && opt.total_error > 0.0) || bound >= 1.0;
  if (!proven_positive) {
    o.Fail("OPT " + std::string(ToString(opt.status)) + " error " + Fmt(opt.total_error) + " bound " + Fmt(bound));
  }
  if (o.pass) {
    o.detail = "SAT UNSATISFIABLE; OPT " + std::string(ToString(opt.status)) + " error " + Fmt(opt.total_error) +
               ", lower bound " + Fmt(bound);
  }
  return o;
}

Outcome Monotonicity() {
  Outcome o;
  // (a) nested attribute subsets of one instance.
  const Relation full = GenerateUniform(20, 4, 31);
  const GivenRanking ranking = BuildUnsatRanking(full);
  double previous = std::numeric_limits<double>::infinity();
  std::string trail;
  for (std::size_t m = 1; m <= 4; ++m) {
    std::vector<std::string> columns(full.columns().begin(), full.columns().begin() + m);
    std::vector<TupleRecord> tuples;
    for (const TupleRecord& t : full.tuples()) {
      tuples.push_back({t.id, std::vector<double>(t.attrs.begin(), t.attrs.begin() + m)});
    }
    ProblemSpec spec;
    spec.relation = Relation(columns, tuples);
    spec.ranking = ranking;
    spec.k = 4;
    const ExplanationReport r = ExplainOpt(spec);
    if (r.status != ReportStatus::kOptimal) o.Fail("m=" + std::to_string(m) + " not optimal");
    if (r.total_error > previous) o.Fail("error rose when adding attribute " + std::to_string(m));
    previous = r.total_error;
    trail += (trail.empty() ? "" : ">=") + Fmt(r.total_error);
  }
  // (b) non-decreasing in k.
  previous = -1.0;
  std::string k_trail;
  for (int k = 1; k <= 6; ++k) {
    ProblemSpec spec;
    spec.relation = full;
    spec.ranking = ranking;
    spec.k = k;
    const ExplanationReport r = ExplainOpt(spec);
    if (r.status != ReportStatus::kOptimal) o.Fail("k=" + std::to_string(k) + " not optimal");
    if (r.total_error < previous) o.Fail("error fell at k=" + std::to_string(k));
    previous = r.total_error;
    k_trail += (k_trail.empty() ? "" : "<=") + Fmt(r.total_error);
  }
  // (c) cells: never worse than the seed, non-increasing in nested cells.
  ProblemSpec spec;
  spec.relation = GenerateUniform(60, 4, 77);
  spec.ranking = BuildUnsatRanking(spec.relation);
  spec.k = 5;
  CellOptions options;
  options.strategy = SeedStrategy::kLinearRegression;
  const std::vector<double> seed = SeedWeights(spec, options);
  const double seed_error = PositionError(spec, seed, spec.epsilon.tau).total;
  options.strategy = SeedStrategy::kExplicit;
  options.explicit_weights = seed;
  previous = seed_error;
  std::string c_trail = Fmt(seed_error);
  for (double c : {0.005, 0.02, 0.08, 0.3}) {
    options.cell_size = c;
    const ExplanationReport r = CellSolve(spec, options);
    if (r.total_error > seed_error) o.Fail("cell c=" + Fmt(c) + " worse than its seed");
    if (r.total_error > previous) o.Fail("cell error rose at c=" + Fmt(c));
    previous = r.total_error;
    c_trail += ">=" + Fmt(r.total_error);
  }
  if (o.pass) o.detail = "attributes " + trail + "; k " + k_trail + "; cells " + c_trail;
  return o;
}

Outcome NumericalRobustness() {
  Outcome o;
  // Under every admissible W the scores of b and c differ by 1e-5 * w_Y.
  ProblemSpec spec;
  spec.relation = Relation({"X", "Y"}, {{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, -1e-5}}});
  spec.ranking = GivenRanking::Strict({"a", "b", "c"});
  spec.k = 3;
  spec.epsilon.tau = 1e-6;
  spec.epsilon.eps1 = spec.epsilon.Floor();
  const ExplanationReport escalated = ExplainSat(spec);
  if (!escalated.verified) o.Fail("escalating run from the floor did not verify");
  ProblemSpec loose = spec;
  loose.epsilon.eps1 = 1e-10;
  loose.epsilon.max_escalations = 0;
  const ExplanationReport unchecked = ExplainSat(loose);
  if (unchecked.verified) o.Fail("eps1 = 1e-10 without escalation was reported as verified");
  if (o.pass) {
    o.detail = "floor start verified after " + std::to_string(escalated.escalations) +
               " escalations; eps1=1e-10 flagged unverified";
  }
  return o;
}

Outcome Baselines() {
  Outcome o;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ProblemSpec spec;
    spec.relation = GenerateUniform(40, 3, seed);
    spec.ranking = RankByWeights(spec.relation, std::vector<double>{0.6, 0.3, 0.1});
    spec.k = 5;
    if (ExplainSat(spec).status != ReportStatus::kSatisfiable) continue;
    const OrdinalFit fit = OrdinalRegressionWeights(spec, spec.epsilon);
    if (fit.penalty != 0.0) o.Fail("ordinal penalty " + Fmt(fit.penalty) + " on a satisfiable instance");
    if (!OrdinalRegressionReport(spec).verified) o.Fail("ordinal certificate did not verify");
  }
  ProblemSpec spec;
  spec.relation = GenerateUniform(60, 4, 5);
  spec.ranking = BuildUnsatRanking(spec.relation);
  spec.k = 5;
  double previous = std::numeric_limits<double>::infinity();
  for (std::int64_t budget : {1, 10, 100, 1000, 5000}) {
    const double error = SamplingSearch(spec, budget, 3).error;
    if (error > previous) o.Fail("sampling error rose at budget " + std::to_string(budget));
    previous = error;
  }
  // Scores under w_star evenly spaced; the last attribute absorbs the rest.
  const std::vector<double> w_star = {0.5, 0.3, 0.2};
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<TupleRecord> tuples;
  for (int t = 0; t < 200; ++t) {
    const double a = u(rng);
    const double b = u(rng);
    const double target = 1.0 - 0.003 * t;
    tuples.push_back({"t" + std::to_string(t), {a, b, (target - 0.5 * a - 0.3 * b) / 0.2}});
  }
  const Relation planted({"A1", "A2", "A3"}, tuples);
  const RegressionFit lr = LinearRegressionWeights(planted, RankByWeights(planted, w_star));
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    ab += lr.raw[i] * w_star[i];
    aa += lr.raw[i] * lr.raw[i];
    bb += w_star[i] * w_star[i];
  }
  const double cosine = ab / std::sqrt(aa * bb);
  if (!(cosine > 0.99)) o.Fail("LR cosine " + Fmt(cosine));
  if (o.pass) o.detail = "ordinal zero penalty and verified; sampling monotone; LR cosine " + Fmt(cosine);
  return o;
}

Outcome SatScalability() {
  Outcome o;
  ProblemSpec spec;
  spec.relation = GenerateUniform(100000, 8, 1);
  spec.ranking = RankBySum(spec.relation);
  spec.k = 10;
  const ExplanationReport r = ExplainSat(spec);
  if (r.status != ReportStatus::kSatisfiable || !r.verified) {
    o.Fail("SAT returned " + std::string(ToString(r.status)));
  } else {
    o.detail = "n=100000, m=8, k=10 satisfiable and verified";
  }
  return o;
}

struct Criterion {
  const char* name;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace
}  // namespace linrank

int main() {
  using linrank::Criterion;
  const std::vector<Criterion> criteria = {
      {"example-instance-exactness", 1.0, linrank::ExampleInstance},
      {"dominance-correctness", 60.0, linrank::Dominance},
      {"two-attribute-oracle-equivalence", 120.0, linrank::TwoAttributeOracleEquivalence},
      {"sat-opt-consistency", 600.0, linrank::SatOptConsistency},
      {"unsatisfiable-construction", 60.0, linrank::UnsatConstruction},
      {"monotonicity", 600.0, linrank::Monotonicity},
      {"numerical-robustness", 60.0, linrank::NumericalRobustness},
      {"baseline-sanity", 60.0, linrank::Baselines},
      {"sat-scalability-100k", 600.0, linrank::SatScalability},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    const auto start = linrank::Clock::now();
    linrank::Outcome outcome;
    try {
      outcome = c.run();
    } catch (const std::exception& e) {
      outcome.Fail(std::string("exception: ") + e.what());
    }
    const double seconds = std::chrono::duration<double>(linrank::Clock::now() - start).count();
    if (outcome.pass && seconds > c.budget_seconds) {
      outcome.Fail("took " + linrank::Fmt(seconds) + " s, budget " + linrank::Fmt(c.budget_seconds) + " s");
    }
    failures += outcome.pass ? 0 : 1;
    std::printf("%s %s (%.2f s): %s\n", outcome.pass ? "PASS" : "FAIL", c.name, seconds, outcome.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
