#include "linrank/explain.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "json.hpp"

namespace linrank {
namespace {

ProblemSpec ExampleSpec(int k) {
  ProblemSpec spec;
  spec.relation = Relation({"A1", "A2", "A3"}, {{"r", {3, 2, 8}}, {"s", {4, 1, 15}}, {"t", {1, 1, 14}}});
  spec.ranking = GivenRanking::Strict({"r", "s", "t"});
  spec.k = k;
  return spec;
}

// a = (1, 0), b = (0, 1), c = (1, -1e-5) ranked a > b > c: admissible W
// exist only for eps1 below about 2.5e-6.
ProblemSpec NearTieSpec() {
  ProblemSpec spec;
  spec.relation = Relation({"X", "Y"}, {{"a", {1, 0}}, {"b", {0, 1}}, {"c", {1, -1e-5}}});
  spec.ranking = GivenRanking::Strict({"a", "b", "c"});
  spec.k = 3;
  spec.epsilon.tau = 1e-6;
  return spec;
}

TEST(PositionErrorTest, ExampleWeights) {
  const ProblemSpec spec = ExampleSpec(3);
  const std::vector<double> w = {0.2, 0.7, 0.1};
  const ErrorBreakdown err = PositionError(spec, w, 1e-9);
  EXPECT_DOUBLE_EQ(err.total, 2.0);
  EXPECT_DOUBLE_EQ(err.max, 1.0);
  ASSERT_EQ(err.tuples.size(), 3u);
  EXPECT_EQ(err.tuples[0].achieved_rank, 2);
  EXPECT_EQ(err.tuples[1].achieved_rank, 1);
  EXPECT_EQ(err.tuples[2].achieved_rank, 3);
}

TEST(PositionErrorTest, ImportanceScalesTerms) {
  ProblemSpec spec = ExampleSpec(3);
  spec.importance = {{"r", 2.0}, {"s", 0.5}};
  const std::vector<double> w = {0.2, 0.7, 0.1};
  EXPECT_DOUBLE_EQ(PositionError(spec, w, 1e-9).total, 2.5);
  EXPECT_DOUBLE_EQ(PositionError(spec, w, 1e-9).Objective(ObjectiveKind::kMaxPosition), 2.0);
}

TEST(MetricsTest, MatchesPairScanOnRandomWeights) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    ProblemSpec spec;
    spec.relation = GenerateUniform(20, 3, trial);
    spec.ranking = RankBySum(spec.relation);
    spec.k = 5;
    std::vector<double> w = {u(rng), u(rng), u(rng)};
    const double sum = w[0] + w[1] + w[2];
    for (double& v : w) v /= sum;
    // Oracle: ids in the top-5 against every other id, each unordered pair once.
    std::int64_t expected = 0;
    const auto& order = spec.ranking.order();
    for (std::size_t a = 0; a < order.size(); ++a) {
      for (std::size_t b = 0; b < order.size(); ++b) {
        if (a == b || a >= 5) continue;
        if (b < 5 && b < a) continue;
        const double sa = Score(w, spec.relation.tuple(*spec.relation.IndexOf(order[a])));
        const double sb = Score(w, spec.relation.tuple(*spec.relation.IndexOf(order[b])));
        if (a < b && sb > sa + 1e-12) ++expected;
      }
    }
    EXPECT_EQ(ComputeMetrics(spec, w, 1e-12).inversions, expected);
  }
}

TEST(MetricsTest, AllPairsPenaltyExample) {
  const GivenRanking ranking = GivenRanking::Strict({"x", "y", "z"});
  const std::vector<double> scores = {1, 3, 2};
  EXPECT_DOUBLE_EQ(AllPairsPenalty(ranking, scores), 3.0);
}

TEST(VerifyTest, RejectsPerturbedWeights) {
  ProblemSpec spec;
  spec.relation = Relation({"X", "Y"}, {{"a", {1, 0}}, {"b", {0, 1}}});
  spec.ranking = GivenRanking::Strict({"a", "b"});
  spec.k = 2;
  ExplanationReport report;
  report.status = ReportStatus::kSatisfiable;
  report.epsilon = spec.epsilon;
  report.weights = {0.5 + 1e-3, 0.5 - 1e-3};
  EXPECT_TRUE(Verify(report, spec));
  report.weights = {(0.5 + 1e-3) / 1.01, (0.5 - 1e-3 + 1e-2) / 1.01};
  EXPECT_FALSE(Verify(report, spec));
  report.weights = {0.6, 0.6};
  EXPECT_FALSE(Verify(report, spec));
  report.weights = {};
  EXPECT_FALSE(Verify(report, spec));
}

TEST(ExplainSatTest, ExampleIsSatisfiableAndVerified) {
  const ExplanationReport report = ExplainSat(ExampleSpec(2));
  ASSERT_EQ(report.status, ReportStatus::kSatisfiable);
  EXPECT_TRUE(report.verified);
  EXPECT_EQ(report.escalations, 0);
  EXPECT_DOUBLE_EQ(report.total_error, 0.0);
  double sum = 0.0;
  for (double v : report.weights) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-9);
}

TEST(ExplainSatTest, DominatedLeaderIsUnsatisfiableWithoutEscalation) {
  ProblemSpec spec;
  spec.relation = Relation({"X", "Y"}, {{"a", {1, 1}}, {"b", {0, 0}}});
  spec.ranking = GivenRanking::Strict({"b", "a"});
  spec.k = 1;
  const ExplanationReport report = ExplainSat(spec);
  EXPECT_EQ(report.status, ReportStatus::kUnsatisfiable);
  EXPECT_EQ(report.escalations, 0);
  EXPECT_FALSE(report.has_weights());
  EXPECT_FALSE(report.notes.empty());
}

TEST(ExplainSatTest, NearTieVerifiesAtTheFloor) {
  ProblemSpec spec = NearTieSpec();
  spec.epsilon.eps1 = spec.epsilon.Floor();
  const ExplanationReport report = ExplainSat(spec);
  ASSERT_EQ(report.status, ReportStatus::kSatisfiable);
  EXPECT_TRUE(report.verified);
  EXPECT_EQ(report.escalations, 0);
}

TEST(ExplainSatTest, NearTieBelowTheFloorDoesNotVerify) {
  ProblemSpec spec = NearTieSpec();
  spec.epsilon.eps1 = 1e-10;
  spec.epsilon.max_escalations = 0;
  const ExplanationReport report = ExplainSat(spec);
  ASSERT_EQ(report.status, ReportStatus::kSatisfiable);
  EXPECT_FALSE(report.verified);
  EXPECT_GE(report.notes.size(), 2u);
}

TEST(ExplainSatTest, FloorIsEnforcedWhenEscalating) {
  ProblemSpec spec = NearTieSpec();
  spec.epsilon.eps1 = 1e-10;
  EXPECT_THROW(ExplainSat(spec), std::invalid_argument);
}

TEST(EscalationTest, MultipliesEpsUntilVerification) {
  ProblemSpec spec = ExampleSpec(2);
  spec.epsilon.eps1 = 1e-4;
  std::vector<double> seen;
  const Attempt attempt = [&](const ProblemSpec& s, const EpsilonConfig& eps) {
    seen.push_back(eps.eps1);
    ExplanationReport r;
    r.status = ReportStatus::kSatisfiable;
    r.epsilon = eps;
    // Correct weights only once eps1 has grown past 5e-3.
    r.weights = eps.eps1 > 5e-3 ? std::vector<double>{0.1, 0.9, 0.0} : std::vector<double>{0.2, 0.7, 0.1};
    EvaluateReport(r, s);
    return r;
  };
  const ExplanationReport report = SolveWithEscalation(spec, attempt);
  EXPECT_TRUE(report.verified);
  EXPECT_EQ(report.escalations, 2);
  ASSERT_EQ(seen.size(), 3u);
  EXPECT_DOUBLE_EQ(seen[2], 1e-2);
  EXPECT_DOUBLE_EQ(report.epsilon.eps1, 1e-2);
}

TEST(EscalationTest, StopsAfterMaxEscalations) {
  ProblemSpec spec = ExampleSpec(2);
  spec.epsilon.max_escalations = 3;
  int calls = 0;
  const Attempt attempt = [&](const ProblemSpec& s, const EpsilonConfig& eps) {
    ++calls;
    ExplanationReport r;
    r.status = ReportStatus::kSatisfiable;
    r.epsilon = eps;
    r.weights = {0.2, 0.7, 0.1};
    EvaluateReport(r, s);
    return r;
  };
  const ExplanationReport report = SolveWithEscalation(spec, attempt);
  EXPECT_FALSE(report.verified);
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(report.escalations, 3);
}

TEST(ExplainOptTest, ExampleOptimumMatchesEnumeration) {
  const ProblemSpec spec = ExampleSpec(3);
  const ExplanationReport report = ExplainOpt(spec);
  ASSERT_EQ(report.status, ReportStatus::kOptimal);
  EXPECT_TRUE(report.verified);
  // The full ranking r > s > t is achievable, e.g. with W = (0.1, 0.9, 0).
  EXPECT_DOUBLE_EQ(report.total_error, 0.0);
}

TEST(ExplainOptTest, OptimumMatchesGridSearchOnSmallInstances) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    ProblemSpec spec;
    spec.relation = GenerateUniform(10, 2, seed);
    spec.ranking = BuildUnsatRanking(spec.relation);
    spec.k = 3;
    spec.epsilon.eps1 = 1e-7;
    const ExplanationReport report = ExplainOpt(spec);
    ASSERT_EQ(report.status, ReportStatus::kOptimal) << "seed " << seed;
    EXPECT_TRUE(report.verified);
    // With m = 2 the ranking changes only where two scores cross, so a fine
    // grid plus every crossing point covers every achievable ranking.
    std::vector<double> candidates;
    for (int i = 0; i <= 2000; ++i) candidates.push_back(i / 2000.0);
    const auto& t = spec.relation.tuples();
    for (std::size_t a = 0; a < t.size(); ++a) {
      for (std::size_t b = a + 1; b < t.size(); ++b) {
        const double da = t[a].attrs[0] - t[b].attrs[0] - t[a].attrs[1] + t[b].attrs[1];
        if (da == 0.0) continue;
        const double w1 = (t[b].attrs[1] - t[a].attrs[1]) / da;
        for (double off : {-1e-6, 1e-6}) {
          if (w1 + off >= 0.0 && w1 + off <= 1.0) candidates.push_back(w1 + off);
        }
      }
    }
    double best = 1e18;
    for (double w1 : candidates) {
      const std::vector<double> w = {w1, 1.0 - w1};
      best = std::min(best, PositionError(spec, w, 0.0).total);
    }
    EXPECT_DOUBLE_EQ(report.total_error, best) << "seed " << seed;
  }
}

TEST(ExplainOptTest, NearIntegralRelaxationStillBranches) {
  // Coarse integer data gives big-M coefficients around 4, so an indicator
  // within the integrality tolerance of 1 can fake a gap larger than eps1.
  std::vector<TupleRecord> tuples = GenerateUniform(17, 4, 105).tuples();
  for (TupleRecord& t : tuples) {
    for (double& v : t.attrs) v = std::round(v * 5.0);
  }
  ProblemSpec spec;
  spec.relation = Relation({"A1", "A2", "A3", "A4"}, tuples);
  spec.ranking = RankBySum(spec.relation);
  spec.k = 3;
  spec.epsilon.eps1 = 1e-6;
  SolveOptions unpruned;
  unpruned.prune = false;
  for (const SolveOptions& options : {SolveOptions{}, unpruned}) {
    const ExplanationReport report = ExplainOpt(spec, options);
    ASSERT_EQ(report.status, ReportStatus::kOptimal) << "prune " << options.prune;
    EXPECT_TRUE(report.verified);
    EXPECT_EQ(report.total_error, ExplainOpt(spec).total_error);
  }
}

TEST(ExplainOptTest, NodeLimitReturnsTimeoutStatus) {
  ProblemSpec spec;
  spec.relation = GenerateUniform(30, 3, 11);
  spec.ranking = BuildUnsatRanking(spec.relation);
  spec.k = 5;
  SolveOptions options;
  options.node_limit = 1;
  const ExplanationReport report = ExplainOpt(spec, options);
  EXPECT_TRUE(report.status == ReportStatus::kTimeoutBest || report.status == ReportStatus::kOptimal)
      << ToString(report.status);
  if (report.status == ReportStatus::kTimeoutBest) {
    ASSERT_TRUE(report.best_bound);
    EXPECT_LE(*report.best_bound, report.total_error + 1e-9);
  }
}

TEST(EvaluateWeightsTest, ReportsErrorForUserWeights) {
  const ProblemSpec spec = ExampleSpec(3);
  const std::vector<double> w = {0.2, 0.7, 0.1};
  const ExplanationReport report = EvaluateWeights(spec, w);
  EXPECT_EQ(report.status, ReportStatus::kFeasible);
  EXPECT_TRUE(report.verified);
  EXPECT_DOUBLE_EQ(report.total_error, 2.0);
  const std::vector<double> bad = {0.5, 0.5};
  EXPECT_THROW(EvaluateWeights(spec, bad), InputError);
}

TEST(ReportJsonTest, SchemaAndStableBytes) {
  const ExplanationReport report = ExplainSat(ExampleSpec(2));
  const std::string a = ReportToJson(report, false);
  const std::string b = ReportToJson(ExplainSat(ExampleSpec(2)), false);
  EXPECT_EQ(a, b);
  const nlohmann::json j = nlohmann::json::parse(a);
  EXPECT_EQ(j["schema"], 1);
  EXPECT_EQ(j["status"], "SATISFIABLE");
  EXPECT_EQ(j["weights"].size(), 3u);
  EXPECT_FALSE(j.contains("timestamp"));
  EXPECT_TRUE(nlohmann::json::parse(ReportToJson(report)).contains("timestamp"));
}

}  // namespace
}  // namespace linrank
