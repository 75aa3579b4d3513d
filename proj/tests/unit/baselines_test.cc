#include "linrank/baselines.h"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace linrank {
namespace {

double Cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0;
  double aa = 0.0;
  double bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// Tuples whose scores under w_star are evenly spaced, ranked by w_star.
ProblemSpec PlantedSpec(std::span<const double> w_star, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t m = w_star.size();
  std::vector<std::string> columns;
  for (std::size_t i = 0; i < m; ++i) columns.push_back("A" + std::to_string(i + 1));
  std::vector<TupleRecord> tuples;
  for (std::size_t t = 0; t < n; ++t) {
    std::vector<double> attrs(m);
    double partial = 0.0;
    for (std::size_t i = 0; i + 1 < m; ++i) {
      attrs[i] = u(rng);
      partial += w_star[i] * attrs[i];
    }
    const double target = 1.0 - 0.003 * static_cast<double>(t);
    attrs[m - 1] = (target - partial) / w_star[m - 1];
    tuples.push_back({"t" + std::to_string(t), attrs});
  }
  ProblemSpec spec;
  spec.relation = Relation(columns, tuples);
  spec.ranking = RankByWeights(spec.relation, w_star);
  spec.k = 5;
  return spec;
}

TEST(LinearRegressionTest, RecoversPlantedDirection) {
  const std::vector<double> w_star = {0.5, 0.3, 0.2};
  const ProblemSpec spec = PlantedSpec(w_star, 200, 1);
  const RegressionFit fit = LinearRegressionWeights(spec.relation, spec.ranking);
  EXPECT_GT(Cosine(fit.raw, w_star), 0.99);
  EXPECT_GT(Cosine(fit.projected, w_star), 0.99);
  double sum = 0.0;
  for (double v : fit.projected) {
    EXPECT_GE(v, 0.0);
    sum += v;
  }
  EXPECT_NEAR(sum, 1.0, 1e-12);
}

TEST(LinearRegressionTest, SingleAttributeProjectsToOne) {
  const Relation rel({"A"}, {{"a", {3}}, {"b", {1}}, {"c", {2}}});
  const GivenRanking ranking = GivenRanking::Strict({"a", "c", "b"});
  EXPECT_EQ(LinearRegressionWeights(rel, ranking).projected, std::vector<double>{1.0});
}

TEST(LinearRegressionTest, FallsBackToUniformWhenNothingIsPositive) {
  const Relation rel({"A", "B"}, {{"a", {0, 0}}, {"b", {1, 1}}, {"c", {2, 2}}});
  const GivenRanking ranking = GivenRanking::Strict({"a", "b", "c"});
  const RegressionFit fit = LinearRegressionWeights(rel, ranking);
  EXPECT_EQ(fit.projected, (std::vector<double>{0.5, 0.5}));
}

TEST(OrdinalRegressionTest, ZeroPenaltyOnSatisfiableInstances) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    ProblemSpec spec;
    spec.relation = GenerateUniform(40, 3, seed);
    spec.ranking = RankByWeights(spec.relation, std::vector<double>{0.6, 0.3, 0.1});
    spec.k = 5;
    const bool sat = ExplainSat(spec).status == ReportStatus::kSatisfiable;
    const OrdinalFit fit = OrdinalRegressionWeights(spec, spec.epsilon);
    ASSERT_EQ(fit.status, lp::SolveStatus::kOptimal);
    EXPECT_EQ(fit.penalty == 0.0, sat) << "seed " << seed;
    if (sat) {
      EXPECT_EQ(fit.penalty, 0.0);
      EXPECT_EQ(PositionError(spec, fit.weights, spec.epsilon.tau).total, 0.0);
      EXPECT_TRUE(OrdinalRegressionReport(spec).verified);
    }
  }
}

TEST(OrdinalRegressionTest, PositivePenaltyOnUnsatConstruction) {
  ProblemSpec spec;
  spec.relation = GenerateUniform(60, 4, 42);
  spec.ranking = BuildUnsatRanking(spec.relation);
  spec.k = 5;
  const OrdinalFit fit = OrdinalRegressionWeights(spec, spec.epsilon);
  ASSERT_EQ(fit.status, lp::SolveStatus::kOptimal);
  EXPECT_GT(fit.penalty, 0.0);
  EXPECT_EQ(ExplainSat(spec).status, ReportStatus::kUnsatisfiable);
}

TEST(OrdinalRegressionTest, CuttingPlanesMatchDirectProgram) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    ProblemSpec spec;
    spec.relation = GenerateUniform(80, 3, seed);
    spec.ranking = BuildUnsatRanking(spec.relation);
    spec.k = 5;
    const OrdinalFit direct = OrdinalRegressionWeights(spec, spec.epsilon);
    const OrdinalFit cuts = OrdinalRegressionWeights(spec, spec.epsilon, lp::kInf, 0);
    ASSERT_EQ(cuts.status, lp::SolveStatus::kOptimal);
    EXPECT_NEAR(direct.penalty, cuts.penalty, 1e-7) << "seed " << seed;
  }
}

TEST(OrdinalRegressionTest, RespectsPredicate) {
  ProblemSpec spec;
  spec.relation = GenerateUniform(30, 3, 3);
  spec.ranking = RankByWeights(spec.relation, std::vector<double>{0.6, 0.3, 0.1});
  spec.k = 4;
  spec.predicate = WeightPredicate::Parse("A1 <= 0.2", spec.relation.columns());
  const OrdinalFit fit = OrdinalRegressionWeights(spec, spec.epsilon);
  ASSERT_FALSE(fit.weights.empty());
  EXPECT_LE(fit.weights[0], 0.2 + 1e-9);
}

TEST(SamplingSearchTest, SingleSampleAndPrefixMonotonicity) {
  ProblemSpec spec;
  spec.relation = GenerateUniform(50, 4, 5);
  spec.ranking = BuildUnsatRanking(spec.relation);
  spec.k = 5;
  const SamplingResult one = SamplingSearch(spec, 1, 9);
  ASSERT_EQ(one.weights.size(), 4u);
  EXPECT_EQ(one.best_index, 0);
  EXPECT_DOUBLE_EQ(one.error, PositionError(spec, one.weights, spec.epsilon.tau).total);
  double previous = 1e18;
  for (std::int64_t budget : {1, 10, 100, 1000}) {
    const SamplingResult r = SamplingSearch(spec, budget, 9);
    EXPECT_LE(r.error, previous);
    previous = r.error;
  }
  const SamplingResult a = SamplingSearch(spec, 200, 4);
  const SamplingResult b = SamplingSearch(spec, 200, 4);
  EXPECT_EQ(a.weights, b.weights);
  EXPECT_THROW(SamplingSearch(spec, 0, 1), std::invalid_argument);
}

TEST(SamplingSearchTest, FindsZeroErrorOnEasyInstance) {
  ProblemSpec spec;
  spec.relation = Relation({"A1", "A2", "A3"}, {{"r", {3, 2, 8}}, {"s", {4, 1, 15}}, {"t", {1, 1, 14}}});
  spec.ranking = GivenRanking::Strict({"s", "r", "t"});
  spec.k = 3;
  const SamplingResult r = SamplingSearch(spec, 10000, 1);
  EXPECT_EQ(r.error, 0.0);
  EXPECT_EQ(SamplingReport(spec, 10000, 1).status, ReportStatus::kSatisfiable);
}

TEST(SamplingSearchTest, SkipsSamplesOutsidePredicate) {
  ProblemSpec spec;
  spec.relation = GenerateUniform(20, 3, 1);
  spec.ranking = RankBySum(spec.relation);
  spec.k = 3;
  spec.predicate = WeightPredicate::Parse("A1 >= 0.7", spec.relation.columns());
  const SamplingResult r = SamplingSearch(spec, 500, 2);
  ASSERT_FALSE(r.weights.empty());
  EXPECT_GE(r.weights[0], 0.7);
}

}  // namespace
}  // namespace linrank
