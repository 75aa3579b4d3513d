#ifndef LINRANK_BASELINES_H_
#define LINRANK_BASELINES_H_

// Competitor methods, also used to seed the cell heuristic: least-squares
// regression on ranks, ordinal regression (a pairwise-penalty LP) and random
// sampling of the simplex.

#include <cstdint>
#include <optional>
#include <vector>

#include "linrank/explain.h"
#include "linrank/formulate.h"
#include "linrank/model.h"

namespace linrank {

struct RegressionFit {
  // Least-squares coefficients of the attributes (intercept excluded).
  std::vector<double> raw;
  double intercept = 0.0;
  // raw with negatives clipped to 0 and rescaled to sum 1; uniform when no
  // coefficient is positive.
  std::vector<double> projected;
};

// Fits sum_i w_i A_i + b to the label -pi(r) over every tuple of the ranking
// (ridge 1e-9 keeps rank-deficient systems solvable).
RegressionFit LinearRegressionWeights(const Relation& relation, const GivenRanking& ranking);

struct OrdinalFit {
  std::vector<double> weights;
  // Optimal sum of pair slacks; slacks below tau count as zero.
  double penalty = 0.0;
  // Number of ranking pairs in the program.
  std::size_t pairs = 0;
  lp::SolveStatus status = lp::SolveStatus::kNumericalError;
};

// Minimizes the total slack sum_p xi_p over the SAT chain pairs (adjacent
// top-k pairs with gap eps1, EQUAL pairs in both directions, and the k-th
// tuple against every lower tuple), subject to the simplex and the
// predicate. Zero penalty exactly when the SAT program is feasible.
// Programs with more than `direct_pair_limit` pairs are solved by cutting
// planes over W instead of one slack variable per pair.
OrdinalFit OrdinalRegressionWeights(const ProblemSpec& spec, const EpsilonConfig& eps,
                                    double time_limit = lp::kInf, std::size_t direct_pair_limit = 1500);

struct SamplingResult {
  // Empty when no sample satisfied the predicate.
  std::vector<double> weights;
  double error = 0.0;
  std::int64_t samples = 0;
  // Index in the stream of the sample returned.
  std::int64_t best_index = -1;
};

// Draws `budget` points uniformly from the simplex (normalized exponential
// variates from mt19937_64(seed)), skips those violating the predicate and
// returns the first one of least position error. A finite time budget stops
// the stream early.
SamplingResult SamplingSearch(const ProblemSpec& spec, std::int64_t budget, std::uint64_t seed,
                              double time_budget = lp::kInf);

// Baseline results as reports (mode "baseline") with status FEASIBLE, or
// SATISFIABLE when the error is zero.
ExplanationReport LinearRegressionReport(const ProblemSpec& spec);
ExplanationReport OrdinalRegressionReport(const ProblemSpec& spec, double time_limit = lp::kInf);
ExplanationReport SamplingReport(const ProblemSpec& spec, std::int64_t budget, std::uint64_t seed);

}  // namespace linrank

#endif  // LINRANK_BASELINES_H_
