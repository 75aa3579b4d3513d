#ifndef LINRANK_EVALUATE_H_
#define LINRANK_EVALUATE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "linrank/formulate.h"
#include "linrank/model.h"

namespace linrank {

struct TupleError {
  std::string id;
  int given_rank = 0;
  int achieved_rank = 0;
  double importance = 1.0;
  // importance * |achieved_rank - given_rank|
  double error = 0.0;
};

struct ErrorBreakdown {
  // Sum of per-tuple errors over R_pi(k).
  double total = 0.0;
  // Largest per-tuple error.
  double max = 0.0;
  std::vector<TupleError> tuples;

  double Objective(ObjectiveKind kind) const {
    return kind == ObjectiveKind::kPositionSum ? total : max;
  }
};

// Position error of W against the top-k of the given ranking, with achieved
// ranks from RankingFromScores(tie_tol).
ErrorBreakdown PositionError(const ProblemSpec& spec, std::span<const double> w, double tie_tol);

struct RankingMetrics {
  // Pairs (r in top-k, s anywhere) that the given ranking and W order
  // strictly and oppositely; each unordered pair counts once.
  std::int64_t inversions = 0;
  // Largest unweighted |achieved - given| over the top-k.
  int max_position_error = 0;
};

RankingMetrics ComputeMetrics(const ProblemSpec& spec, std::span<const double> w, double tie_tol);

// Sum over strictly ordered pairs (a above b in the ranking) of
// max(0, score(b) - score(a)); scores are listed by ranking position.
double AllPairsPenalty(const GivenRanking& ranking, std::span<const double> scores_by_position);

}  // namespace linrank

#endif  // LINRANK_EVALUATE_H_
