#include "linrank/evaluate.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace linrank {

ErrorBreakdown PositionError(const ProblemSpec& spec, std::span<const double> w, double tie_tol) {
  const ScoredRanking scored = RankingFromScores(spec.relation, w, tie_tol);
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  const std::size_t top = spec.TopCount();
  ErrorBreakdown out;
  out.tuples.reserve(top);
  for (std::size_t pos = 0; pos < top; ++pos) {
    TupleError t;
    t.id = spec.ranking.order()[pos];
    t.given_rank = spec.ranking.RankAt(pos);
    t.achieved_rank = scored.RankOf(idx[pos]);
    t.importance = spec.ImportanceOf(t.id);
    t.error = t.importance * std::abs(t.achieved_rank - t.given_rank);
    out.total += t.error;
    out.max = std::max(out.max, t.error);
    out.tuples.push_back(std::move(t));
  }
  return out;
}

RankingMetrics ComputeMetrics(const ProblemSpec& spec, std::span<const double> w, double tie_tol) {
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  const std::size_t top = spec.TopCount();
  const std::size_t n = idx.size();
  std::vector<double> score(n);
  for (std::size_t pos = 0; pos < n; ++pos) score[pos] = Score(w, spec.relation.tuple(idx[pos]));
  RankingMetrics m;
  for (std::size_t a = 0; a < top; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const int ra = spec.ranking.RankAt(a);
      const int rb = spec.ranking.RankAt(b);
      // Positions are in ranking order, so a is never strictly below b.
      if (ra < rb && score[b] > score[a] + tie_tol) ++m.inversions;
    }
  }
  const ErrorBreakdown err = PositionError(spec, w, tie_tol);
  for (const TupleError& t : err.tuples) {
    m.max_position_error = std::max(m.max_position_error, std::abs(t.achieved_rank - t.given_rank));
  }
  return m;
}

double AllPairsPenalty(const GivenRanking& ranking, std::span<const double> scores_by_position) {
  if (scores_by_position.size() != ranking.size()) {
    throw std::invalid_argument("one score per ranking position required");
  }
  double penalty = 0.0;
  for (std::size_t a = 0; a < ranking.size(); ++a) {
    for (std::size_t b = a + 1; b < ranking.size(); ++b) {
      if (ranking.RankAt(a) < ranking.RankAt(b)) {
        penalty += std::max(0.0, scores_by_position[b] - scores_by_position[a]);
      }
    }
  }
  return penalty;
}

}  // namespace linrank
