#ifndef LINRANK_APPROX_H_
#define LINRANK_APPROX_H_

// Heuristics for instances too large for a global OPT solve: OPT restricted to
// a small cell of weight space around a seed, OPT on sliding windows of the
// ranking, and local explanations on shrinking sub-problems.

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "linrank/explain.h"
#include "linrank/formulate.h"

namespace linrank {

enum class SeedStrategy { kSampling, kSlidingWindow, kLinearRegression, kOrdinalRegression, kExplicit };

// Accepts sample, window, lr, ordreg, explicit.
std::optional<SeedStrategy> ParseSeedStrategy(std::string_view name);
std::string_view ToString(SeedStrategy strategy);

struct CellOptions {
  SeedStrategy strategy = SeedStrategy::kOrdinalRegression;
  // Half-width c of the hypercube around the seed.
  double cell_size = 0.01;
  // kExplicit: the seed itself.
  std::vector<double> explicit_weights;
  // kSampling: budget and stream seed.
  std::int64_t samples = 1000;
  // kSlidingWindow: window length (0 picks min(k, 10)).
  std::size_t window = 0;
  // kSlidingWindow: worker threads for the window solves (0 = hardware).
  unsigned threads = 0;
  SolveOptions solve;
};

// Seed weight vector for `strategy`.
std::vector<double> SeedWeights(const ProblemSpec& spec, const CellOptions& options);

// OPT inside {w : |w_i - w0_i| <= c} intersected with the simplex, started
// from the seed w0. The reported error never exceeds the seed's: when the
// solve ends worse (or without a solution) the seed is reported instead.
ExplanationReport CellSolve(const ProblemSpec& spec, const CellOptions& options);

struct WindowResult {
  // One OPT report per window, in ranking order.
  std::vector<ExplanationReport> windows;
  // First ranking position of each window.
  std::vector<std::size_t> starts;
  // Average of window weights, each weighted by 1 / (1 + error), on the
  // simplex.
  std::vector<double> seed;
};

// Slides a window of `window` adjacent positions over the top-k of the
// ranking with stride ceil(window / 2), solving OPT on each window's tuples
// alone. Windows run on up to `threads` threads; results are ordered by window.
WindowResult SlidingWindowSolve(const ProblemSpec& spec, std::size_t window, const SolveOptions& options = {},
                                unsigned threads = 0);

using ExceptionPredicate = std::function<bool(const ExplanationReport&)>;
using SubproblemSolver = std::function<ExplanationReport(const ProblemSpec&)>;

// Exception when the solve timed out, failed numerically, found nothing,
// did not verify, or left an error above max_error.
ExceptionPredicate DefaultException(double max_error);

struct LocalResult {
  ExplanationReport report;
  bool success = false;
  int k = 0;
  // Tuples in the solved sub-problem: top-k' plus the lower-ranked tuples kept.
  std::size_t n = 0;
  // Sub-problem solves performed.
  int solves = 0;
};

// Tries (k, n) first; then for k' = ceil(shrink^x * k), x = 1, 2, ..., binary
// searches the largest number of lower-ranked tuples kept below the top-k'
// without an exception. Returns the first success, or the last failing
// report when k' reaches 1 without one.
LocalResult LocalExplain(const ProblemSpec& spec, double shrink, const ExceptionPredicate& exception,
                         const SubproblemSolver& solve);

// The sub-problem on the first `count` ranking positions with k' = k.
ProblemSpec PrefixProblem(const ProblemSpec& spec, int k, std::size_t count);

}  // namespace linrank

#endif  // LINRANK_APPROX_H_
