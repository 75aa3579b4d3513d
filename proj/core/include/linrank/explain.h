#ifndef LINRANK_EXPLAIN_H_
#define LINRANK_EXPLAIN_H_

// Solving, verification and eps-escalation for SAT and OPT, producing
// ExplanationReports.

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "linrank/evaluate.h"
#include "linrank/formulate.h"
#include "linrank/lp.h"

namespace linrank {

enum class ReportStatus {
  kSatisfiable,
  kUnsatisfiable,
  kOptimal,
  kTimeoutBest,
  kTimeoutNoSolution,
  kInfeasible,
  kNumericalError,
  // Weights from a heuristic or supplied by the user; no optimality claim.
  kFeasible,
};

std::string_view ToString(ReportStatus status);

struct ExplanationReport {
  std::string mode;
  ReportStatus status = ReportStatus::kNumericalError;
  int k = 0;
  std::size_t n = 0;
  ObjectiveKind objective = ObjectiveKind::kPositionSum;
  std::vector<std::string> attributes;
  // Empty when no weight vector was found.
  std::vector<double> weights;
  // Unprojected coefficients, for methods that produce them.
  std::vector<double> raw_coefficients;
  // Score-derived error of `weights` under the objective (sum or max).
  double total_error = 0.0;
  std::vector<TupleError> tuples;
  RankingMetrics metrics;
  // Program objective and proven bound (OPT only).
  std::optional<double> solver_objective;
  std::optional<double> best_bound;
  EpsilonConfig epsilon;
  bool verified = false;
  int escalations = 0;
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;
  double seconds = 0.0;
  std::vector<std::string> notes;

  bool has_weights() const { return !weights.empty(); }
};

// Recomputes tuples, total_error and metrics from the report's weights with
// tie tolerance tau.
void EvaluateReport(ExplanationReport& report, const ProblemSpec& spec);

// True when the weights lie on the simplex, satisfy the predicate, and their
// score ranking (tie tolerance tau) confirms the claim: zero error for
// SATISFIABLE, the solver objective for OPT reports, the reported error
// otherwise.
bool Verify(const ExplanationReport& report, const ProblemSpec& spec);

struct SolveOptions {
  double time_limit = lp::kInf;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  bool prune = true;
  bool use_heuristic = true;
  std::uint64_t seed = 0;
  // OPT: solve the SAT program first; its certificate becomes a start, its
  // infeasibility a lower bound on the optimum.
  bool zero_error_probe = true;
  // Restricts W to a cell (OPT).
  std::optional<WeightBox> box;
  // Weight vectors tried as incumbents (OPT).
  std::vector<std::vector<double>> starts;
  std::shared_ptr<const std::atomic<bool>> cancel;
};

// One solve at fixed eps, with weights evaluated but not verified.
ExplanationReport SolveSatOnce(const ProblemSpec& spec, const EpsilonConfig& eps, const SolveOptions& options);
ExplanationReport SolveOptOnce(const ProblemSpec& spec, const EpsilonConfig& eps, const SolveOptions& options);

using Attempt = std::function<ExplanationReport(const ProblemSpec&, const EpsilonConfig&)>;

// Runs `attempt` at spec.epsilon, verifies, and multiplies eps1 by the
// escalation factor until a report verifies or max_escalations is spent.
// Infeasible outcomes return at once. The floor on eps1 is enforced only when
// escalation is enabled; below it, a note is attached instead.
ExplanationReport SolveWithEscalation(const ProblemSpec& spec, const Attempt& attempt);

ExplanationReport ExplainSat(const ProblemSpec& spec, const SolveOptions& options = {});
ExplanationReport ExplainOpt(const ProblemSpec& spec, const SolveOptions& options = {});

// Report for a user-supplied W (no solving): error, metrics, verified when
// W is admissible.
ExplanationReport EvaluateWeights(const ProblemSpec& spec, std::span<const double> w);

// JSON document with `schema: 1`; the timestamp is the only field that varies
// between identical runs, and elapsed time is included only on request.
std::string ReportToJson(const ExplanationReport& report, bool include_timestamp = true,
                         bool include_timing = false);

}  // namespace linrank

#endif  // LINRANK_EXPLAIN_H_
