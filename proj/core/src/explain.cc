#include "linrank/explain.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <numeric>

#include "json.hpp"

namespace linrank {
namespace {

using Clock = std::chrono::steady_clock;

double SecondsSince(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Slack allowed on the simplex and predicate when checking reported weights.
double WeightTolerance(const EpsilonConfig& eps) { return std::max(1e-9, 10.0 * eps.tau); }

std::vector<double> ClipToSimplex(std::span<const double> w) {
  std::vector<double> out(w.begin(), w.end());
  double sum = 0.0;
  for (double& v : out) {
    v = std::max(0.0, v);
    sum += v;
  }
  if (sum <= 0.0) return std::vector<double>(w.size(), 1.0 / static_cast<double>(w.size()));
  for (double& v : out) v /= sum;
  return out;
}

ExplanationReport NewReport(const ProblemSpec& spec, std::string mode, const EpsilonConfig& eps) {
  ExplanationReport r;
  r.mode = std::move(mode);
  r.k = spec.k;
  r.n = spec.relation.size();
  r.objective = spec.objective;
  r.attributes = spec.relation.columns();
  r.epsilon = eps;
  return r;
}

std::string UtcTimestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct ZeroErrorProbe {
  // A zero-error certificate, or the smallest positive objective when none
  // exists.
  std::optional<std::vector<double>> weights;
  double lower_bound = 0.0;
};

// With eps2 = 0 and no cell, OPT has optimum 0 exactly when the SAT program is
// feasible, so one LP either yields an optimal start or lifts the root bound
// to the smallest positive error (the least top-k importance).
std::optional<ZeroErrorProbe> ProbeZeroError(const ProblemSpec& spec, const EpsilonConfig& eps,
                                             const SolveOptions& options, const lp::SolverConfig& config) {
  if (!options.zero_error_probe || eps.eps2 != 0.0 || options.box) return std::nullopt;
  double least = lp::kInf;
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  for (std::size_t pos = 0; pos < spec.TopCount(); ++pos) {
    least = std::min(least, spec.ImportanceOf(spec.relation.tuple(idx[pos]).id));
  }
  if (!(least > 0.0)) return std::nullopt;
  const SatProgram sat = BuildSat(spec, eps);
  lp::SolverConfig lp_config;
  lp_config.feasibility_tol = config.feasibility_tol;
  lp_config.time_limit = config.time_limit;
  lp_config.seed = config.seed;
  lp_config.cancel = config.cancel;
  const lp::Solution sol = lp::SolveLp(sat.program, lp_config);
  ZeroErrorProbe probe;
  if (sol.status == lp::SolveStatus::kOptimal) {
    std::vector<double> w;
    for (lp::VarId v : sat.weights) w.push_back(sol.values[v]);
    probe.weights = ClipToSimplex(w);
    return probe;
  }
  if (sol.status != lp::SolveStatus::kInfeasible) return std::nullopt;
  probe.lower_bound = least;
  return probe;
}

}  // namespace

std::string_view ToString(ReportStatus status) {
  switch (status) {
    case ReportStatus::kSatisfiable: return "SATISFIABLE";
    case ReportStatus::kUnsatisfiable: return "UNSATISFIABLE";
    case ReportStatus::kOptimal: return "OPTIMAL";
    case ReportStatus::kTimeoutBest: return "TIMEOUT_BEST";
    case ReportStatus::kTimeoutNoSolution: return "TIMEOUT_NO_SOLUTION";
    case ReportStatus::kInfeasible: return "INFEASIBLE";
    case ReportStatus::kNumericalError: return "NUMERICAL_ERROR";
    case ReportStatus::kFeasible: return "FEASIBLE";
  }
  return "UNKNOWN";
}

void EvaluateReport(ExplanationReport& report, const ProblemSpec& spec) {
  if (!report.has_weights()) return;
  const double tie_tol = report.epsilon.tau;
  ErrorBreakdown err = PositionError(spec, report.weights, tie_tol);
  report.total_error = err.Objective(spec.objective);
  report.tuples = std::move(err.tuples);
  report.metrics = ComputeMetrics(spec, report.weights, tie_tol);
}

bool Verify(const ExplanationReport& report, const ProblemSpec& spec) {
  if (!report.has_weights() || report.weights.size() != spec.relation.num_attributes()) return false;
  const double tol = WeightTolerance(report.epsilon);
  double sum = 0.0;
  for (double v : report.weights) {
    if (!std::isfinite(v) || v < -tol) return false;
    sum += v;
  }
  if (std::abs(sum - 1.0) > tol * static_cast<double>(report.weights.size())) return false;
  if (!spec.predicate.Satisfied(report.weights, tol)) return false;
  const double error = PositionError(spec, report.weights, report.epsilon.tau).Objective(spec.objective);
  switch (report.status) {
    case ReportStatus::kSatisfiable:
      return error == 0.0;
    case ReportStatus::kOptimal:
    case ReportStatus::kTimeoutBest:
      if (!report.solver_objective) return std::abs(error - report.total_error) <= 1e-9;
      return std::abs(error - *report.solver_objective) <= 1e-6 * std::max(1.0, std::abs(error));
    case ReportStatus::kFeasible:
      return std::abs(error - report.total_error) <= 1e-9;
    default:
      return false;
  }
}

ExplanationReport SolveSatOnce(const ProblemSpec& spec, const EpsilonConfig& eps, const SolveOptions& options) {
  const Clock::time_point start = Clock::now();
  ExplanationReport report = NewReport(spec, "sat", eps);
  const SatProgram sat = BuildSat(spec, eps);
  lp::SolverConfig config;
  config.feasibility_tol = eps.tau;
  config.time_limit = options.time_limit;
  config.seed = options.seed;
  config.cancel = options.cancel;
  const lp::Solution sol = lp::SolveLp(sat.program, config);
  report.iterations = sol.iterations;
  switch (sol.status) {
    case lp::SolveStatus::kOptimal:
      report.status = ReportStatus::kSatisfiable;
      for (lp::VarId v : sat.weights) report.weights.push_back(std::max(0.0, sol.values[v]));
      break;
    case lp::SolveStatus::kInfeasible:
      report.status = ReportStatus::kUnsatisfiable;
      break;
    case lp::SolveStatus::kTimeoutBest:
    case lp::SolveStatus::kTimeoutNoSolution:
      report.status = ReportStatus::kTimeoutNoSolution;
      break;
    default:
      report.status = ReportStatus::kNumericalError;
      break;
  }
  EvaluateReport(report, spec);
  report.seconds = SecondsSince(start);
  return report;
}

ExplanationReport SolveOptOnce(const ProblemSpec& spec, const EpsilonConfig& eps, const SolveOptions& options) {
  const Clock::time_point start = Clock::now();
  ExplanationReport report = NewReport(spec, "opt", eps);
  OptOptions build;
  build.prune = options.prune;
  build.box = options.box;
  const OptProgram opt = BuildOpt(spec, eps, build);

  lp::SolverConfig config;
  config.feasibility_tol = eps.tau;
  config.time_limit = options.time_limit;
  config.node_limit = options.node_limit;
  config.seed = options.seed;
  config.cancel = options.cancel;
  config.objective_granularity = opt.granularity;
  for (const std::vector<double>& w : options.starts) {
    if (w.size() == opt.weights.size()) config.starts.push_back(AssignmentFromWeights(opt, spec, eps, w));
  }
  if (options.use_heuristic) {
    config.heuristic = [&](std::span<const double> relaxed) -> std::optional<std::vector<double>> {
      std::vector<double> w;
      for (lp::VarId v : opt.weights) w.push_back(relaxed[v]);
      return AssignmentFromWeights(opt, spec, eps, ClipToSimplex(w));
    };
  }
  if (auto probe = ProbeZeroError(spec, eps, options, config)) {
    if (probe->weights) {
      config.starts.push_back(AssignmentFromWeights(opt, spec, eps, *probe->weights));
    } else {
      config.objective_lower_bound = probe->lower_bound;
      report.notes.push_back("zero error is infeasible (SAT program has no solution)");
    }
  }
  const lp::Solution sol = lp::SolveMilp(opt.program, config);
  report.nodes = sol.nodes;
  report.iterations = sol.iterations;
  switch (sol.status) {
    case lp::SolveStatus::kOptimal: report.status = ReportStatus::kOptimal; break;
    case lp::SolveStatus::kTimeoutBest: report.status = ReportStatus::kTimeoutBest; break;
    case lp::SolveStatus::kTimeoutNoSolution: report.status = ReportStatus::kTimeoutNoSolution; break;
    case lp::SolveStatus::kInfeasible: report.status = ReportStatus::kInfeasible; break;
    default: report.status = ReportStatus::kNumericalError; break;
  }
  if (sol.has_solution()) {
    for (lp::VarId v : opt.weights) report.weights.push_back(std::max(0.0, sol.values[v]));
    report.solver_objective = sol.objective;
    report.best_bound = sol.best_bound;
  } else if (std::isfinite(sol.best_bound)) {
    report.best_bound = sol.best_bound;
  }
  EvaluateReport(report, spec);
  report.seconds = SecondsSince(start);
  return report;
}

ExplanationReport SolveWithEscalation(const ProblemSpec& spec, const Attempt& attempt) {
  EpsilonConfig eps = spec.epsilon;
  eps.Validate(eps.max_escalations > 0);
  std::vector<std::string> notes;
  if (eps.eps1 - eps.eps2 < eps.Floor()) {
    notes.push_back("eps1 - eps2 is below 2 * nextafter(tau); strict gaps may be lost to solver tolerance");
  }
  double seconds = 0.0;
  for (int round = 0;; ++round) {
    ExplanationReport report = attempt(spec, eps);
    seconds += report.seconds;
    report.seconds = seconds;
    report.epsilon = eps;
    report.escalations = round;
    report.notes.insert(report.notes.begin(), notes.begin(), notes.end());
    if (report.status == ReportStatus::kUnsatisfiable || report.status == ReportStatus::kInfeasible) {
      report.notes.push_back("infeasible at eps1 = " + std::to_string(eps.eps1) +
                             "; a smaller eps1 could admit a solution, but eps1 is only escalated upward");
      return report;
    }
    if (!report.has_weights()) return report;
    report.verified = Verify(report, spec);
    if (report.verified) return report;
    if (round >= eps.max_escalations) {
      report.notes.push_back("verification failed after " + std::to_string(round) + " escalation(s)");
      return report;
    }
    eps.eps1 *= eps.escalation_factor;
  }
}

ExplanationReport ExplainSat(const ProblemSpec& spec, const SolveOptions& options) {
  return SolveWithEscalation(
      spec, [&](const ProblemSpec& s, const EpsilonConfig& eps) { return SolveSatOnce(s, eps, options); });
}

ExplanationReport ExplainOpt(const ProblemSpec& spec, const SolveOptions& options) {
  return SolveWithEscalation(
      spec, [&](const ProblemSpec& s, const EpsilonConfig& eps) { return SolveOptOnce(s, eps, options); });
}

ExplanationReport EvaluateWeights(const ProblemSpec& spec, std::span<const double> w) {
  if (w.size() != spec.relation.num_attributes()) {
    throw InputError("weight vector has " + std::to_string(w.size()) + " entries, expected " +
                     std::to_string(spec.relation.num_attributes()));
  }
  ExplanationReport report = NewReport(spec, "verify", spec.epsilon);
  report.weights.assign(w.begin(), w.end());
  EvaluateReport(report, spec);
  report.status = report.total_error == 0.0 ? ReportStatus::kSatisfiable : ReportStatus::kFeasible;
  report.verified = Verify(report, spec);
  if (!report.verified) report.notes.push_back("weights are not admissible (simplex or predicate violated)");
  return report;
}

std::string ReportToJson(const ExplanationReport& report, bool include_timestamp, bool include_timing) {
  using Json = nlohmann::ordered_json;
  Json j;
  j["schema"] = 1;
  j["mode"] = report.mode;
  j["status"] = ToString(report.status);
  j["k"] = report.k;
  j["n"] = report.n;
  j["objective"] = ToString(report.objective);
  j["attributes"] = report.attributes;
  j["weights"] = report.has_weights() ? Json(report.weights) : Json(nullptr);
  if (!report.raw_coefficients.empty()) j["raw_coefficients"] = report.raw_coefficients;
  j["total_error"] = report.has_weights() ? Json(report.total_error) : Json(nullptr);
  j["solver_objective"] = report.solver_objective ? Json(*report.solver_objective) : Json(nullptr);
  j["best_bound"] = report.best_bound ? Json(*report.best_bound) : Json(nullptr);
  Json tuples = Json::array();
  for (const TupleError& t : report.tuples) {
    tuples.push_back({{"id", t.id},
                      {"given_rank", t.given_rank},
                      {"achieved_rank", t.achieved_rank},
                      {"importance", t.importance},
                      {"error", t.error}});
  }
  j["tuples"] = std::move(tuples);
  j["metrics"] = {{"inversions", report.metrics.inversions},
                  {"max_position_error", report.metrics.max_position_error}};
  j["epsilon"] = {{"tau", report.epsilon.tau},
                  {"eps1", report.epsilon.eps1},
                  {"eps2", report.epsilon.eps2},
                  {"escalation_factor", report.epsilon.escalation_factor},
                  {"max_escalations", report.epsilon.max_escalations}};
  j["verified"] = report.verified;
  j["escalations"] = report.escalations;
  j["nodes"] = report.nodes;
  j["iterations"] = report.iterations;
  j["notes"] = report.notes;
  if (include_timing) j["elapsed_seconds"] = report.seconds;
  if (include_timestamp) j["timestamp"] = UtcTimestamp();
  return j.dump(2);
}

}  // namespace linrank
