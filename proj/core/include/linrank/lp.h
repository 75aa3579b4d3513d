#ifndef LINRANK_LP_H_
#define LINRANK_LP_H_

// Linear and mixed-binary linear programming.
//
// Programs are minimization problems over continuous variables with
// (possibly infinite) bounds and binary variables. Continuous problems are
// solved with a bounded-variable dense-tableau simplex (dual simplex for
// feasibility, primal simplex for optimality, Bland's rule on degenerate
// stalls). Problems with binaries go through best-bound branch-and-bound
// whose node relaxations are re-optimized with the dual simplex.

#include <atomic>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace linrank::lp {

using VarId = int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

// Sparse affine expression sum_j coef_j * x_j + constant. Terms stay sorted by
// variable id with no zero coefficients.
class LinearExpr {
 public:
  struct Term {
    VarId var;
    double coef;
  };

  LinearExpr() = default;
  explicit LinearExpr(double constant) : constant_(constant) {}

  LinearExpr& Add(VarId var, double coef);
  LinearExpr& AddConstant(double c) {
    constant_ += c;
    return *this;
  }
  LinearExpr& operator+=(const LinearExpr& other);
  LinearExpr& operator-=(const LinearExpr& other);
  LinearExpr& operator*=(double factor);

  const std::vector<Term>& terms() const { return terms_; }
  double constant() const { return constant_; }
  // Coefficient of `var` (0 when absent).
  double CoefficientOf(VarId var) const;
  double Evaluate(std::span<const double> values) const;

 private:
  std::vector<Term> terms_;
  double constant_ = 0.0;
};

LinearExpr operator+(LinearExpr a, const LinearExpr& b);
LinearExpr operator-(LinearExpr a, const LinearExpr& b);
LinearExpr operator*(double factor, LinearExpr e);

// Non-strict senses only; strict inequalities must be rewritten with a gap
// before they reach the engine.
enum class Sense { kLessEqual, kGreaterEqual, kEqual };

struct Variable {
  std::string name;
  double lower = 0.0;
  double upper = kInf;
  bool binary = false;
};

// expr <sense> rhs, with expr's constant folded into rhs.
struct Constraint {
  LinearExpr expr;
  Sense sense = Sense::kLessEqual;
  double rhs = 0.0;
  std::string name;
};

class Program {
 public:
  VarId AddContinuous(std::string name, double lower = 0.0, double upper = kInf);
  VarId AddBinary(std::string name);
  void SetBounds(VarId var, double lower, double upper);

  // Adds expr <sense> rhs. Throws std::invalid_argument on undeclared
  // variables or non-finite data.
  void AddConstraint(const LinearExpr& expr, Sense sense, double rhs, std::string name = "");
  void SetObjective(LinearExpr objective);
  void AddToObjective(VarId var, double coef);

  const std::vector<Variable>& variables() const { return variables_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }
  const LinearExpr& objective() const { return objective_; }
  std::size_t num_variables() const { return variables_.size(); }
  std::size_t num_constraints() const { return constraints_.size(); }
  std::size_t num_binaries() const;

  // CPLEX LP-format text (Minimize / Subject To / Bounds / Binaries / End).
  std::string ToLpFormat() const;

 private:
  void CheckVar(VarId var) const;

  std::vector<Variable> variables_;
  std::vector<Constraint> constraints_;
  LinearExpr objective_;
};

enum class SolveStatus {
  kOptimal,
  kInfeasible,
  kUnbounded,
  // Limit reached with an incumbent; `values` holds it and `best_bound` the
  // proven lower bound.
  kTimeoutBest,
  // Limit reached before any feasible point was found.
  kTimeoutNoSolution,
  // The simplex lost numerical control; never reported as optimal.
  kNumericalError,
};

std::string_view ToString(SolveStatus status);

struct Solution {
  SolveStatus status = SolveStatus::kNumericalError;
  double objective = 0.0;
  // Proven lower bound on the optimum (equals objective when optimal).
  double best_bound = -kInf;
  std::vector<double> values;
  // Row duals y for continuous programs solved to optimality; the bound
  // y.b + sum_j min_{x_j in [l_j,u_j]} (c_j - y.A_j) x_j is a lower bound.
  std::vector<double> duals;
  std::int64_t nodes = 0;
  std::int64_t iterations = 0;

  bool has_solution() const {
    return status == SolveStatus::kOptimal || status == SolveStatus::kTimeoutBest;
  }
};

enum class BranchingRule {
  // Binary with fractional part closest to 1/2; ties to the lowest id.
  kMostFractional,
  // Lowest-id fractional binary.
  kFirstFractional,
};

struct SolverConfig {
  // Absolute tolerance on constraint and bound satisfaction.
  double feasibility_tol = 1e-9;
  // A binary value within this distance of 0 or 1 counts as integral.
  double integrality_tol = 1e-6;
  double optimality_tol = 1e-9;
  // Wall-clock budget in seconds.
  double time_limit = kInf;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  BranchingRule branching = BranchingRule::kMostFractional;
  // Perturbs the feasibility-phase cost vector; fixed seeds give repeatable
  // pivot sequences.
  std::uint64_t seed = 0;
  // When > 0, every integer-feasible objective is a multiple of this value
  // and node bounds are rounded up to it.
  double objective_granularity = 0.0;
  // Objective bound known from outside the relaxation (for example from a
  // separate infeasibility proof); seeds the root node.
  double objective_lower_bound = -kInf;
  // Upper limit on bytes held by cached node tableaus.
  std::size_t warm_start_memory = std::size_t{256} << 20;
  // Proposes binary values from a node's relaxed solution; the engine fixes
  // them, re-solves the continuous part and accepts the point when feasible.
  std::function<std::optional<std::vector<double>>(std::span<const double>)> heuristic;
  // Full assignments tried as incumbents before branching starts; only their
  // binary entries are used.
  std::vector<std::vector<double>> starts;
  // Polled during the solve; set to true to stop with the current incumbent.
  std::shared_ptr<const std::atomic<bool>> cancel;
};

// Continuous program (no binaries). Throws std::invalid_argument when the
// program has binary variables.
Solution SolveLp(const Program& program, const SolverConfig& config = {});

// Branch-and-bound over the binaries. Programs without binaries are passed
// to SolveLp.
Solution SolveMilp(const Program& program, const SolverConfig& config = {});

// Largest violation of any bound, constraint, or integrality requirement.
struct FeasibilityReport {
  double max_violation = 0.0;
  double max_integrality_violation = 0.0;
  int worst_constraint = -1;
};
FeasibilityReport CheckAssignment(const Program& program, std::span<const double> values);
bool IsFeasible(const Program& program, std::span<const double> values, double feasibility_tol,
                double integrality_tol = 1e-6);

// Lagrangian lower bound y.b + sum_j min (c - A^T y)_j x_j for the continuous
// relaxation; -inf when y has a wrong sign or a reduced cost pushes an
// unbounded variable.
double DualBound(const Program& program, std::span<const double> duals, double tol = 1e-9);

// Adds e >= 0 with e >= expr and e >= -expr, and u * e to the objective.
// At any optimum e = |expr|. Throws std::invalid_argument when u < 0.
VarId AddAbsTerm(Program& program, const LinearExpr& expr, double u, std::string name = "");

// Links binary `indicator` to expr via big-M:
//   expr >= eps1 - M (1 - indicator)   and   expr <= eps2 + M indicator,
// so indicator = 1 forces expr >= eps1 and indicator = 0 forces expr <= eps2.
// M must cover max(|eps1|, |eps2|) plus the range of |expr|.
void AddIndicatorPair(Program& program, VarId indicator, const LinearExpr& expr, double eps1,
                      double eps2, double big_m);

}  // namespace linrank::lp

#endif  // LINRANK_LP_H_
