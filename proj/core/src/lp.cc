#include "linrank/lp.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>
#include <sstream>
#include <stdexcept>

#include "simplex.h"

namespace linrank::lp {
namespace {

using internal::DenseSimplex;
using internal::MakeStandardForm;
using internal::SimplexResult;
using internal::SimplexTolerances;
using internal::StandardForm;
using internal::StopCheck;

std::string FormatNumber(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

SimplexTolerances TolerancesFor(const SolverConfig& config) {
  return {config.feasibility_tol, config.optimality_tol, 1e-9};
}

// Largest constraint or bound violation accepted on a reported solution.
double AcceptTolerance(const SolverConfig& config) {
  return std::max(1e-6, 100.0 * config.feasibility_tol);
}

bool HasCrossedBounds(const StandardForm& form, double tol) {
  for (int j = 0; j < form.columns(); ++j) {
    if (form.lower[j] > form.upper[j] + tol) return true;
  }
  return false;
}

// Moves values within `tol` of a bound onto it and rounds binaries.
std::vector<double> Snap(const Program& program, std::vector<double> values, double tol) {
  for (std::size_t j = 0; j < values.size(); ++j) {
    const Variable& v = program.variables()[j];
    double& x = values[j];
    if (v.binary) {
      x = std::clamp(std::round(x), 0.0, 1.0);
      continue;
    }
    if (std::isfinite(v.lower) && std::abs(x - v.lower) <= tol) x = v.lower;
    if (std::isfinite(v.upper) && std::abs(x - v.upper) <= tol) x = v.upper;
  }
  return values;
}

std::vector<double> MapDuals(const StandardForm& form, const std::vector<double>& row_duals,
                             std::size_t num_constraints) {
  std::vector<double> duals(num_constraints, 0.0);
  for (int r = 0; r < form.rows; ++r) {
    const double y = row_duals[r];
    const int source = y > 0.0 ? form.lower_source[r] : form.upper_source[r];
    if (y != 0.0 && source >= 0) duals[source] = y;
  }
  return duals;
}

SolveStatus StatusOf(SimplexResult r) {
  switch (r) {
    case SimplexResult::kOptimal: return SolveStatus::kOptimal;
    case SimplexResult::kInfeasible: return SolveStatus::kInfeasible;
    case SimplexResult::kUnbounded: return SolveStatus::kUnbounded;
    case SimplexResult::kStopped: return SolveStatus::kTimeoutNoSolution;
    case SimplexResult::kNumerical: return SolveStatus::kNumericalError;
  }
  return SolveStatus::kNumericalError;
}

// Fills status, values, objective and duals from a finished simplex run.
Solution FinishLp(const Program& program, const StandardForm& form, const DenseSimplex& simplex,
                  SimplexResult result, const SolverConfig& config) {
  Solution sol;
  sol.status = StatusOf(result);
  sol.iterations = simplex.iterations();
  if (result != SimplexResult::kOptimal) return sol;
  sol.values = Snap(program, simplex.StructuralValues(), config.feasibility_tol);
  if (CheckAssignment(program, sol.values).max_violation > AcceptTolerance(config)) {
    sol.status = SolveStatus::kNumericalError;
    sol.values.clear();
    return sol;
  }
  sol.objective = program.objective().Evaluate(sol.values);
  sol.best_bound = sol.objective;
  sol.duals = MapDuals(form, simplex.RowDuals(), program.num_constraints());
  return sol;
}

Solution SolveDirect(const Program& program, const SolverConfig& config, const StopCheck& stop) {
  auto form = MakeStandardForm(program);
  if (HasCrossedBounds(*form, config.feasibility_tol)) {
    Solution sol;
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  DenseSimplex simplex(form, TolerancesFor(config), config.seed);
  const SimplexResult result = simplex.Solve(stop);
  return FinishLp(program, *form, simplex, result, config);
}

double RowViolation(const Constraint& c, std::span<const double> values) {
  const double activity = c.expr.Evaluate(values);
  switch (c.sense) {
    case Sense::kLessEqual: return std::max(0.0, activity - c.rhs);
    case Sense::kGreaterEqual: return std::max(0.0, c.rhs - activity);
    case Sense::kEqual: return std::abs(activity - c.rhs);
  }
  return 0.0;
}

// Solves over a growing subset of the rows, adding the most violated rows of
// the full program until the subset optimum satisfies all of them.
Solution SolveWithRowGeneration(const Program& program, const SolverConfig& config,
                                const StopCheck& stop) {
  const std::size_t total = program.num_constraints();
  const std::size_t batch = std::max<std::size_t>(2 * program.num_variables(), 64);
  std::vector<char> included(total, 0);
  std::vector<int> working;
  auto add_most_violated = [&](std::span<const double> x) {
    std::vector<std::pair<double, int>> violated;
    for (std::size_t i = 0; i < total; ++i) {
      if (included[i]) continue;
      const double v = RowViolation(program.constraints()[i], x);
      if (v > config.feasibility_tol) violated.emplace_back(-v, static_cast<int>(i));
    }
    const std::size_t take = std::min(batch, violated.size());
    std::partial_sort(violated.begin(), violated.begin() + take, violated.end());
    for (std::size_t t = 0; t < take; ++t) {
      included[violated[t].second] = 1;
      working.push_back(violated[t].second);
    }
    return take;
  };

  std::vector<double> start(program.num_variables(), 0.0);
  for (std::size_t j = 0; j < start.size(); ++j) {
    const Variable& v = program.variables()[j];
    if (std::isfinite(v.lower)) {
      start[j] = v.lower;
    } else if (std::isfinite(v.upper)) {
      start[j] = v.upper;
    }
  }
  for (std::size_t i = 0; i < total; ++i) {
    if (program.constraints()[i].sense == Sense::kEqual) {
      included[i] = 1;
      working.push_back(static_cast<int>(i));
    }
  }
  add_most_violated(start);

  std::int64_t iterations = 0;
  while (true) {
    std::sort(working.begin(), working.end());
    auto form = MakeStandardForm(program, &working);
    if (HasCrossedBounds(*form, config.feasibility_tol)) {
      Solution sol;
      sol.status = SolveStatus::kInfeasible;
      return sol;
    }
    DenseSimplex simplex(form, TolerancesFor(config), config.seed);
    const SimplexResult result = simplex.Solve(stop);
    iterations += simplex.iterations();
    if (result == SimplexResult::kUnbounded) {
      std::size_t added = 0;
      for (std::size_t i = 0; i < total && added < batch; ++i) {
        if (included[i]) continue;
        included[i] = 1;
        working.push_back(static_cast<int>(i));
        ++added;
      }
      if (added == 0) return SolveDirect(program, config, stop);
      continue;
    }
    if (result != SimplexResult::kOptimal) {
      Solution sol;
      sol.status = StatusOf(result);
      sol.iterations = iterations;
      return sol;
    }
    const std::vector<double> x = simplex.StructuralValues();
    if (add_most_violated(x) == 0) {
      Solution sol = FinishLp(program, *form, simplex, result, config);
      sol.iterations = iterations;
      return sol;
    }
  }
}

Solution SolveContinuous(const Program& program, const SolverConfig& config, const StopCheck& stop) {
  for (const Variable& v : program.variables()) {
    if (v.lower > v.upper) {
      Solution sol;
      sol.status = SolveStatus::kInfeasible;
      return sol;
    }
  }
  const std::size_t rows = program.num_constraints();
  const std::size_t cols = program.num_variables();
  if (rows > 400 && rows > 8 * cols) return SolveWithRowGeneration(program, config, stop);
  return SolveDirect(program, config, stop);
}

struct Node {
  std::int64_t id = 0;
  int depth = 0;
  double bound = -kInf;
  std::vector<std::pair<int, double>> fixings;
  std::shared_ptr<const DenseSimplex> warm;
};

// Best bound first, then deeper nodes, then creation order.
struct NodeAfter {
  bool operator()(const Node& a, const Node& b) const {
    if (a.bound != b.bound) return a.bound > b.bound;
    if (a.depth != b.depth) return a.depth < b.depth;
    return a.id > b.id;
  }
};

class BranchAndBound {
 public:
  BranchAndBound(const Program& program, const SolverConfig& config)
      : program_(program), config_(config), stop_(config.time_limit, config.cancel) {
    for (std::size_t j = 0; j < program.num_variables(); ++j) {
      if (program.variables()[j].binary) binaries_.push_back(static_cast<int>(j));
    }
  }

  Solution Run();

 private:
  double RoundBound(double z) const {
    const double g = config_.objective_granularity;
    if (g <= 0.0) return z;
    return std::ceil(z / g - 1e-6) * g;
  }

  bool Prunable(double bound) const {
    if (incumbent_.empty()) return false;
    if (config_.objective_granularity > 0.0) return bound >= incumbent_value_ - 1e-9;
    return bound >= incumbent_value_ - config_.optimality_tol * std::max(1.0, std::abs(incumbent_value_));
  }

  void Offer(std::vector<double> values) {
    const double obj = program_.objective().Evaluate(values);
    if (incumbent_.empty() || obj < incumbent_value_ - 1e-12) {
      incumbent_ = std::move(values);
      incumbent_value_ = obj;
    }
  }

  // Fixes every binary to its rounded value in `assignment`, re-solves the
  // continuous part from the root basis and offers the result.
  void FixAndSolve(std::span<const double> assignment);

  const Program& program_;
  const SolverConfig& config_;
  StopCheck stop_;
  std::vector<int> binaries_;
  std::shared_ptr<StandardForm> form_;
  std::unique_ptr<DenseSimplex> root_;
  std::vector<double> incumbent_;
  double incumbent_value_ = kInf;
  std::int64_t iterations_ = 0;
};

void BranchAndBound::FixAndSolve(std::span<const double> assignment) {
  // Complete integral assignments that already satisfy every row are taken
  // as they are; the continuous re-solve is the fallback.
  const FeasibilityReport direct = CheckAssignment(program_, assignment);
  if (direct.max_integrality_violation == 0.0 && direct.max_violation <= config_.feasibility_tol) {
    Offer(std::vector<double>(assignment.begin(), assignment.end()));
    return;
  }
  DenseSimplex s = *root_;
  for (int j : binaries_) {
    const double v = std::clamp(std::round(assignment[j]), 0.0, 1.0);
    s.SetBounds(j, v, v);
  }
  const SimplexResult r = s.Reoptimize(stop_);
  iterations_ += s.iterations();
  if (r != SimplexResult::kOptimal) return;
  std::vector<double> values = Snap(program_, s.StructuralValues(), config_.feasibility_tol);
  if (CheckAssignment(program_, values).max_violation > AcceptTolerance(config_)) return;
  Offer(std::move(values));
}

Solution BranchAndBound::Run() {
  Solution sol;
  for (const Variable& v : program_.variables()) {
    if (v.lower > v.upper) {
      sol.status = SolveStatus::kInfeasible;
      return sol;
    }
  }
  if (stop_.Expired()) {
    sol.status = SolveStatus::kTimeoutNoSolution;
    return sol;
  }
  form_ = MakeStandardForm(program_);
  if (HasCrossedBounds(*form_, config_.feasibility_tol)) {
    sol.status = SolveStatus::kInfeasible;
    return sol;
  }
  root_ = std::make_unique<DenseSimplex>(form_, TolerancesFor(config_), config_.seed);
  const SimplexResult root_result = root_->Solve(stop_);
  iterations_ += root_->iterations();
  if (root_result != SimplexResult::kOptimal) {
    sol.status = StatusOf(root_result);
    sol.iterations = iterations_;
    sol.nodes = root_result == SimplexResult::kStopped ? 0 : 1;
    return sol;
  }

  for (const std::vector<double>& start : config_.starts) {
    if (start.size() == program_.num_variables()) FixAndSolve(start);
  }

  std::size_t cached_bytes = 0;
  std::priority_queue<Node, std::vector<Node>, NodeAfter> open;
  Node root_node;
  root_node.bound = RoundBound(config_.objective_lower_bound);
  open.push(std::move(root_node));
  std::int64_t next_id = 1;
  std::int64_t nodes = 0;
  double lost_bound = kInf;
  bool stopped = false;

  while (!open.empty()) {
    if (stop_.Expired() || nodes >= config_.node_limit) {
      stopped = true;
      break;
    }
    Node node = open.top();
    open.pop();
    if (Prunable(node.bound)) continue;
    ++nodes;

    DenseSimplex s = node.warm ? *node.warm : *root_;
    node.warm.reset();
    for (const auto& [var, value] : node.fixings) s.SetBounds(var, value, value);
    const std::int64_t before = s.iterations();
    const SimplexResult r = s.Reoptimize(stop_);
    iterations_ += s.iterations() - before;
    if (r == SimplexResult::kStopped) {
      open.push(std::move(node));
      stopped = true;
      break;
    }
    if (r == SimplexResult::kInfeasible) continue;
    if (r != SimplexResult::kOptimal) {
      lost_bound = std::min(lost_bound, node.bound);
      continue;
    }
    const double bound = RoundBound(std::max(s.Objective(), node.bound));
    if (Prunable(bound)) continue;

    const std::vector<double> values = s.StructuralValues();
    int branch_var = -1;
    double best_score = -1.0;
    for (int j : binaries_) {
      const double frac = std::abs(values[j] - std::round(values[j]));
      if (frac <= config_.integrality_tol) continue;
      const double score = config_.branching == BranchingRule::kMostFractional ? frac : 1.0;
      if (score > best_score) {
        best_score = score;
        branch_var = j;
      }
    }
    if (branch_var < 0) {
      // Pin the binaries to exact integers and re-solve the continuous part
      // so the incumbent objective carries no integrality slack.
      DenseSimplex leaf = s;
      for (int j : binaries_) {
        const double v = std::clamp(std::round(values[j]), 0.0, 1.0);
        leaf.SetBounds(j, v, v);
      }
      const std::int64_t pinned_before = leaf.iterations();
      const SimplexResult pinned = leaf.Reoptimize(stop_);
      iterations_ += leaf.iterations() - pinned_before;
      std::vector<double> candidate;
      if (pinned == SimplexResult::kOptimal) {
        candidate = Snap(program_, leaf.StructuralValues(), config_.feasibility_tol);
      }
      if (!candidate.empty() &&
          CheckAssignment(program_, candidate).max_violation <= AcceptTolerance(config_)) {
        Offer(std::move(candidate));
        continue;
      }
      // A fraction below the integrality tolerance, multiplied by a large
      // big-M coefficient, can still hide an infeasible row; keep branching
      // on whatever fraction is left.
      double largest = 0.0;
      for (int j : binaries_) {
        const double frac = std::abs(values[j] - std::round(values[j]));
        if (frac > largest) {
          largest = frac;
          branch_var = j;
        }
      }
      if (branch_var < 0) {
        FixAndSolve(values);
        continue;
      }
    }
    if (config_.heuristic && (incumbent_.empty() || nodes % 16 == 1)) {
      if (auto proposal = config_.heuristic(values)) {
        if (proposal->size() == program_.num_variables()) FixAndSolve(*proposal);
      }
      if (Prunable(bound)) continue;
    }

    std::shared_ptr<const DenseSimplex> warm;
    const std::size_t bytes = s.MemoryBytes();
    if (cached_bytes + bytes <= config_.warm_start_memory) {
      cached_bytes += bytes;
      warm = std::shared_ptr<const DenseSimplex>(new DenseSimplex(std::move(s)),
                                                 [&cached_bytes, bytes](const DenseSimplex* p) {
                                                   cached_bytes -= bytes;
                                                   delete p;
                                                 });
    }
    for (double value : {0.0, 1.0}) {
      Node child;
      child.id = next_id++;
      child.depth = node.depth + 1;
      child.bound = bound;
      child.fixings = node.fixings;
      child.fixings.emplace_back(branch_var, value);
      child.warm = warm;
      open.push(std::move(child));
    }
  }

  double open_bound = kInf;
  while (!open.empty()) {
    if (!Prunable(open.top().bound)) open_bound = std::min(open_bound, open.top().bound);
    open.pop();
  }
  sol.nodes = nodes;
  sol.iterations = iterations_;
  const double proven = std::min(open_bound, lost_bound);
  if (!incumbent_.empty()) {
    sol.values = incumbent_;
    sol.objective = incumbent_value_;
    sol.best_bound = std::min(proven, incumbent_value_);
    sol.status = Prunable(proven) ? SolveStatus::kOptimal : SolveStatus::kTimeoutBest;
    if (sol.status == SolveStatus::kOptimal) sol.best_bound = incumbent_value_;
  } else if (stopped) {
    sol.status = SolveStatus::kTimeoutNoSolution;
    sol.best_bound = proven;
  } else {
    sol.status = std::isfinite(lost_bound) ? SolveStatus::kNumericalError : SolveStatus::kInfeasible;
  }
  return sol;
}

}  // namespace

LinearExpr& LinearExpr::Add(VarId var, double coef) {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                             [](const Term& t, VarId v) { return t.var < v; });
  if (it != terms_.end() && it->var == var) {
    it->coef += coef;
    if (it->coef == 0.0) terms_.erase(it);
  } else if (coef != 0.0) {
    terms_.insert(it, Term{var, coef});
  }
  return *this;
}

LinearExpr& LinearExpr::operator+=(const LinearExpr& other) {
  for (const Term& t : other.terms_) Add(t.var, t.coef);
  constant_ += other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator-=(const LinearExpr& other) {
  for (const Term& t : other.terms_) Add(t.var, -t.coef);
  constant_ -= other.constant_;
  return *this;
}

LinearExpr& LinearExpr::operator*=(double factor) {
  if (factor == 0.0) {
    terms_.clear();
    constant_ = 0.0;
    return *this;
  }
  for (Term& t : terms_) t.coef *= factor;
  constant_ *= factor;
  return *this;
}

double LinearExpr::CoefficientOf(VarId var) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), var,
                             [](const Term& t, VarId v) { return t.var < v; });
  return it != terms_.end() && it->var == var ? it->coef : 0.0;
}

double LinearExpr::Evaluate(std::span<const double> values) const {
  double v = constant_;
  for (const Term& t : terms_) v += t.coef * values[t.var];
  return v;
}

LinearExpr operator+(LinearExpr a, const LinearExpr& b) { return a += b; }
LinearExpr operator-(LinearExpr a, const LinearExpr& b) { return a -= b; }
LinearExpr operator*(double factor, LinearExpr e) { return e *= factor; }

VarId Program::AddContinuous(std::string name, double lower, double upper) {
  if (std::isnan(lower) || std::isnan(upper)) throw std::invalid_argument("NaN variable bound");
  variables_.push_back(Variable{std::move(name), lower, upper, false});
  return static_cast<VarId>(variables_.size() - 1);
}

VarId Program::AddBinary(std::string name) {
  variables_.push_back(Variable{std::move(name), 0.0, 1.0, true});
  return static_cast<VarId>(variables_.size() - 1);
}

void Program::SetBounds(VarId var, double lower, double upper) {
  CheckVar(var);
  if (std::isnan(lower) || std::isnan(upper)) throw std::invalid_argument("NaN variable bound");
  variables_[var].lower = lower;
  variables_[var].upper = upper;
}

void Program::CheckVar(VarId var) const {
  if (var < 0 || static_cast<std::size_t>(var) >= variables_.size()) {
    throw std::invalid_argument("undeclared variable " + std::to_string(var));
  }
}

void Program::AddConstraint(const LinearExpr& expr, Sense sense, double rhs, std::string name) {
  for (const LinearExpr::Term& t : expr.terms()) {
    CheckVar(t.var);
    if (!std::isfinite(t.coef)) throw std::invalid_argument("non-finite coefficient");
  }
  const double folded = rhs - expr.constant();
  if (!std::isfinite(folded)) throw std::invalid_argument("non-finite right-hand side");
  Constraint c;
  c.expr = expr;
  c.expr.AddConstant(-expr.constant());
  c.sense = sense;
  c.rhs = folded;
  c.name = std::move(name);
  constraints_.push_back(std::move(c));
}

void Program::SetObjective(LinearExpr objective) {
  for (const LinearExpr::Term& t : objective.terms()) CheckVar(t.var);
  objective_ = std::move(objective);
}

void Program::AddToObjective(VarId var, double coef) {
  CheckVar(var);
  objective_.Add(var, coef);
}

std::size_t Program::num_binaries() const {
  return static_cast<std::size_t>(
      std::count_if(variables_.begin(), variables_.end(), [](const Variable& v) { return v.binary; }));
}

std::string Program::ToLpFormat() const {
  auto var_name = [&](VarId j) {
    std::string name = variables_[j].name;
    if (name.empty()) return "x" + std::to_string(j);
    for (char& ch : name) {
      if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '_' && ch != '.') ch = '_';
    }
    if (std::isdigit(static_cast<unsigned char>(name[0]))) name = "_" + name;
    return name;
  };
  auto write_expr = [&](std::ostringstream& out, const LinearExpr& e) {
    if (e.terms().empty()) {
      out << " 0 " << var_name(0);
      return;
    }
    for (const LinearExpr::Term& t : e.terms()) {
      out << (t.coef < 0 ? " - " : " + ") << FormatNumber(std::abs(t.coef)) << ' ' << var_name(t.var);
    }
  };
  std::ostringstream out;
  out << "Minimize\n obj:";
  if (objective_.terms().empty() && !variables_.empty()) {
    out << " 0 " << var_name(0);
  } else {
    write_expr(out, objective_);
  }
  if (objective_.constant() != 0.0) out << " + " << FormatNumber(objective_.constant()) << " constant";
  out << "\nSubject To\n";
  for (std::size_t i = 0; i < constraints_.size(); ++i) {
    const Constraint& c = constraints_[i];
    out << ' ' << (c.name.empty() ? "c" + std::to_string(i) : c.name) << ':';
    if (!variables_.empty()) write_expr(out, c.expr);
    out << (c.sense == Sense::kLessEqual ? " <= " : c.sense == Sense::kGreaterEqual ? " >= " : " = ")
        << FormatNumber(c.rhs) << '\n';
  }
  out << "Bounds\n";
  for (std::size_t j = 0; j < variables_.size(); ++j) {
    const Variable& v = variables_[j];
    if (v.binary) continue;
    const std::string name = var_name(static_cast<VarId>(j));
    if (std::isinf(v.lower) && std::isinf(v.upper)) {
      out << ' ' << name << " free\n";
      continue;
    }
    out << ' ' << (std::isinf(v.lower) ? "-inf" : FormatNumber(v.lower)) << " <= " << name;
    out << " <= " << (std::isinf(v.upper) ? "+inf" : FormatNumber(v.upper)) << '\n';
  }
  if (objective_.constant() != 0.0) out << " constant = 1\n";
  if (num_binaries() > 0) {
    out << "Binaries\n";
    for (std::size_t j = 0; j < variables_.size(); ++j) {
      if (variables_[j].binary) out << ' ' << var_name(static_cast<VarId>(j)) << '\n';
    }
  }
  out << "End\n";
  return out.str();
}

std::string_view ToString(SolveStatus status) {
  switch (status) {
    case SolveStatus::kOptimal: return "OPTIMAL";
    case SolveStatus::kInfeasible: return "INFEASIBLE";
    case SolveStatus::kUnbounded: return "UNBOUNDED";
    case SolveStatus::kTimeoutBest: return "TIMEOUT_BEST";
    case SolveStatus::kTimeoutNoSolution: return "TIMEOUT_NO_SOLUTION";
    case SolveStatus::kNumericalError: return "NUMERICAL_ERROR";
  }
  return "UNKNOWN";
}

Solution SolveLp(const Program& program, const SolverConfig& config) {
  if (program.num_binaries() > 0) throw std::invalid_argument("SolveLp called on a program with binaries");
  StopCheck stop(config.time_limit, config.cancel);
  return SolveContinuous(program, config, stop);
}

Solution SolveMilp(const Program& program, const SolverConfig& config) {
  if (program.num_binaries() == 0) return SolveLp(program, config);
  BranchAndBound bnb(program, config);
  return bnb.Run();
}

FeasibilityReport CheckAssignment(const Program& program, std::span<const double> values) {
  if (values.size() != program.num_variables()) {
    throw std::invalid_argument("assignment size does not match the program");
  }
  FeasibilityReport report;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const Variable& v = program.variables()[j];
    const double x = values[j];
    report.max_violation = std::max({report.max_violation, v.lower - x, x - v.upper});
    if (v.binary) {
      report.max_integrality_violation =
          std::max(report.max_integrality_violation, std::abs(x - std::round(x)));
    }
  }
  for (std::size_t i = 0; i < program.num_constraints(); ++i) {
    const double viol = RowViolation(program.constraints()[i], values);
    if (viol > report.max_violation) {
      report.max_violation = viol;
      report.worst_constraint = static_cast<int>(i);
    }
  }
  return report;
}

bool IsFeasible(const Program& program, std::span<const double> values, double feasibility_tol,
                double integrality_tol) {
  const FeasibilityReport r = CheckAssignment(program, values);
  return r.max_violation <= feasibility_tol && r.max_integrality_violation <= integrality_tol;
}

double DualBound(const Program& program, std::span<const double> duals, double tol) {
  if (duals.size() != program.num_constraints()) {
    throw std::invalid_argument("dual vector size does not match the program");
  }
  std::vector<double> reduced(program.num_variables(), 0.0);
  for (const LinearExpr::Term& t : program.objective().terms()) reduced[t.var] = t.coef;
  double bound = program.objective().constant();
  for (std::size_t i = 0; i < duals.size(); ++i) {
    const Constraint& c = program.constraints()[i];
    const double y = duals[i];
    if (c.sense == Sense::kGreaterEqual && y < -tol) return -kInf;
    if (c.sense == Sense::kLessEqual && y > tol) return -kInf;
    bound += y * c.rhs;
    for (const LinearExpr::Term& t : c.expr.terms()) reduced[t.var] -= y * t.coef;
  }
  for (std::size_t j = 0; j < reduced.size(); ++j) {
    const Variable& v = program.variables()[j];
    const double d = reduced[j];
    if (d > tol) {
      if (std::isinf(v.lower)) return -kInf;
      bound += d * v.lower;
    } else if (d < -tol) {
      if (std::isinf(v.upper)) return -kInf;
      bound += d * v.upper;
    } else if (std::isfinite(v.lower) || std::isfinite(v.upper)) {
      bound += d * (d >= 0 ? (std::isfinite(v.lower) ? v.lower : v.upper)
                           : (std::isfinite(v.upper) ? v.upper : v.lower));
    }
  }
  return bound;
}

VarId AddAbsTerm(Program& program, const LinearExpr& expr, double u, std::string name) {
  if (u < 0.0) throw std::invalid_argument("negative abs-term weight");
  const VarId e = program.AddContinuous(std::move(name), 0.0, kInf);
  LinearExpr above;
  above.Add(e, 1.0);
  above -= expr;
  program.AddConstraint(above, Sense::kGreaterEqual, 0.0);
  LinearExpr below;
  below.Add(e, 1.0);
  below += expr;
  program.AddConstraint(below, Sense::kGreaterEqual, 0.0);
  program.AddToObjective(e, u);
  return e;
}

void AddIndicatorPair(Program& program, VarId indicator, const LinearExpr& expr, double eps1,
                      double eps2, double big_m) {
  LinearExpr lhs = expr;
  lhs.Add(indicator, -big_m);
  program.AddConstraint(lhs, Sense::kGreaterEqual, eps1 - big_m);
  program.AddConstraint(lhs, Sense::kLessEqual, eps2);
}

}  // namespace linrank::lp
