#ifndef LINRANK_SRC_SIMPLEX_H_
#define LINRANK_SRC_SIMPLEX_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>
#include <vector>

#include "linrank/lp.h"

namespace linrank::lp::internal {

// Rows are s_i = a_i x with one slack per row whose bounds carry the row's
// range: [b, inf) for >=, (-inf, b] for <=, [b, b] for =. Constraints with
// identical left-hand sides share one ranged row.
struct StandardForm {
  int rows = 0;
  int structurals = 0;
  std::vector<double> a;  // rows x structurals, row-major
  std::vector<double> lower;  // structurals + rows entries
  std::vector<double> upper;
  std::vector<double> cost;
  double objective_constant = 0.0;
  // Program constraint supplying each row's lower and upper limit (-1 when
  // the side is unbounded).
  std::vector<int> lower_source;
  std::vector<int> upper_source;

  int columns() const { return structurals + rows; }
};

// Builds the standard form of `program` restricted to the listed constraint
// rows (all rows when `rows` is null). Binaries become [0, 1] columns.
std::shared_ptr<StandardForm> MakeStandardForm(const Program& program,
                                               const std::vector<int>* rows = nullptr);

class StopCheck {
 public:
  StopCheck() = default;
  StopCheck(double time_limit_seconds, std::shared_ptr<const std::atomic<bool>> cancel);
  bool Expired() const;

 private:
  bool has_deadline_ = false;
  std::chrono::steady_clock::time_point deadline_{};
  std::shared_ptr<const std::atomic<bool>> cancel_;
};

enum class SimplexResult { kOptimal, kInfeasible, kUnbounded, kStopped, kNumerical };

struct SimplexTolerances {
  double primal = 1e-9;
  double dual = 1e-9;
  double pivot = 1e-9;
};

// Dense bounded-variable simplex tableau. Copyable so branch-and-bound nodes
// can resume from a parent's optimal basis.
class DenseSimplex {
 public:
  DenseSimplex(std::shared_ptr<const StandardForm> form, SimplexTolerances tol, std::uint64_t seed);

  // Slack basis, dual simplex on a perturbed feasibility cost, then primal
  // simplex on the true cost.
  SimplexResult Solve(const StopCheck& stop);
  // Dual simplex from the current basis (after bound changes), then primal
  // clean-up of any remaining dual infeasibility.
  SimplexResult Reoptimize(const StopCheck& stop);

  // Changes the bounds of a structural column, moving a nonbasic column onto
  // its new bound.
  void SetBounds(int col, double lower, double upper);

  std::vector<double> StructuralValues() const;
  // y_i with reduced costs c_j - y.A_j; y_i > 0 means the lower limit of row
  // i binds, y_i < 0 the upper one.
  std::vector<double> RowDuals() const;
  double Objective() const;
  std::int64_t iterations() const { return iterations_; }
  std::size_t MemoryBytes() const;

 private:
  enum class State : std::uint8_t { kBasic, kAtLower, kAtUpper, kFree };

  double& T(int r, int c) { return tableau_[static_cast<std::size_t>(r) * cols_ + c]; }
  double T(int r, int c) const { return tableau_[static_cast<std::size_t>(r) * cols_ + c]; }

  void InitSlackBasis();
  void ComputeReducedCosts(const std::vector<double>& cost);
  // Shifts nonbasic reduced costs away from zero (a small cost perturbation)
  // so the dual simplex does not stall on dual-degenerate programs.
  void PerturbReducedCosts();
  void ApplyStep(int col, double delta);
  void Pivot(int row, int col);
  bool Refactor();
  double PrimalInfeasibility(int row) const;

  SimplexResult RunPrimal(const StopCheck& stop);
  SimplexResult RunDual(const StopCheck& stop);
  // Recomputes basic values from scratch and refactors when they drift.
  bool CheckAccuracy();

  std::shared_ptr<const StandardForm> form_;
  SimplexTolerances tol_;
  std::uint64_t seed_;
  std::uint64_t perturbations_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> tableau_;
  std::vector<double> reduced_;
  std::vector<double> beta_;
  std::vector<double> x_;  // values of nonbasic columns
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<int> basis_;
  std::vector<State> state_;
  std::vector<int> scratch_nz_;
  std::int64_t iterations_ = 0;
  std::int64_t iteration_limit_ = 0;
};

}  // namespace linrank::lp::internal

#endif  // LINRANK_SRC_SIMPLEX_H_
