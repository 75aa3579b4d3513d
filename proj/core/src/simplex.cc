#include "simplex.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <stdexcept>

namespace linrank::lp::internal {
namespace {

// Consecutive degenerate pivots before switching to Bland's rule.
constexpr int kDegenerateStreakForBland = 50;
// Entries below this magnitude are dropped from a normalized pivot row.
constexpr double kDropTol = 1e-14;
// Basic values recomputed from scratch may differ by this much before the
// tableau is refactored.
constexpr double kDriftTol = 1e-9;
// Base magnitude of the cost perturbation applied before dual simplex runs.
constexpr double kCostPerturbation = 1e-6;

}  // namespace

std::shared_ptr<StandardForm> MakeStandardForm(const Program& program, const std::vector<int>* rows) {
  auto form = std::make_shared<StandardForm>();
  std::vector<int> all_rows;
  if (rows == nullptr) {
    all_rows.resize(program.num_constraints());
    std::iota(all_rows.begin(), all_rows.end(), 0);
    rows = &all_rows;
  }
  const int n = static_cast<int>(program.num_variables());
  form->structurals = n;

  std::vector<double> row_lower;
  std::vector<double> row_upper;
  std::map<std::vector<std::pair<int, double>>, int> by_lhs;
  for (int source : *rows) {
    const Constraint& c = program.constraints()[source];
    std::vector<std::pair<int, double>> key;
    key.reserve(c.expr.terms().size());
    for (const LinearExpr::Term& t : c.expr.terms()) key.emplace_back(t.var, t.coef);
    auto [it, inserted] = by_lhs.emplace(std::move(key), form->rows);
    const int r = it->second;
    if (inserted) {
      ++form->rows;
      form->a.resize(static_cast<std::size_t>(form->rows) * n, 0.0);
      for (const LinearExpr::Term& t : c.expr.terms()) {
        form->a[static_cast<std::size_t>(r) * n + t.var] = t.coef;
      }
      row_lower.push_back(-kInf);
      row_upper.push_back(kInf);
      form->lower_source.push_back(-1);
      form->upper_source.push_back(-1);
    }
    if (c.sense != Sense::kLessEqual && c.rhs > row_lower[r]) {
      row_lower[r] = c.rhs;
      form->lower_source[r] = source;
    }
    if (c.sense != Sense::kGreaterEqual && c.rhs < row_upper[r]) {
      row_upper[r] = c.rhs;
      form->upper_source[r] = source;
    }
  }

  const int m = form->rows;
  form->lower.resize(n + m);
  form->upper.resize(n + m);
  form->cost.assign(n + m, 0.0);
  for (int j = 0; j < n; ++j) {
    const Variable& v = program.variables()[j];
    form->lower[j] = v.binary ? std::max(0.0, v.lower) : v.lower;
    form->upper[j] = v.binary ? std::min(1.0, v.upper) : v.upper;
  }
  for (int r = 0; r < m; ++r) {
    form->lower[n + r] = row_lower[r];
    form->upper[n + r] = row_upper[r];
  }
  for (const LinearExpr::Term& t : program.objective().terms()) form->cost[t.var] = t.coef;
  form->objective_constant = program.objective().constant();
  return form;
}

StopCheck::StopCheck(double time_limit_seconds, std::shared_ptr<const std::atomic<bool>> cancel)
    : cancel_(std::move(cancel)) {
  if (std::isfinite(time_limit_seconds)) {
    has_deadline_ = true;
    deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(std::max(0.0, time_limit_seconds)));
  }
}

bool StopCheck::Expired() const {
  if (cancel_ && cancel_->load(std::memory_order_relaxed)) return true;
  return has_deadline_ && std::chrono::steady_clock::now() >= deadline_;
}

DenseSimplex::DenseSimplex(std::shared_ptr<const StandardForm> form, SimplexTolerances tol,
                           std::uint64_t seed)
    : form_(std::move(form)), tol_(tol), seed_(seed) {
  rows_ = form_->rows;
  cols_ = form_->columns();
  lower_ = form_->lower;
  upper_ = form_->upper;
  iteration_limit_ = 50LL * (rows_ + cols_) + 10000;
  InitSlackBasis();
}

void DenseSimplex::InitSlackBasis() {
  const int n = form_->structurals;
  tableau_.assign(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    for (int j = 0; j < n; ++j) T(r, j) = -form_->a[static_cast<std::size_t>(r) * n + j];
    T(r, n + r) = 1.0;
  }
  basis_.resize(rows_);
  state_.assign(cols_, State::kAtLower);
  x_.assign(cols_, 0.0);
  for (int j = 0; j < n; ++j) {
    if (std::isfinite(lower_[j])) {
      state_[j] = State::kAtLower;
      x_[j] = lower_[j];
    } else if (std::isfinite(upper_[j])) {
      state_[j] = State::kAtUpper;
      x_[j] = upper_[j];
    } else {
      state_[j] = State::kFree;
      x_[j] = 0.0;
    }
  }
  beta_.resize(rows_);
  for (int r = 0; r < rows_; ++r) {
    basis_[r] = n + r;
    state_[n + r] = State::kBasic;
    double v = 0.0;
    for (int j = 0; j < n; ++j) v -= T(r, j) * x_[j];
    beta_[r] = v;
  }
  reduced_.assign(cols_, 0.0);
}

void DenseSimplex::ComputeReducedCosts(const std::vector<double>& cost) {
  reduced_ = cost;
  for (int r = 0; r < rows_; ++r) {
    const double cb = cost[basis_[r]];
    if (cb == 0.0) continue;
    const double* row = &tableau_[static_cast<std::size_t>(r) * cols_];
    for (int j = 0; j < cols_; ++j) reduced_[j] -= cb * row[j];
  }
  for (int r = 0; r < rows_; ++r) reduced_[basis_[r]] = 0.0;
}

void DenseSimplex::PerturbReducedCosts() {
  std::mt19937_64 rng(seed_ + 0x9e3779b97f4a7c15ULL * ++perturbations_);
  std::uniform_real_distribution<double> u(1.0, 2.0);
  for (int j = 0; j < cols_; ++j) {
    if (lower_[j] == upper_[j]) continue;
    const double shift = kCostPerturbation * u(rng);
    if (state_[j] == State::kAtLower) reduced_[j] = std::max(reduced_[j], 0.0) + shift;
    if (state_[j] == State::kAtUpper) reduced_[j] = std::min(reduced_[j], 0.0) - shift;
  }
}

void DenseSimplex::ApplyStep(int col, double delta) {
  if (delta == 0.0) return;
  for (int r = 0; r < rows_; ++r) {
    const double a = T(r, col);
    if (a != 0.0) beta_[r] -= a * delta;
  }
  x_[col] += delta;
}

void DenseSimplex::Pivot(int row, int col) {
  double* prow = &tableau_[static_cast<std::size_t>(row) * cols_];
  const double inv = 1.0 / prow[col];
  scratch_nz_.clear();
  for (int j = 0; j < cols_; ++j) {
    if (prow[j] == 0.0) continue;
    prow[j] *= inv;
    if (std::abs(prow[j]) < kDropTol) {
      prow[j] = 0.0;
    } else {
      scratch_nz_.push_back(j);
    }
  }
  prow[col] = 1.0;
  for (int r = 0; r < rows_; ++r) {
    if (r == row) continue;
    double* trow = &tableau_[static_cast<std::size_t>(r) * cols_];
    const double f = trow[col];
    if (f == 0.0) continue;
    for (int j : scratch_nz_) trow[j] -= f * prow[j];
    trow[col] = 0.0;
  }
  const double f = reduced_[col];
  if (f != 0.0) {
    for (int j : scratch_nz_) reduced_[j] -= f * prow[j];
  }
  reduced_[col] = 0.0;
  basis_[row] = col;
  state_[col] = State::kBasic;
  beta_[row] = x_[col];
  ++iterations_;
}

double DenseSimplex::PrimalInfeasibility(int row) const {
  const int p = basis_[row];
  const double v = beta_[row];
  if (v < lower_[p] - tol_.primal) return lower_[p] - v;
  if (v > upper_[p] + tol_.primal) return v - upper_[p];
  return 0.0;
}

SimplexResult DenseSimplex::RunDual(const StopCheck& stop) {
  bool bland = false;
  int degenerate_streak = 0;
  std::int64_t local = 0;
  while (true) {
    if ((++local & 63) == 0 && stop.Expired()) return SimplexResult::kStopped;
    if (local > iteration_limit_) return SimplexResult::kNumerical;

    int leave_row = -1;
    double worst = 0.0;
    for (int r = 0; r < rows_; ++r) {
      const double inf = PrimalInfeasibility(r);
      if (inf <= 0.0) continue;
      if (bland) {
        if (leave_row < 0 || basis_[r] < basis_[leave_row]) leave_row = r;
      } else if (inf > worst) {
        worst = inf;
        leave_row = r;
      }
    }
    if (leave_row < 0) return SimplexResult::kOptimal;

    const int p = basis_[leave_row];
    const bool increase = beta_[leave_row] < lower_[p];
    const double target = increase ? lower_[p] : upper_[p];
    const double* prow = &tableau_[static_cast<std::size_t>(leave_row) * cols_];

    // Harris two-pass ratio test on |d_j| / |alpha_j|.
    auto dual_slack = [&](int j) {
      const double d = reduced_[j];
      switch (state_[j]) {
        case State::kAtLower: return std::max(0.0, d);
        case State::kAtUpper: return std::max(0.0, -d);
        default: return 0.0;
      }
    };
    auto eligible = [&](int j) {
      const double a = prow[j];
      if (std::abs(a) <= tol_.pivot) return false;
      switch (state_[j]) {
        case State::kBasic: return false;
        case State::kFree: return true;
        case State::kAtLower:
          if (lower_[j] == upper_[j]) return false;
          return increase ? a < 0.0 : a > 0.0;
        case State::kAtUpper:
          if (lower_[j] == upper_[j]) return false;
          return increase ? a > 0.0 : a < 0.0;
      }
      return false;
    };
    double bound = kInf;
    for (int j = 0; j < cols_; ++j) {
      if (!eligible(j)) continue;
      bound = std::min(bound, (dual_slack(j) + tol_.dual) / std::abs(prow[j]));
    }
    if (!std::isfinite(bound)) return SimplexResult::kInfeasible;
    int enter = -1;
    double best_alpha = 0.0;
    double best_ratio = kInf;
    for (int j = 0; j < cols_; ++j) {
      if (!eligible(j)) continue;
      const double ratio = dual_slack(j) / std::abs(prow[j]);
      if (ratio > bound) continue;
      if (bland) {
        if (ratio < best_ratio - 1e-12 || (ratio <= best_ratio + 1e-12 && (enter < 0 || j < enter))) {
          if (ratio < best_ratio) best_ratio = ratio;
          enter = j;
        }
      } else if (std::abs(prow[j]) > best_alpha) {
        best_alpha = std::abs(prow[j]);
        enter = j;
        best_ratio = ratio;
      }
    }
    if (enter < 0) return SimplexResult::kInfeasible;

    const double delta = (beta_[leave_row] - target) / prow[enter];
    ApplyStep(enter, delta);
    state_[p] = increase ? State::kAtLower : State::kAtUpper;
    x_[p] = target;
    Pivot(leave_row, enter);

    if (best_ratio <= tol_.dual) {
      if (++degenerate_streak > kDegenerateStreakForBland) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }
  }
}

SimplexResult DenseSimplex::RunPrimal(const StopCheck& stop) {
  bool bland = false;
  int degenerate_streak = 0;
  std::int64_t local = 0;
  while (true) {
    if ((++local & 63) == 0 && stop.Expired()) return SimplexResult::kStopped;
    if (local > iteration_limit_) return SimplexResult::kNumerical;

    int enter = -1;
    double best = 0.0;
    for (int j = 0; j < cols_; ++j) {
      const double d = reduced_[j];
      double score = 0.0;
      switch (state_[j]) {
        case State::kBasic: continue;
        case State::kAtLower:
          if (d < -tol_.dual && upper_[j] > lower_[j]) score = -d;
          break;
        case State::kAtUpper:
          if (d > tol_.dual && upper_[j] > lower_[j]) score = d;
          break;
        case State::kFree:
          if (std::abs(d) > tol_.dual) score = std::abs(d);
          break;
      }
      if (score <= 0.0) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (score > best) {
        best = score;
        enter = j;
      }
    }
    if (enter < 0) return SimplexResult::kOptimal;

    const double dir = reduced_[enter] < 0.0 ? 1.0 : -1.0;
    const double own_range = upper_[enter] - lower_[enter];

    double bound = kInf;
    for (int r = 0; r < rows_; ++r) {
      const double alpha = T(r, enter) * dir;
      const int p = basis_[r];
      if (alpha > tol_.pivot && std::isfinite(lower_[p])) {
        bound = std::min(bound, (beta_[r] - lower_[p] + tol_.primal) / alpha);
      } else if (alpha < -tol_.pivot && std::isfinite(upper_[p])) {
        bound = std::min(bound, (upper_[p] - beta_[r] + tol_.primal) / -alpha);
      }
    }
    if (!std::isfinite(bound) && !std::isfinite(own_range)) return SimplexResult::kUnbounded;

    if (own_range <= bound) {
      // Bound flip without a basis change.
      ApplyStep(enter, dir * own_range);
      state_[enter] = state_[enter] == State::kAtLower ? State::kAtUpper : State::kAtLower;
      x_[enter] = state_[enter] == State::kAtLower ? lower_[enter] : upper_[enter];
      degenerate_streak = 0;
      bland = false;
      continue;
    }

    int leave_row = -1;
    double best_alpha = 0.0;
    double step = 0.0;
    for (int r = 0; r < rows_; ++r) {
      const double alpha = T(r, enter) * dir;
      const int p = basis_[r];
      double ratio;
      if (alpha > tol_.pivot && std::isfinite(lower_[p])) {
        ratio = std::max(0.0, (beta_[r] - lower_[p]) / alpha);
      } else if (alpha < -tol_.pivot && std::isfinite(upper_[p])) {
        ratio = std::max(0.0, (upper_[p] - beta_[r]) / -alpha);
      } else {
        continue;
      }
      if (ratio > bound) continue;
      if (bland) {
        if (leave_row < 0 || ratio < step - 1e-12 ||
            (ratio <= step + 1e-12 && basis_[r] < basis_[leave_row])) {
          leave_row = r;
          step = ratio;
        }
      } else if (std::abs(alpha) > best_alpha) {
        best_alpha = std::abs(alpha);
        leave_row = r;
        step = ratio;
      }
    }
    if (leave_row < 0) return SimplexResult::kNumerical;

    const double alpha = T(leave_row, enter) * dir;
    const int p = basis_[leave_row];
    ApplyStep(enter, dir * step);
    if (alpha > 0.0) {
      state_[p] = State::kAtLower;
      x_[p] = lower_[p];
    } else {
      state_[p] = State::kAtUpper;
      x_[p] = upper_[p];
    }
    Pivot(leave_row, enter);

    if (step <= 1e-12) {
      if (++degenerate_streak > kDegenerateStreakForBland) bland = true;
    } else {
      degenerate_streak = 0;
      bland = false;
    }
  }
}

bool DenseSimplex::CheckAccuracy() {
  const int n = form_->structurals;
  std::vector<double> rhs(rows_, 0.0);
  for (int j = 0; j < cols_; ++j) {
    if (state_[j] == State::kBasic || x_[j] == 0.0) continue;
    if (j < n) {
      for (int r = 0; r < rows_; ++r) rhs[r] += form_->a[static_cast<std::size_t>(r) * n + j] * x_[j];
    } else {
      rhs[j - n] -= x_[j];
    }
  }
  double drift = 0.0;
  for (int r = 0; r < rows_; ++r) {
    const double* row = &tableau_[static_cast<std::size_t>(r) * cols_ + n];
    double v = 0.0;
    for (int k = 0; k < rows_; ++k) v += row[k] * rhs[k];
    drift = std::max(drift, std::abs(v - beta_[r]));
    beta_[r] = v;
  }
  return drift <= kDriftTol;
}

bool DenseSimplex::Refactor() {
  const int n = form_->structurals;
  std::vector<double> fresh(static_cast<std::size_t>(rows_) * cols_, 0.0);
  for (int r = 0; r < rows_; ++r) {
    for (int j = 0; j < n; ++j) {
      fresh[static_cast<std::size_t>(r) * cols_ + j] = -form_->a[static_cast<std::size_t>(r) * n + j];
    }
    fresh[static_cast<std::size_t>(r) * cols_ + n + r] = 1.0;
  }
  std::vector<int> columns = basis_;
  std::vector<int> new_basis(rows_, -1);
  std::vector<char> used(rows_, 0);
  for (int c : columns) {
    int pivot_row = -1;
    double best = 1e-11;
    for (int r = 0; r < rows_; ++r) {
      if (used[r]) continue;
      const double v = std::abs(fresh[static_cast<std::size_t>(r) * cols_ + c]);
      if (v > best) {
        best = v;
        pivot_row = r;
      }
    }
    if (pivot_row < 0) return false;
    used[pivot_row] = 1;
    new_basis[pivot_row] = c;
    double* prow = &fresh[static_cast<std::size_t>(pivot_row) * cols_];
    const double inv = 1.0 / prow[c];
    for (int j = 0; j < cols_; ++j) prow[j] *= inv;
    prow[c] = 1.0;
    for (int r = 0; r < rows_; ++r) {
      if (r == pivot_row) continue;
      double* trow = &fresh[static_cast<std::size_t>(r) * cols_];
      const double f = trow[c];
      if (f == 0.0) continue;
      for (int j = 0; j < cols_; ++j) trow[j] -= f * prow[j];
      trow[c] = 0.0;
    }
  }
  tableau_ = std::move(fresh);
  basis_ = std::move(new_basis);
  CheckAccuracy();
  return true;
}

SimplexResult DenseSimplex::Solve(const StopCheck& stop) {
  InitSlackBasis();
  const int n = form_->structurals;
  std::mt19937_64 rng(seed_);
  std::uniform_real_distribution<double> jitter(0.0, 1e-3);
  std::vector<double> phase_one(cols_, 0.0);
  for (int j = 0; j < n; ++j) {
    const double c = 1.0 + jitter(rng);
    if (state_[j] == State::kAtLower) phase_one[j] = c;
    if (state_[j] == State::kAtUpper) phase_one[j] = -c;
  }
  ComputeReducedCosts(phase_one);
  SimplexResult result = RunDual(stop);
  if (result != SimplexResult::kOptimal) return result;
  ComputeReducedCosts(form_->cost);
  return Reoptimize(stop);
}

SimplexResult DenseSimplex::Reoptimize(const StopCheck& stop) {
  for (int attempt = 0; attempt < 3; ++attempt) {
    PerturbReducedCosts();
    SimplexResult result = RunDual(stop);
    if (result == SimplexResult::kOptimal) {
      ComputeReducedCosts(form_->cost);
      result = RunPrimal(stop);
    }
    if (result != SimplexResult::kOptimal) {
      if (result == SimplexResult::kNumerical && attempt < 2 && Refactor()) {
        ComputeReducedCosts(form_->cost);
        continue;
      }
      return result;
    }
    if (CheckAccuracy()) return SimplexResult::kOptimal;
    if (!Refactor()) return SimplexResult::kNumerical;
    ComputeReducedCosts(form_->cost);
  }
  return SimplexResult::kNumerical;
}

void DenseSimplex::SetBounds(int col, double lower, double upper) {
  lower_[col] = lower;
  upper_[col] = upper;
  if (state_[col] == State::kBasic) return;
  double target;
  if (lower == upper) {
    target = lower;
    state_[col] = State::kAtLower;
  } else if (state_[col] == State::kAtUpper && std::isfinite(upper)) {
    target = upper;
  } else if (std::isfinite(lower)) {
    target = lower;
    state_[col] = State::kAtLower;
  } else if (std::isfinite(upper)) {
    target = upper;
    state_[col] = State::kAtUpper;
  } else {
    target = 0.0;
    state_[col] = State::kFree;
  }
  ApplyStep(col, target - x_[col]);
  x_[col] = target;
}

std::vector<double> DenseSimplex::StructuralValues() const {
  const int n = form_->structurals;
  std::vector<double> values(x_.begin(), x_.begin() + n);
  for (int r = 0; r < rows_; ++r) {
    if (basis_[r] < n) values[basis_[r]] = beta_[r];
  }
  return values;
}

std::vector<double> DenseSimplex::RowDuals() const {
  const int n = form_->structurals;
  std::vector<double> y(rows_);
  for (int r = 0; r < rows_; ++r) y[r] = reduced_[n + r];
  return y;
}

double DenseSimplex::Objective() const {
  const std::vector<double> values = StructuralValues();
  double obj = form_->objective_constant;
  for (int j = 0; j < form_->structurals; ++j) obj += form_->cost[j] * values[j];
  return obj;
}

std::size_t DenseSimplex::MemoryBytes() const {
  return sizeof(double) * (tableau_.size() + reduced_.size() + beta_.size() + x_.size() +
                           lower_.size() + upper_.size()) +
         sizeof(int) * basis_.size() + state_.size();
}

}  // namespace linrank::lp::internal
