#ifndef LINRANK_FORMULATE_H_
#define LINRANK_FORMULATE_H_

// Builds engine programs for the two ranking-explanation problems:
//   SAT: does some W on the simplex reproduce the top-k of a given ranking?
//   OPT: which W minimizes the (importance-weighted) position error?

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "linrank/lp.h"
#include "linrank/model.h"

namespace linrank {

// sum_i coefs[i] * w_i <sense> rhs
struct WeightConstraint {
  std::vector<double> coefs;
  lp::Sense sense = lp::Sense::kLessEqual;
  double rhs = 0.0;
  std::string text;
};

// User restrictions on admissible weights, on top of the implicit w >= 0 and
// sum w = 1.
class WeightPredicate {
 public:
  WeightPredicate() = default;

  // One constraint per line: `<terms> <op> <terms>` where terms are sums of
  // [number [*]] attribute or plain numbers, op is one of <=, >=, =.
  // Blank lines and '#' comments are skipped. Throws InputError on unknown
  // attributes, strict operators, or malformed lines.
  static WeightPredicate Parse(std::string_view text, std::span<const std::string> columns);
  static WeightPredicate ParseLines(std::span<const std::string> lines,
                                    std::span<const std::string> columns);

  void Add(WeightConstraint c) { constraints_.push_back(std::move(c)); }
  const std::vector<WeightConstraint>& constraints() const { return constraints_; }
  bool empty() const { return constraints_.empty(); }
  std::size_t size() const { return constraints_.size(); }
  bool Satisfied(std::span<const double> w, double tol) const;

 private:
  std::vector<WeightConstraint> constraints_;
};

// Gap thresholds that keep strict comparisons meaningful under the engine's
// feasibility tolerance tau: a "greater" pair must differ by at least eps1 and
// a "not greater" pair by at most eps2.
struct EpsilonConfig {
  double tau = 1e-9;
  double eps1 = 1e-4;
  double eps2 = 0.0;
  double escalation_factor = 10.0;
  int max_escalations = 6;

  // Smallest eps1 - eps2 that survives a tau-violation on both sides:
  // 2 * (smallest double above tau).
  double Floor() const;
  // Throws std::invalid_argument on tau <= 0, eps1 <= eps2, a factor <= 1, or
  // (when enforce_floor) eps1 - eps2 below Floor().
  void Validate(bool enforce_floor) const;
};

enum class ObjectiveKind {
  // sum over the top-k of u_r * |rho_W(r) - pi(r)|
  kPositionSum,
  // max over the top-k of u_r * |rho_W(r) - pi(r)|
  kMaxPosition,
};

std::optional<ObjectiveKind> ParseObjectiveKind(std::string_view name);
std::string_view ToString(ObjectiveKind kind);

struct ProblemSpec {
  Relation relation;
  GivenRanking ranking;
  int k = 1;
  WeightPredicate predicate;
  // Importance u_r by tuple id; absent ids weigh 1.
  std::unordered_map<std::string, double> importance;
  EpsilonConfig epsilon;
  ObjectiveKind objective = ObjectiveKind::kPositionSum;
  TopKMode top_k_mode = TopKMode::kPermutationPrefix;

  // Throws InputError when k is out of range, the ranking does not match the
  // relation, importance names unknown ids or negative factors, or predicate
  // arity differs from m.
  void Validate() const;

  // Number of leading ranking positions in R_pi(k).
  std::size_t TopCount() const { return ranking.TopKCount(k, top_k_mode); }
  // Relation index of every ranking position.
  std::vector<std::size_t> PositionToIndex() const;
  double ImportanceOf(const std::string& id) const;
};

// Reads `id,factor` lines (optional header) into an importance map.
std::unordered_map<std::string, double> ParseImportanceCsv(std::string_view text);

enum class PairOrder { kIncomparable, kDominates, kDominated, kIdentical };

// Componentwise comparison of s against r: kDominates when s >= r everywhere
// and strictly somewhere.
PairOrder CompareTuples(const TupleRecord& s, const TupleRecord& r);

// All dominator/dominatee pairs of a relation (quadratic scan).
class DominanceIndex {
 public:
  explicit DominanceIndex(const Relation& relation);

  bool Dominates(std::size_t s, std::size_t r) const;
  // Tuples dominating r.
  const std::vector<std::size_t>& Dominators(std::size_t r) const { return dominators_[r]; }
  // Tuples dominated by r.
  const std::vector<std::size_t>& Dominatees(std::size_t r) const { return dominatees_[r]; }

 private:
  std::vector<std::vector<std::size_t>> dominators_;
  std::vector<std::vector<std::size_t>> dominatees_;
};

// Axis-aligned bounds on the weights (a cell), intersected with the simplex.
struct WeightBox {
  std::vector<double> lower;
  std::vector<double> upper;

  static WeightBox Around(std::span<const double> center, double half_width);
};

// Range of sum_i d_i w_i over box-and-simplex (full simplex when box is null).
// Returns nullopt when the intersection is empty.
std::optional<std::pair<double, double>> ScoreDifferenceRange(std::span<const double> d,
                                                              const WeightBox* box);

struct SatProgram {
  lp::Program program;
  std::vector<lp::VarId> weights;
};

// Continuous program: adjacent top-k pairs differ by >= eps1 (GREATER) or are
// equal (EQUAL); the k-th tuple scores at least every tuple below the top-k;
// the predicate and the simplex restrict W. Objective 0.
SatProgram BuildSat(const ProblemSpec& spec, const EpsilonConfig& eps);

struct IndicatorPair {
  std::size_t s;  // relation index of the competitor
  std::size_t r;  // relation index of the top-k tuple
  lp::VarId var;
  double big_m;
};

struct IndicatorLayout {
  std::vector<IndicatorPair> pairs;
  // Per top-k position: competitors proven to score >= eps1 above r (n2)
  // and competitors proven to score at most eps2 above r (n1).
  std::vector<int> forced_above;
  std::vector<int> forced_below;
  std::vector<lp::VarId> error_vars;
};

struct OptOptions {
  // Resolve indicators whose value every admissible W agrees on.
  bool prune = true;
  // Restricts W to a cell; pruning then also uses the cell.
  std::optional<WeightBox> box;
};

struct OptProgram {
  lp::Program program;
  std::vector<lp::VarId> weights;
  IndicatorLayout layout;
  // Relation indices of the top-k positions, in ranking order.
  std::vector<std::size_t> top;
  // 1 when every integer-feasible objective is an integer, else 0.
  double granularity = 0.0;
};

// Indicator program: delta_sr = 1 forces f(s) - f(r) >= eps1, delta_sr = 0
// forces f(s) - f(r) <= eps2, and each top-k tuple r pays
// u_r * |pi(r) - 1 - n2(r) - sum_s delta_sr|.
OptProgram BuildOpt(const ProblemSpec& spec, const EpsilonConfig& eps, const OptOptions& options = {});

// Full assignment for `opt` induced by weights w: indicators from score gaps
// (split at (eps1 + eps2) / 2), error terms from the resulting counts. Used as
// a MIP start and by the branch-and-bound heuristic.
std::vector<double> AssignmentFromWeights(const OptProgram& opt, const ProblemSpec& spec,
                                          const EpsilonConfig& eps, std::span<const double> w);

}  // namespace linrank

#endif  // LINRANK_FORMULATE_H_
