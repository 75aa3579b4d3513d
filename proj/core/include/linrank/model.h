#ifndef LINRANK_MODEL_H_
#define LINRANK_MODEL_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace linrank {

// Raised for malformed user input: CSV, ranking files, predicates, weights.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TupleRecord {
  std::string id;
  std::vector<double> attrs;
};

// A relation of n tuples over m numeric ranking attributes.
class Relation {
 public:
  Relation() = default;
  // Throws InputError on empty input, ragged rows, or duplicate ids.
  Relation(std::vector<std::string> columns, std::vector<TupleRecord> tuples);

  const std::vector<std::string>& columns() const { return columns_; }
  const std::vector<TupleRecord>& tuples() const { return tuples_; }
  const TupleRecord& tuple(std::size_t i) const { return tuples_[i]; }
  std::size_t size() const { return tuples_.size(); }
  std::size_t num_attributes() const { return columns_.size(); }

  // Index of the tuple with the given id, or nullopt.
  std::optional<std::size_t> IndexOf(std::string_view id) const;
  // Index of the attribute column, or nullopt.
  std::optional<std::size_t> ColumnIndex(std::string_view name) const;

  // Copy with later duplicates of identical attribute rows removed
  // (first occurrence in file order wins).
  Relation Deduplicated() const;
  // Copy restricted to the listed attribute columns, in the given order.
  Relation ProjectColumns(std::span<const std::size_t> columns) const;
  // Copy restricted to the listed tuple indices, in the given order.
  Relation Subset(std::span<const std::size_t> indices) const;

 private:
  std::vector<std::string> columns_;
  std::vector<TupleRecord> tuples_;
  std::unordered_map<std::string, std::size_t> index_;
};

// Reads `id,<attr>,...` CSV with a mandatory header row.
Relation LoadRelation(const std::filesystem::path& path, bool dedup);
Relation ParseRelationCsv(std::string_view text, bool dedup);
std::string RelationToCsv(const Relation& relation);

enum class Order { kGreater, kEqual };

enum class TopKMode {
  // R_pi(k) is the first k tuples of the permutation.
  kPermutationPrefix,
  // R_pi(k) is every tuple whose rank is at most k (a tie group straddling
  // position k is included as a whole).
  kRankCutoff,
};

// A permutation of tuple ids with a > or = relation between neighbours.
class GivenRanking {
 public:
  GivenRanking() = default;
  // relations.size() must equal order.size() - 1.
  GivenRanking(std::vector<std::string> order, std::vector<Order> relations);

  // All-GREATER chain.
  static GivenRanking Strict(std::vector<std::string> order);

  const std::vector<std::string>& order() const { return order_; }
  const std::vector<Order>& relations() const { return relations_; }
  std::size_t size() const { return order_.size(); }

  // Rank of the tuple at permutation position `pos` (0-based).
  int RankAt(std::size_t pos) const { return ranks_[pos]; }
  // pi(r) = 1 + |{r' strictly above r}|. Throws std::out_of_range on an
  // unknown id.
  int RankOf(std::string_view id) const;

  // Number of leading permutation positions forming R_pi(k).
  std::size_t TopKCount(int k, TopKMode mode = TopKMode::kPermutationPrefix) const;

  // Checks that the order is a permutation of the relation's ids.
  void CheckAgainst(const Relation& relation) const;

  // Prefix of the first `count` positions.
  GivenRanking Prefix(std::size_t count) const;

 private:
  std::vector<std::string> order_;
  std::vector<Order> relations_;
  std::vector<int> ranks_;
  std::unordered_map<std::string, std::size_t> position_;
};

// Ranking file: one id per line; every line after the first is prefixed by
// '>' or '='. Blank lines and '#' comments are ignored.
GivenRanking ParseRankingText(std::string_view text);
GivenRanking LoadRanking(const std::filesystem::path& path);
std::string RankingToText(const GivenRanking& ranking);

// Non-negative weights on the probability simplex.
class WeightVector {
 public:
  static constexpr double kSumTolerance = 1e-9;

  WeightVector() = default;
  // Throws std::invalid_argument unless every w_i >= 0 and sum is 1.
  explicit WeightVector(std::vector<double> w);
  // Clips tiny negatives and rescales a non-negative vector to sum 1.
  static WeightVector Normalized(std::vector<double> w);
  static WeightVector Uniform(std::size_t m);

  const std::vector<double>& values() const { return w_; }
  double operator[](std::size_t i) const { return w_[i]; }
  std::size_t size() const { return w_.size(); }

 private:
  std::vector<double> w_;
};

// f_W(t) = sum_i w_i * t.A_i. Throws std::invalid_argument on arity mismatch.
double Score(std::span<const double> w, const TupleRecord& t);
inline double Score(const WeightVector& w, const TupleRecord& t) {
  return Score(std::span<const double>(w.values()), t);
}

// Ranks induced by scores: 1 + |{r' : score(r') > score(r) + tie_tol}|.
class ScoredRanking {
 public:
  ScoredRanking(std::vector<double> scores, double tie_tol);

  const std::vector<double>& scores() const { return scores_; }
  int RankOf(std::size_t index) const { return ranks_[index]; }
  const std::vector<int>& ranks() const { return ranks_; }
  // Tuple indices by descending score; ties keep index order.
  const std::vector<std::size_t>& order() const { return order_; }
  // Any valid top-k result R_W(k): the first k entries of order().
  std::vector<std::size_t> TopK(std::size_t k) const;

 private:
  std::vector<double> scores_;
  std::vector<int> ranks_;
  std::vector<std::size_t> order_;
};

ScoredRanking RankingFromScores(const Relation& relation, std::span<const double> w,
                                double tie_tol);
inline ScoredRanking RankingFromScores(const Relation& relation, const WeightVector& w,
                                       double tie_tol) {
  return RankingFromScores(relation, std::span<const double>(w.values()), tie_tol);
}

enum class NormalizationMode { kMinMax, kMean, kZScore };

std::optional<NormalizationMode> ParseNormalizationMode(std::string_view name);
std::string_view ToString(NormalizationMode mode);

struct AttributeStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
};

// Per-attribute statistics; each normalization maps A_i to c_i * A_i + c'_i.
class NormalizationStats {
 public:
  static NormalizationStats Compute(const Relation& relation);

  const std::vector<AttributeStats>& attributes() const { return attrs_; }
  // c_i of the given mode.
  double Scale(std::size_t i, NormalizationMode mode) const;
  // c'_i of the given mode.
  double Offset(std::size_t i, NormalizationMode mode) const;

 private:
  std::vector<AttributeStats> attrs_;
};

// Relation with every attribute replaced by c_i * A_i + c'_i.
Relation NormalizeRelation(const Relation& relation, const NormalizationStats& stats,
                           NormalizationMode mode);

// Weights that reproduce the raw-data ranking of W on normalized data:
// w_i / c_i, rescaled to the simplex. Throws std::invalid_argument when some
// attribute is constant (c_i undefined).
WeightVector TransformWeights(const WeightVector& w, const NormalizationStats& stats,
                              NormalizationMode mode);

// n tuples with iid uniform [0, 1) attributes named A1..Am, ids t1..tn.
Relation GenerateUniform(std::size_t n, std::size_t m, std::uint64_t seed);

// Ranking by attribute sum, descending (all GREATER).
GivenRanking RankBySum(const Relation& relation);
// Ranking by the score of W, descending (all GREATER).
GivenRanking RankByWeights(const Relation& relation, std::span<const double> w);

// Sorts by attribute sum descending and moves positions 6..10 to the front.
// Requires n >= 10.
GivenRanking BuildUnsatRanking(const Relation& relation);

}  // namespace linrank

#endif  // LINRANK_MODEL_H_
