#include "linrank/model.h"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace linrank {
namespace {

std::string_view Trim(std::string_view s) {
  const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
  while (!s.empty() && !not_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && !not_space(s.back())) s.remove_suffix(1);
  return s;
}

// Splits one CSV record. Supports double-quoted fields with "" escapes.
std::vector<std::string> SplitCsvLine(std::string_view line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          current.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        current.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back(Trim(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (quoted) {
    throw InputError("line " + std::to_string(line_no) + ": unterminated quoted field");
  }
  fields.emplace_back(Trim(current));
  return fields;
}

double ParseNumber(std::string_view cell, std::size_t line_no) {
  cell = Trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size() ||
      !std::isfinite(value)) {
    throw InputError("line " + std::to_string(line_no) + ": non-numeric cell '" +
                     std::string(cell) + "'");
  }
  return value;
}

std::string ReadFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string FormatNumber(double v) {
  std::array<char, 32> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

void CheckFinite(double v, const char* what) {
  if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + " is not finite");
}

}  // namespace

Relation::Relation(std::vector<std::string> columns, std::vector<TupleRecord> tuples)
    : columns_(std::move(columns)), tuples_(std::move(tuples)) {
  if (columns_.empty()) throw InputError("relation has no ranking attributes");
  if (tuples_.empty()) throw InputError("empty relation");
  for (std::size_t i = 0; i < tuples_.size(); ++i) {
    const TupleRecord& t = tuples_[i];
    if (t.attrs.size() != columns_.size()) {
      throw InputError("tuple '" + t.id + "' has " + std::to_string(t.attrs.size()) +
                       " attributes, expected " + std::to_string(columns_.size()));
    }
    if (!index_.emplace(t.id, i).second) throw InputError("duplicate id '" + t.id + "'");
  }
}

std::optional<std::size_t> Relation::IndexOf(std::string_view id) const {
  const auto it = index_.find(std::string(id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Relation::ColumnIndex(std::string_view name) const {
  const auto it = std::find(columns_.begin(), columns_.end(), name);
  if (it == columns_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - columns_.begin());
}

Relation Relation::Deduplicated() const {
  std::map<std::vector<double>, std::size_t> seen;
  std::vector<TupleRecord> kept;
  kept.reserve(tuples_.size());
  for (const TupleRecord& t : tuples_) {
    if (seen.emplace(t.attrs, kept.size()).second) kept.push_back(t);
  }
  return Relation(columns_, std::move(kept));
}

Relation Relation::ProjectColumns(std::span<const std::size_t> columns) const {
  std::vector<std::string> names;
  for (std::size_t c : columns) names.push_back(columns_.at(c));
  std::vector<TupleRecord> projected;
  projected.reserve(tuples_.size());
  for (const TupleRecord& t : tuples_) {
    TupleRecord p{t.id, {}};
    for (std::size_t c : columns) p.attrs.push_back(t.attrs[c]);
    projected.push_back(std::move(p));
  }
  return Relation(std::move(names), std::move(projected));
}

Relation Relation::Subset(std::span<const std::size_t> indices) const {
  std::vector<TupleRecord> picked;
  picked.reserve(indices.size());
  for (std::size_t i : indices) picked.push_back(tuples_.at(i));
  return Relation(columns_, std::move(picked));
}

Relation ParseRelationCsv(std::string_view text, bool dedup) {
  std::vector<std::string> columns;
  std::vector<TupleRecord> tuples;
  bool have_header = false;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.remove_prefix(3);
    if (Trim(line).empty()) {
      if (end == text.size()) break;
      continue;
    }
    std::vector<std::string> fields = SplitCsvLine(line, line_no);
    if (!have_header) {
      if (fields.size() < 2) throw InputError("header needs an id column and at least one attribute");
      if (fields.front() != "id") throw InputError("first header column must be 'id'");
      columns.assign(fields.begin() + 1, fields.end());
      have_header = true;
    } else {
      if (fields.size() != columns.size() + 1) {
        throw InputError("line " + std::to_string(line_no) + ": expected " +
                         std::to_string(columns.size() + 1) + " fields, got " +
                         std::to_string(fields.size()));
      }
      if (fields.front().empty()) throw InputError("line " + std::to_string(line_no) + ": empty id");
      TupleRecord t{fields.front(), {}};
      t.attrs.reserve(columns.size());
      for (std::size_t c = 1; c < fields.size(); ++c) t.attrs.push_back(ParseNumber(fields[c], line_no));
      tuples.push_back(std::move(t));
    }
    if (end == text.size()) break;
  }
  if (!have_header) throw InputError("missing header row");
  if (tuples.empty()) throw InputError("empty relation");
  Relation relation(std::move(columns), std::move(tuples));
  return dedup ? relation.Deduplicated() : relation;
}

Relation LoadRelation(const std::filesystem::path& path, bool dedup) {
  return ParseRelationCsv(ReadFile(path), dedup);
}

std::string RelationToCsv(const Relation& relation) {
  std::string out = "id";
  for (const std::string& c : relation.columns()) out += "," + c;
  out += "\n";
  for (const TupleRecord& t : relation.tuples()) {
    out += t.id;
    for (double v : t.attrs) out += "," + FormatNumber(v);
    out += "\n";
  }
  return out;
}

GivenRanking::GivenRanking(std::vector<std::string> order, std::vector<Order> relations)
    : order_(std::move(order)), relations_(std::move(relations)) {
  if (order_.empty()) throw InputError("empty ranking");
  if (relations_.size() + 1 != order_.size()) {
    throw InputError("ranking needs exactly one relation between each adjacent pair");
  }
  ranks_.resize(order_.size());
  ranks_[0] = 1;
  for (std::size_t p = 1; p < order_.size(); ++p) {
    ranks_[p] = relations_[p - 1] == Order::kEqual ? ranks_[p - 1] : static_cast<int>(p) + 1;
  }
  for (std::size_t p = 0; p < order_.size(); ++p) {
    if (!position_.emplace(order_[p], p).second) {
      throw InputError("id '" + order_[p] + "' appears twice in ranking");
    }
  }
}

GivenRanking GivenRanking::Strict(std::vector<std::string> order) {
  const std::size_t n = order.size();
  return GivenRanking(std::move(order), std::vector<Order>(n == 0 ? 0 : n - 1, Order::kGreater));
}

int GivenRanking::RankOf(std::string_view id) const {
  const auto it = position_.find(std::string(id));
  if (it == position_.end()) throw std::out_of_range("unknown id '" + std::string(id) + "'");
  return ranks_[it->second];
}

std::size_t GivenRanking::TopKCount(int k, TopKMode mode) const {
  if (k < 1 || static_cast<std::size_t>(k) > order_.size()) {
    throw std::invalid_argument("k must lie in [1, n]");
  }
  std::size_t count = static_cast<std::size_t>(k);
  if (mode == TopKMode::kRankCutoff) {
    while (count < order_.size() && ranks_[count] <= k) ++count;
  }
  return count;
}

void GivenRanking::CheckAgainst(const Relation& relation) const {
  if (order_.size() != relation.size()) {
    throw InputError("ranking has " + std::to_string(order_.size()) + " ids but relation has " +
                     std::to_string(relation.size()) + " tuples");
  }
  for (const std::string& id : order_) {
    if (!relation.IndexOf(id)) throw InputError("ranking id '" + id + "' not in relation");
  }
}

GivenRanking GivenRanking::Prefix(std::size_t count) const {
  count = std::min(count, order_.size());
  std::vector<std::string> order(order_.begin(), order_.begin() + static_cast<long>(count));
  std::vector<Order> rel(relations_.begin(),
                         relations_.begin() + static_cast<long>(count == 0 ? 0 : count - 1));
  return GivenRanking(std::move(order), std::move(rel));
}

GivenRanking ParseRankingText(std::string_view text) {
  std::vector<std::string> order;
  std::vector<Order> relations;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    if (order.empty()) {
      if (line.front() == '>' || line.front() == '=') {
        throw InputError("line " + std::to_string(line_no) + ": first ranking entry takes no relation prefix");
      }
    } else {
      if (line.front() == '>') {
        relations.push_back(Order::kGreater);
      } else if (line.front() == '=') {
        relations.push_back(Order::kEqual);
      } else {
        throw InputError("line " + std::to_string(line_no) + ": expected '>' or '=' prefix");
      }
      line = Trim(line.substr(1));
    }
    if (line.empty()) throw InputError("line " + std::to_string(line_no) + ": missing id");
    order.emplace_back(line);
  }
  return GivenRanking(std::move(order), std::move(relations));
}

GivenRanking LoadRanking(const std::filesystem::path& path) { return ParseRankingText(ReadFile(path)); }

std::string RankingToText(const GivenRanking& ranking) {
  std::string out;
  for (std::size_t p = 0; p < ranking.size(); ++p) {
    if (p > 0) out += ranking.relations()[p - 1] == Order::kEqual ? "= " : "> ";
    out += ranking.order()[p];
    out += "\n";
  }
  return out;
}

WeightVector::WeightVector(std::vector<double> w) : w_(std::move(w)) {
  if (w_.empty()) throw std::invalid_argument("weight vector is empty");
  double sum = 0.0;
  for (double v : w_) {
    CheckFinite(v, "weight");
    if (v < 0.0) throw std::invalid_argument("weights must be non-negative");
    sum += v;
  }
  if (std::abs(sum - 1.0) > kSumTolerance) {
    throw std::invalid_argument("weights must sum to 1");
  }
}

WeightVector WeightVector::Normalized(std::vector<double> w) {
  double sum = 0.0;
  for (double& v : w) {
    CheckFinite(v, "weight");
    if (v < 0.0) {
      if (v < -1e-9) throw std::invalid_argument("weights must be non-negative");
      v = 0.0;
    }
    sum += v;
  }
  if (!(sum > 0.0)) throw std::invalid_argument("weights must have a positive sum");
  for (double& v : w) v /= sum;
  return WeightVector(std::move(w));
}

WeightVector WeightVector::Uniform(std::size_t m) {
  return WeightVector::Normalized(std::vector<double>(m, 1.0));
}

double Score(std::span<const double> w, const TupleRecord& t) {
  if (w.size() != t.attrs.size()) {
    throw std::invalid_argument("weight dimension " + std::to_string(w.size()) +
                                " does not match tuple arity " + std::to_string(t.attrs.size()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * t.attrs[i];
  return s;
}

ScoredRanking::ScoredRanking(std::vector<double> scores, double tie_tol) : scores_(std::move(scores)) {
  if (tie_tol < 0.0) throw std::invalid_argument("tie tolerance must be non-negative");
  const std::size_t n = scores_.size();
  order_.resize(n);
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  std::stable_sort(order_.begin(), order_.end(),
                   [&](std::size_t a, std::size_t b) { return scores_[a] > scores_[b]; });
  // Descending sorted copy; rank = 1 + number of scores above s + tie_tol.
  std::vector<double> sorted(n);
  for (std::size_t i = 0; i < n; ++i) sorted[i] = scores_[order_[i]];
  ranks_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double threshold = scores_[i] + tie_tol;
    const auto it = std::partition_point(sorted.begin(), sorted.end(),
                                         [&](double s) { return s > threshold; });
    ranks_[i] = 1 + static_cast<int>(it - sorted.begin());
  }
}

std::vector<std::size_t> ScoredRanking::TopK(std::size_t k) const {
  k = std::min(k, order_.size());
  return {order_.begin(), order_.begin() + static_cast<long>(k)};
}

ScoredRanking RankingFromScores(const Relation& relation, std::span<const double> w, double tie_tol) {
  std::vector<double> scores;
  scores.reserve(relation.size());
  for (const TupleRecord& t : relation.tuples()) scores.push_back(Score(w, t));
  return ScoredRanking(std::move(scores), tie_tol);
}

std::optional<NormalizationMode> ParseNormalizationMode(std::string_view name) {
  if (name == "minmax") return NormalizationMode::kMinMax;
  if (name == "mean") return NormalizationMode::kMean;
  if (name == "zscore") return NormalizationMode::kZScore;
  return std::nullopt;
}

std::string_view ToString(NormalizationMode mode) {
  switch (mode) {
    case NormalizationMode::kMinMax: return "minmax";
    case NormalizationMode::kMean: return "mean";
    case NormalizationMode::kZScore: return "zscore";
  }
  return "unknown";
}

NormalizationStats NormalizationStats::Compute(const Relation& relation) {
  NormalizationStats stats;
  const std::size_t m = relation.num_attributes();
  const double n = static_cast<double>(relation.size());
  stats.attrs_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    AttributeStats& a = stats.attrs_[i];
    a.min = a.max = relation.tuple(0).attrs[i];
    double sum = 0.0;
    for (const TupleRecord& t : relation.tuples()) {
      a.min = std::min(a.min, t.attrs[i]);
      a.max = std::max(a.max, t.attrs[i]);
      sum += t.attrs[i];
    }
    a.mean = sum / n;
    double sq = 0.0;
    for (const TupleRecord& t : relation.tuples()) sq += (t.attrs[i] - a.mean) * (t.attrs[i] - a.mean);
    a.stddev = std::sqrt(sq / n);
  }
  return stats;
}

double NormalizationStats::Scale(std::size_t i, NormalizationMode mode) const {
  const AttributeStats& a = attrs_.at(i);
  const double denom = mode == NormalizationMode::kZScore ? a.stddev : a.max - a.min;
  if (!(denom > 0.0)) {
    throw std::invalid_argument("attribute " + std::to_string(i + 1) +
                                " is constant; normalization scale is undefined");
  }
  return 1.0 / denom;
}

double NormalizationStats::Offset(std::size_t i, NormalizationMode mode) const {
  const AttributeStats& a = attrs_.at(i);
  const double c = Scale(i, mode);
  return mode == NormalizationMode::kMinMax ? -a.min * c : -a.mean * c;
}

Relation NormalizeRelation(const Relation& relation, const NormalizationStats& stats,
                           NormalizationMode mode) {
  const std::size_t m = relation.num_attributes();
  std::vector<double> scale(m), offset(m);
  for (std::size_t i = 0; i < m; ++i) {
    scale[i] = stats.Scale(i, mode);
    offset[i] = stats.Offset(i, mode);
  }
  std::vector<TupleRecord> tuples = relation.tuples();
  for (TupleRecord& t : tuples) {
    for (std::size_t i = 0; i < m; ++i) t.attrs[i] = scale[i] * t.attrs[i] + offset[i];
  }
  return Relation(relation.columns(), std::move(tuples));
}

WeightVector TransformWeights(const WeightVector& w, const NormalizationStats& stats,
                              NormalizationMode mode) {
  if (w.size() != stats.attributes().size()) {
    throw std::invalid_argument("weight dimension does not match statistics");
  }
  std::vector<double> out(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) out[i] = w[i] / stats.Scale(i, mode);
  return WeightVector::Normalized(std::move(out));
}

Relation GenerateUniform(std::size_t n, std::size_t m, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be at least 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::string> columns;
  for (std::size_t i = 0; i < m; ++i) columns.push_back("A" + std::to_string(i + 1));
  std::vector<TupleRecord> tuples(n);
  for (std::size_t r = 0; r < n; ++r) {
    tuples[r].id = "t" + std::to_string(r + 1);
    tuples[r].attrs.resize(m);
    for (double& v : tuples[r].attrs) v = unit(rng);
  }
  return Relation(std::move(columns), std::move(tuples));
}

GivenRanking RankByWeights(const Relation& relation, std::span<const double> w) {
  const ScoredRanking scored = RankingFromScores(relation, w, 0.0);
  std::vector<std::string> order;
  order.reserve(relation.size());
  for (std::size_t i : scored.order()) order.push_back(relation.tuple(i).id);
  return GivenRanking::Strict(std::move(order));
}

GivenRanking RankBySum(const Relation& relation) {
  const std::vector<double> ones(relation.num_attributes(), 1.0);
  return RankByWeights(relation, ones);
}

GivenRanking BuildUnsatRanking(const Relation& relation) {
  if (relation.size() < 10) throw std::invalid_argument("unsatisfiable construction needs n >= 10");
  std::vector<std::string> order = RankBySum(relation).order();
  std::rotate(order.begin(), order.begin() + 5, order.begin() + 10);
  return GivenRanking::Strict(std::move(order));
}

}  // namespace linrank
