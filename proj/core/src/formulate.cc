#include "linrank/formulate.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace linrank {
namespace {

std::string_view Trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::optional<double> ParseDouble(std::string_view s) {
  s = Trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

enum class TokenKind { kNumber, kName, kPlus, kMinus, kStar, kLessEqual, kGreaterEqual, kEqual, kEnd };

struct Token {
  TokenKind kind;
  std::string text;
  double number = 0.0;
};

bool IsNameStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsNameChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '%';
}

std::vector<Token> Tokenize(std::string_view line) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  auto fail = [&](const std::string& what) {
    throw InputError("predicate '" + std::string(line) + "': " + what);
  };
  while (i < line.size()) {
    const char c = line[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '+') {
      tokens.push_back({TokenKind::kPlus, "+"});
      ++i;
    } else if (c == '-') {
      tokens.push_back({TokenKind::kMinus, "-"});
      ++i;
    } else if (c == '*') {
      tokens.push_back({TokenKind::kStar, "*"});
      ++i;
    } else if (c == '<' || c == '>') {
      if (i + 1 >= line.size() || line[i + 1] != '=') {
        fail("strict comparison '" + std::string(1, c) + "' is not supported; use <= or >=");
      }
      tokens.push_back({c == '<' ? TokenKind::kLessEqual : TokenKind::kGreaterEqual, std::string(1, c) + "="});
      i += 2;
    } else if (c == '=') {
      tokens.push_back({TokenKind::kEqual, "="});
      i += (i + 1 < line.size() && line[i + 1] == '=') ? 2 : 1;
    } else if (c == '"') {
      const std::size_t close = line.find('"', i + 1);
      if (close == std::string_view::npos) fail("unterminated quoted name");
      tokens.push_back({TokenKind::kName, std::string(line.substr(i + 1, close - i - 1))});
      i = close + 1;
    } else if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t j = i;
      while (j < line.size() && (std::isdigit(static_cast<unsigned char>(line[j])) || line[j] == '.')) ++j;
      if (j < line.size() && (line[j] == 'e' || line[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < line.size() && (line[k] == '+' || line[k] == '-')) ++k;
        if (k < line.size() && std::isdigit(static_cast<unsigned char>(line[k]))) {
          j = k;
          while (j < line.size() && std::isdigit(static_cast<unsigned char>(line[j]))) ++j;
        }
      }
      const std::optional<double> v = ParseDouble(line.substr(i, j - i));
      if (!v) fail("bad number '" + std::string(line.substr(i, j - i)) + "'");
      tokens.push_back({TokenKind::kNumber, std::string(line.substr(i, j - i)), *v});
      i = j;
    } else if (IsNameStart(c)) {
      std::size_t j = i;
      while (j < line.size() && IsNameChar(line[j])) ++j;
      tokens.push_back({TokenKind::kName, std::string(line.substr(i, j - i))});
      i = j;
    } else {
      fail("unexpected character '" + std::string(1, c) + "'");
    }
  }
  tokens.push_back({TokenKind::kEnd, ""});
  return tokens;
}

// Parses one side of a constraint, adding `side_sign` times its terms to
// coefs and constant.
std::size_t ParseSide(const std::vector<Token>& tokens, std::size_t pos, double side_sign,
                      std::span<const std::string> columns, std::vector<double>& coefs,
                      double& constant, std::string_view line) {
  auto fail = [&](const std::string& what) {
    throw InputError("predicate '" + std::string(line) + "': " + what);
  };
  auto column_of = [&](const std::string& name) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (columns[c] == name) return c;
    }
    fail("unknown attribute '" + name + "'");
    return std::size_t{0};
  };
  bool first = true;
  while (true) {
    double sign = 1.0;
    const TokenKind k = tokens[pos].kind;
    if (k == TokenKind::kPlus || k == TokenKind::kMinus) {
      sign = k == TokenKind::kMinus ? -1.0 : 1.0;
      ++pos;
    } else if (!first) {
      break;
    }
    first = false;
    double factor = 1.0;
    bool have_number = false;
    if (tokens[pos].kind == TokenKind::kNumber) {
      factor = tokens[pos].number;
      have_number = true;
      ++pos;
      if (tokens[pos].kind == TokenKind::kStar) {
        ++pos;
        if (tokens[pos].kind != TokenKind::kName) fail("expected attribute after '*'");
      }
    }
    if (tokens[pos].kind == TokenKind::kName) {
      const std::size_t c = column_of(tokens[pos].text);
      ++pos;
      if (tokens[pos].kind == TokenKind::kStar) {
        ++pos;
        if (tokens[pos].kind != TokenKind::kNumber) fail("expected number after '*'");
        factor *= tokens[pos].number;
        ++pos;
      }
      coefs[c] += side_sign * sign * factor;
    } else if (have_number) {
      constant += side_sign * sign * factor;
    } else {
      fail("expected a number or attribute near '" + tokens[pos].text + "'");
    }
  }
  return pos;
}

WeightConstraint ParseConstraintLine(std::string_view line, std::span<const std::string> columns) {
  const std::vector<Token> tokens = Tokenize(line);
  std::vector<double> coefs(columns.size(), 0.0);
  double constant = 0.0;  // lhs constant minus rhs constant
  std::size_t pos = ParseSide(tokens, 0, 1.0, columns, coefs, constant, line);
  WeightConstraint c;
  switch (tokens[pos].kind) {
    case TokenKind::kLessEqual: c.sense = lp::Sense::kLessEqual; break;
    case TokenKind::kGreaterEqual: c.sense = lp::Sense::kGreaterEqual; break;
    case TokenKind::kEqual: c.sense = lp::Sense::kEqual; break;
    default:
      throw InputError("predicate '" + std::string(line) + "': expected <=, >= or =");
  }
  pos = ParseSide(tokens, pos + 1, -1.0, columns, coefs, constant, line);
  if (tokens[pos].kind != TokenKind::kEnd) {
    throw InputError("predicate '" + std::string(line) + "': unexpected '" + tokens[pos].text + "'");
  }
  if (std::all_of(coefs.begin(), coefs.end(), [](double v) { return v == 0.0; })) {
    throw InputError("predicate '" + std::string(line) + "' references no attribute");
  }
  c.coefs = std::move(coefs);
  c.rhs = -constant;
  c.text = std::string(line);
  return c;
}

lp::LinearExpr WeightedDifference(std::span<const lp::VarId> weights, std::span<const double> d) {
  lp::LinearExpr e;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i] != 0.0) e.Add(weights[i], d[i]);
  }
  return e;
}

std::vector<double> Difference(const TupleRecord& a, const TupleRecord& b) {
  std::vector<double> d(a.attrs.size());
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = a.attrs[i] - b.attrs[i];
  return d;
}

std::string WeightName(const std::string& column) { return "w_" + column; }

// Weight variables on the simplex plus the user predicate.
std::vector<lp::VarId> AddWeights(lp::Program& p, const ProblemSpec& spec, const WeightBox* box) {
  const std::size_t m = spec.relation.num_attributes();
  std::vector<lp::VarId> w(m);
  lp::LinearExpr sum;
  for (std::size_t i = 0; i < m; ++i) {
    double lo = 0.0;
    double hi = 1.0;
    if (box != nullptr) {
      lo = std::max(lo, box->lower[i]);
      hi = std::min(hi, box->upper[i]);
    }
    w[i] = p.AddContinuous(WeightName(spec.relation.columns()[i]), lo, hi);
    sum.Add(w[i], 1.0);
  }
  p.AddConstraint(sum, lp::Sense::kEqual, 1.0, "simplex");
  for (std::size_t c = 0; c < spec.predicate.size(); ++c) {
    const WeightConstraint& wc = spec.predicate.constraints()[c];
    p.AddConstraint(WeightedDifference(w, wc.coefs), wc.sense, wc.rhs, "pred" + std::to_string(c));
  }
  return w;
}

}  // namespace

WeightPredicate WeightPredicate::Parse(std::string_view text, std::span<const std::string> columns) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return ParseLines(lines, columns);
}

WeightPredicate WeightPredicate::ParseLines(std::span<const std::string> lines,
                                            std::span<const std::string> columns) {
  WeightPredicate pred;
  for (const std::string& raw : lines) {
    std::string_view line = raw;
    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = Trim(line);
    if (line.empty()) continue;
    pred.Add(ParseConstraintLine(line, columns));
  }
  return pred;
}

bool WeightPredicate::Satisfied(std::span<const double> w, double tol) const {
  for (const WeightConstraint& c : constraints_) {
    double lhs = 0.0;
    for (std::size_t i = 0; i < c.coefs.size(); ++i) lhs += c.coefs[i] * w[i];
    if (c.sense != lp::Sense::kGreaterEqual && lhs > c.rhs + tol) return false;
    if (c.sense != lp::Sense::kLessEqual && lhs < c.rhs - tol) return false;
  }
  return true;
}

double EpsilonConfig::Floor() const {
  return 2.0 * std::nextafter(tau, std::numeric_limits<double>::infinity());
}

void EpsilonConfig::Validate(bool enforce_floor) const {
  if (!(tau > 0.0) || !std::isfinite(tau)) throw std::invalid_argument("tau must be positive");
  if (!std::isfinite(eps1) || !std::isfinite(eps2) || !(eps1 > eps2)) {
    throw std::invalid_argument("eps1 must exceed eps2");
  }
  if (eps2 < 0.0) throw std::invalid_argument("eps2 must be non-negative");
  if (!(escalation_factor > 1.0)) throw std::invalid_argument("escalation factor must exceed 1");
  if (max_escalations < 0) throw std::invalid_argument("max escalations must be non-negative");
  if (enforce_floor && eps1 - eps2 < Floor()) {
    throw std::invalid_argument("eps1 - eps2 must be at least 2 * nextafter(tau)");
  }
}

std::optional<ObjectiveKind> ParseObjectiveKind(std::string_view name) {
  if (name == "sum") return ObjectiveKind::kPositionSum;
  if (name == "max") return ObjectiveKind::kMaxPosition;
  return std::nullopt;
}

std::string_view ToString(ObjectiveKind kind) {
  return kind == ObjectiveKind::kPositionSum ? "sum" : "max";
}

void ProblemSpec::Validate() const {
  ranking.CheckAgainst(relation);
  if (k < 1 || static_cast<std::size_t>(k) > relation.size()) {
    throw InputError("k must lie in [1, " + std::to_string(relation.size()) + "]");
  }
  for (const auto& [id, u] : importance) {
    if (!relation.IndexOf(id)) throw InputError("importance names unknown id '" + id + "'");
    if (!(u >= 0.0) || !std::isfinite(u)) throw InputError("importance of '" + id + "' must be >= 0");
  }
  for (const WeightConstraint& c : predicate.constraints()) {
    if (c.coefs.size() != relation.num_attributes()) {
      throw InputError("predicate '" + c.text + "' has the wrong number of attributes");
    }
  }
}

std::vector<std::size_t> ProblemSpec::PositionToIndex() const {
  std::vector<std::size_t> idx(ranking.size());
  for (std::size_t p = 0; p < ranking.size(); ++p) {
    const std::optional<std::size_t> i = relation.IndexOf(ranking.order()[p]);
    if (!i) throw InputError("ranking id '" + ranking.order()[p] + "' not in relation");
    idx[p] = *i;
  }
  return idx;
}

double ProblemSpec::ImportanceOf(const std::string& id) const {
  const auto it = importance.find(id);
  return it == importance.end() ? 1.0 : it->second;
}

std::unordered_map<std::string, double> ParseImportanceCsv(std::string_view text) {
  std::unordered_map<std::string, double> out;
  std::size_t start = 0;
  std::size_t line_no = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = Trim(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const std::size_t comma = line.find(',');
    if (comma == std::string_view::npos) {
      throw InputError("importance line " + std::to_string(line_no) + ": expected id,factor");
    }
    const std::string id(Trim(line.substr(0, comma)));
    const std::optional<double> u = ParseDouble(line.substr(comma + 1));
    if (!u) {
      if (out.empty() && line_no == 1) continue;  // header
      throw InputError("importance line " + std::to_string(line_no) + ": bad factor");
    }
    if (*u < 0.0) throw InputError("importance line " + std::to_string(line_no) + ": negative factor");
    if (!out.emplace(id, *u).second) throw InputError("importance lists '" + id + "' twice");
  }
  return out;
}

PairOrder CompareTuples(const TupleRecord& s, const TupleRecord& r) {
  bool greater = false;
  bool less = false;
  for (std::size_t i = 0; i < s.attrs.size(); ++i) {
    if (s.attrs[i] > r.attrs[i]) greater = true;
    if (s.attrs[i] < r.attrs[i]) less = true;
  }
  if (greater && less) return PairOrder::kIncomparable;
  if (greater) return PairOrder::kDominates;
  if (less) return PairOrder::kDominated;
  return PairOrder::kIdentical;
}

DominanceIndex::DominanceIndex(const Relation& relation)
    : dominators_(relation.size()), dominatees_(relation.size()) {
  for (std::size_t s = 0; s < relation.size(); ++s) {
    for (std::size_t r = s + 1; r < relation.size(); ++r) {
      switch (CompareTuples(relation.tuple(s), relation.tuple(r))) {
        case PairOrder::kDominates:
          dominators_[r].push_back(s);
          dominatees_[s].push_back(r);
          break;
        case PairOrder::kDominated:
          dominators_[s].push_back(r);
          dominatees_[r].push_back(s);
          break;
        default:
          break;
      }
    }
  }
}

bool DominanceIndex::Dominates(std::size_t s, std::size_t r) const {
  const std::vector<std::size_t>& d = dominators_[r];
  return std::find(d.begin(), d.end(), s) != d.end();
}

WeightBox WeightBox::Around(std::span<const double> center, double half_width) {
  WeightBox box;
  for (double w : center) {
    box.lower.push_back(std::max(0.0, w - half_width));
    box.upper.push_back(std::min(1.0, w + half_width));
  }
  return box;
}

std::optional<std::pair<double, double>> ScoreDifferenceRange(std::span<const double> d,
                                                              const WeightBox* box) {
  const std::size_t m = d.size();
  std::vector<double> lo(m, 0.0);
  std::vector<double> hi(m, 1.0);
  if (box != nullptr) {
    for (std::size_t i = 0; i < m; ++i) {
      lo[i] = std::max(0.0, box->lower[i]);
      hi[i] = std::min(1.0, box->upper[i]);
      if (lo[i] > hi[i]) return std::nullopt;
    }
  }
  const double lo_sum = std::accumulate(lo.begin(), lo.end(), 0.0);
  const double hi_sum = std::accumulate(hi.begin(), hi.end(), 0.0);
  if (lo_sum > 1.0 + 1e-12 || hi_sum < 1.0 - 1e-12) return std::nullopt;
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  // Fill the remaining mass greedily from the cheapest (or dearest) direction.
  auto extreme = [&](bool maximize) {
    double rest = 1.0 - lo_sum;
    double value = 0.0;
    for (std::size_t i = 0; i < m; ++i) value += d[i] * lo[i];
    for (std::size_t t = 0; t < m && rest > 0.0; ++t) {
      const std::size_t i = maximize ? order[m - 1 - t] : order[t];
      const double add = std::min(rest, hi[i] - lo[i]);
      value += d[i] * add;
      rest -= add;
    }
    return value;
  };
  return std::make_pair(extreme(false), extreme(true));
}

SatProgram BuildSat(const ProblemSpec& spec, const EpsilonConfig& eps) {
  SatProgram out;
  lp::Program& p = out.program;
  out.weights = AddWeights(p, spec, nullptr);
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  const std::size_t top = spec.TopCount();
  const Relation& rel = spec.relation;
  for (std::size_t j = 0; j + 1 < top; ++j) {
    const std::vector<double> d = Difference(rel.tuple(idx[j]), rel.tuple(idx[j + 1]));
    const bool equal = spec.ranking.relations()[j] == Order::kEqual;
    p.AddConstraint(WeightedDifference(out.weights, d), equal ? lp::Sense::kEqual : lp::Sense::kGreaterEqual,
                    equal ? 0.0 : eps.eps1, "chain" + std::to_string(j));
  }
  for (std::size_t j = top; j < idx.size(); ++j) {
    const std::vector<double> d = Difference(rel.tuple(idx[top - 1]), rel.tuple(idx[j]));
    p.AddConstraint(WeightedDifference(out.weights, d), lp::Sense::kGreaterEqual, 0.0,
                    "below" + std::to_string(j));
  }
  return out;
}

OptProgram BuildOpt(const ProblemSpec& spec, const EpsilonConfig& eps, const OptOptions& options) {
  OptProgram out;
  lp::Program& p = out.program;
  const WeightBox* box = options.box ? &*options.box : nullptr;
  out.weights = AddWeights(p, spec, box);
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  const std::size_t top = spec.TopCount();
  const Relation& rel = spec.relation;
  out.top.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(top));

  bool integral_importance = true;
  std::vector<std::pair<lp::LinearExpr, double>> terms;
  for (std::size_t pos = 0; pos < top; ++pos) {
    const std::size_t r = idx[pos];
    const TupleRecord& tr = rel.tuple(r);
    int above = 0;
    int below = 0;
    lp::LinearExpr count;
    for (std::size_t s = 0; s < rel.size(); ++s) {
      if (s == r) continue;
      const std::vector<double> d = Difference(rel.tuple(s), tr);
      const std::optional<std::pair<double, double>> cell_range = ScoreDifferenceRange(d, box);
      const std::pair<double, double> range =
          cell_range ? *cell_range : *ScoreDifferenceRange(d, nullptr);
      if (options.prune && cell_range) {
        if (range.second <= eps.eps2) {
          ++below;
          continue;
        }
        if (range.first >= eps.eps1) {
          ++above;
          continue;
        }
      }
      double max_abs = 0.0;
      for (double v : d) max_abs = std::max(max_abs, std::abs(v));
      const double big_m = std::max({eps.eps1 - range.first, range.second - eps.eps2, 0.0}) +
                           10.0 * eps.tau * (1.0 + max_abs);
      const lp::VarId delta = p.AddBinary("d_" + rel.tuple(s).id + "_" + tr.id);
      lp::AddIndicatorPair(p, delta, WeightedDifference(out.weights, d), eps.eps1, eps.eps2, big_m);
      out.layout.pairs.push_back({s, r, delta, big_m});
      count.Add(delta, 1.0);
    }
    out.layout.forced_above.push_back(above);
    out.layout.forced_below.push_back(below);
    lp::LinearExpr err(static_cast<double>(spec.ranking.RankAt(pos) - 1 - above));
    err -= count;
    const double u = spec.ImportanceOf(tr.id);
    if (u != std::floor(u)) integral_importance = false;
    terms.emplace_back(std::move(err), u);
  }

  if (spec.objective == ObjectiveKind::kPositionSum) {
    for (std::size_t pos = 0; pos < terms.size(); ++pos) {
      out.layout.error_vars.push_back(
          lp::AddAbsTerm(p, terms[pos].first, terms[pos].second, "e_" + rel.tuple(idx[pos]).id));
    }
  } else {
    const lp::VarId e = p.AddContinuous("e_max", 0.0, lp::kInf);
    for (const auto& [expr, u] : terms) {
      lp::LinearExpr above;
      above.Add(e, 1.0);
      above -= u * expr;
      p.AddConstraint(above, lp::Sense::kGreaterEqual, 0.0);
      lp::LinearExpr below;
      below.Add(e, 1.0);
      below += u * expr;
      p.AddConstraint(below, lp::Sense::kGreaterEqual, 0.0);
    }
    p.AddToObjective(e, 1.0);
    out.layout.error_vars.push_back(e);
  }
  out.granularity = integral_importance ? 1.0 : 0.0;
  return out;
}

std::vector<double> AssignmentFromWeights(const OptProgram& opt, const ProblemSpec& spec,
                                          const EpsilonConfig& eps, std::span<const double> w) {
  std::vector<double> values(opt.program.num_variables(), 0.0);
  for (std::size_t i = 0; i < opt.weights.size(); ++i) values[opt.weights[i]] = w[i];
  const Relation& rel = spec.relation;
  std::vector<double> score(rel.size());
  for (std::size_t t = 0; t < rel.size(); ++t) score[t] = Score(w, rel.tuple(t));
  const double split = 0.5 * (eps.eps1 + eps.eps2);
  std::unordered_map<std::size_t, std::size_t> position_of;
  for (std::size_t pos = 0; pos < opt.top.size(); ++pos) position_of.emplace(opt.top[pos], pos);
  std::vector<int> count(opt.top.size(), 0);
  for (const IndicatorPair& pair : opt.layout.pairs) {
    const bool above = score[pair.s] - score[pair.r] >= split;
    values[pair.var] = above ? 1.0 : 0.0;
    if (above) ++count[position_of.at(pair.r)];
  }
  double worst = 0.0;
  for (std::size_t pos = 0; pos < opt.top.size(); ++pos) {
    const double err = std::abs(static_cast<double>(spec.ranking.RankAt(pos) - 1 -
                                                    opt.layout.forced_above[pos] - count[pos]));
    const double u = spec.ImportanceOf(rel.tuple(opt.top[pos]).id);
    if (spec.objective == ObjectiveKind::kPositionSum) {
      values[opt.layout.error_vars[pos]] = err;
    } else {
      worst = std::max(worst, u * err);
    }
  }
  if (spec.objective == ObjectiveKind::kMaxPosition) values[opt.layout.error_vars[0]] = worst;
  return values;
}

}  // namespace linrank
