#include "linrank/approx.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "linrank/baselines.h"

namespace linrank {
namespace {

// Positions [begin, end) of the ranking as a problem of their own, with the
// importance map restricted to the kept tuples.
ProblemSpec SliceProblem(const ProblemSpec& spec, std::size_t begin, std::size_t end, int k) {
  const std::vector<std::size_t> idx = spec.PositionToIndex();
  const std::vector<std::size_t> picked(idx.begin() + static_cast<std::ptrdiff_t>(begin),
                                        idx.begin() + static_cast<std::ptrdiff_t>(end));
  const auto& order = spec.ranking.order();
  const auto& rel = spec.ranking.relations();
  std::vector<std::string> sub_order(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                     order.begin() + static_cast<std::ptrdiff_t>(end));
  std::vector<Order> sub_rel;
  for (std::size_t j = begin; j + 1 < end; ++j) sub_rel.push_back(rel[j]);

  ProblemSpec out;
  out.relation = spec.relation.Subset(picked);
  out.ranking = GivenRanking(std::move(sub_order), std::move(sub_rel));
  out.k = k;
  out.predicate = spec.predicate;
  out.epsilon = spec.epsilon;
  out.objective = spec.objective;
  out.top_k_mode = spec.top_k_mode;
  for (const std::string& id : out.ranking.order()) {
    auto it = spec.importance.find(id);
    if (it != spec.importance.end()) out.importance.emplace(id, it->second);
  }
  return out;
}

double SeedError(const ProblemSpec& spec, std::span<const double> w) {
  return PositionError(spec, w, spec.epsilon.tau).Objective(spec.objective);
}

}  // namespace

std::optional<SeedStrategy> ParseSeedStrategy(std::string_view name) {
  if (name == "sample") return SeedStrategy::kSampling;
  if (name == "window") return SeedStrategy::kSlidingWindow;
  if (name == "lr") return SeedStrategy::kLinearRegression;
  if (name == "ordreg") return SeedStrategy::kOrdinalRegression;
  if (name == "explicit") return SeedStrategy::kExplicit;
  return std::nullopt;
}

std::string_view ToString(SeedStrategy strategy) {
  switch (strategy) {
    case SeedStrategy::kSampling: return "sample";
    case SeedStrategy::kSlidingWindow: return "window";
    case SeedStrategy::kLinearRegression: return "lr";
    case SeedStrategy::kOrdinalRegression: return "ordreg";
    case SeedStrategy::kExplicit: return "explicit";
  }
  return "unknown";
}

ProblemSpec PrefixProblem(const ProblemSpec& spec, int k, std::size_t count) {
  return SliceProblem(spec, 0, count, k);
}

std::vector<double> SeedWeights(const ProblemSpec& spec, const CellOptions& options) {
  const std::size_t m = spec.relation.num_attributes();
  switch (options.strategy) {
    case SeedStrategy::kExplicit:
      if (options.explicit_weights.size() != m) {
        throw InputError("explicit seed needs " + std::to_string(m) + " weights");
      }
      return WeightVector::Normalized(options.explicit_weights).values();
    case SeedStrategy::kLinearRegression:
      return LinearRegressionWeights(spec.relation, spec.ranking).projected;
    case SeedStrategy::kOrdinalRegression: {
      const OrdinalFit fit = OrdinalRegressionWeights(spec, spec.epsilon, options.solve.time_limit);
      if (fit.weights.empty()) {
        throw std::runtime_error("ordinal regression produced no weights (" +
                                 std::string(lp::ToString(fit.status)) + ")");
      }
      return WeightVector::Normalized(fit.weights).values();
    }
    case SeedStrategy::kSampling: {
      const SamplingResult r = SamplingSearch(spec, options.samples, options.solve.seed);
      if (r.weights.empty()) throw std::runtime_error("no sample satisfied the weight predicate");
      return r.weights;
    }
    case SeedStrategy::kSlidingWindow: {
      const std::size_t window =
          options.window > 0 ? options.window : std::min<std::size_t>(spec.TopCount(), 10);
      return SlidingWindowSolve(spec, window, options.solve, options.threads).seed;
    }
  }
  throw std::invalid_argument("unknown seed strategy");
}

ExplanationReport CellSolve(const ProblemSpec& spec, const CellOptions& options) {
  spec.Validate();
  if (!(options.cell_size > 0.0)) throw std::invalid_argument("cell size must be positive");
  const std::vector<double> seed = SeedWeights(spec, options);
  const double seed_error = SeedError(spec, seed);

  SolveOptions solve = options.solve;
  solve.box = WeightBox::Around(seed, options.cell_size);
  solve.starts.push_back(seed);
  ExplanationReport report = ExplainOpt(spec, solve);
  report.mode = "cell";
  const bool improved = report.has_weights() && report.verified && report.total_error <= seed_error;
  if (!improved) {
    ExplanationReport fallback = EvaluateWeights(spec, seed);
    fallback.mode = "cell";
    fallback.status = ReportStatus::kFeasible;
    fallback.nodes = report.nodes;
    fallback.iterations = report.iterations;
    fallback.seconds = report.seconds;
    fallback.escalations = report.escalations;
    fallback.notes = report.notes;
    fallback.notes.push_back("cell solve ended " + std::string(ToString(report.status)) +
                             " without beating the seed; reporting the seed");
    report = std::move(fallback);
  }
  report.notes.push_back("seed " + std::string(ToString(options.strategy)) + " with error " +
                         std::to_string(seed_error) + ", cell half-width " + std::to_string(options.cell_size));
  return report;
}

WindowResult SlidingWindowSolve(const ProblemSpec& spec, std::size_t window, const SolveOptions& options,
                                unsigned threads) {
  spec.Validate();
  const std::size_t top = spec.TopCount();
  if (window == 0 || window > top) {
    throw std::invalid_argument("window must be between 1 and the top-k size " + std::to_string(top));
  }
  const std::size_t stride = (window + 1) / 2;
  WindowResult out;
  for (std::size_t s = 0;; s += stride) {
    const std::size_t begin = std::min(s, top - window);
    if (!out.starts.empty() && begin == out.starts.back()) break;
    out.starts.push_back(begin);
    if (begin + window >= top) break;
  }
  out.windows.resize(out.starts.size());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < out.starts.size(); i = next++) {
      try {
        const ProblemSpec sub =
            SliceProblem(spec, out.starts[i], out.starts[i] + window, static_cast<int>(window));
        out.windows[i] = ExplainOpt(sub, options);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(out.starts.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  const std::size_t m = spec.relation.num_attributes();
  std::vector<double> sum(m, 0.0);
  double total = 0.0;
  for (const ExplanationReport& r : out.windows) {
    if (!r.has_weights()) continue;
    const double weight = 1.0 / (1.0 + r.total_error);
    for (std::size_t i = 0; i < m; ++i) sum[i] += weight * r.weights[i];
    total += weight;
  }
  out.seed = total > 0.0 ? WeightVector::Normalized(sum).values() : WeightVector::Uniform(m).values();
  return out;
}

ExceptionPredicate DefaultException(double max_error) {
  return [max_error](const ExplanationReport& r) {
    switch (r.status) {
      case ReportStatus::kOptimal:
      case ReportStatus::kSatisfiable:
      case ReportStatus::kFeasible:
        break;
      default:
        return true;
    }
    return !r.has_weights() || !r.verified || r.total_error > max_error;
  };
}

LocalResult LocalExplain(const ProblemSpec& spec, double shrink, const ExceptionPredicate& exception,
                         const SubproblemSolver& solve) {
  spec.Validate();
  if (!(shrink > 0.0 && shrink < 1.0)) throw std::invalid_argument("shrink must lie in (0, 1)");
  const std::size_t n = spec.relation.size();
  LocalResult out;
  out.report = solve(spec);
  out.solves = 1;
  out.k = spec.k;
  out.n = n;
  if (!exception(out.report)) {
    out.success = true;
    return out;
  }

  ExplanationReport last_failure = out.report;
  int k_prev = spec.k;
  for (int x = 1; k_prev > 1; ++x) {
    const int k = std::min(k_prev - 1,
                           static_cast<int>(std::ceil(std::pow(shrink, x) * static_cast<double>(spec.k) - 1e-9)));
    k_prev = k;
    const std::size_t top = spec.ranking.TopKCount(k, spec.top_k_mode);
    const std::size_t max_lower = n - top;
    auto attempt = [&](std::size_t lower) {
      ExplanationReport r = solve(PrefixProblem(spec, k, top + lower));
      ++out.solves;
      return r;
    };
    ExplanationReport best = attempt(0);
    if (exception(best)) {
      last_failure = std::move(best);
      continue;
    }
    // Largest lower-ranked count without an exception: lo succeeds, hi fails.
    std::size_t lo = 0;
    std::size_t hi = max_lower + 1;
    while (hi - lo > 1) {
      const std::size_t mid = lo + (hi - lo) / 2;
      ExplanationReport r = attempt(mid);
      if (exception(r)) {
        hi = mid;
      } else {
        lo = mid;
        best = std::move(r);
      }
    }
    out.report = std::move(best);
    out.report.notes.push_back("local explanation with k' = " + std::to_string(k) + " and " +
                               std::to_string(lo) + " lower-ranked tuples");
    out.success = true;
    out.k = k;
    out.n = top + lo;
    return out;
  }
  out.report = std::move(last_failure);
  out.report.notes.push_back("no sub-problem down to k' = 1 avoided the exception");
  out.success = false;
  return out;
}

}  // namespace linrank
