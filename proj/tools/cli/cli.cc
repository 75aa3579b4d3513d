#include "cli.h"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "linrank/approx.h"
#include "linrank/baselines.h"
#include "linrank/explain.h"
#include "linrank/formulate.h"
#include "linrank/model.h"

namespace linrank::cli {
namespace {

using Json = nlohmann::ordered_json;

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path);
  out << text;
}

struct ProblemFlags {
  std::string data;
  std::string ranking;
  bool dedup = false;
  int k = 1;
  std::string constraints;
  double tau = 1e-9;
  double eps1 = 1e-4;
  double eps2 = 0.0;
  int max_escalations = 6;
  std::string importance;
  std::string objective = "sum";
  std::string top_k_mode = "prefix";
};

struct SolveFlags {
  double time_limit = lp::kInf;
  std::int64_t node_limit = std::numeric_limits<std::int64_t>::max();
  bool no_prune = false;
  std::uint64_t seed = 0;
};

struct OutputFlags {
  std::string out;
  bool no_timestamp = false;
  bool timing = false;
};

void AddProblemFlags(CLI::App* cmd, ProblemFlags& f, bool opt_flags) {
  cmd->add_option("--data", f.data, "Relation CSV (header row, id column first)")->required();
  cmd->add_option("--ranking", f.ranking, "Ranking file (one id per line, '>' or '=' prefixes)")->required();
  cmd->add_flag("--dedup", f.dedup, "Drop tuples with duplicate attribute values");
  cmd->add_option("--k", f.k, "Top-k size")->check(CLI::PositiveNumber);
  cmd->add_option("--constraints", f.constraints, "Weight predicate file, one constraint per line");
  cmd->add_option("--tau", f.tau, "Solver feasibility tolerance");
  cmd->add_option("--eps1", f.eps1, "Gap required for a strict score comparison");
  cmd->add_option("--max-escalations", f.max_escalations, "eps1 escalations after failed verification");
  cmd->add_option("--top-k-mode", f.top_k_mode, "prefix (exactly k positions) or rank (every tuple of rank <= k)")
      ->check(CLI::IsMember({"prefix", "rank"}));
  if (opt_flags) {
    cmd->add_option("--eps2", f.eps2, "Largest score gap counted as 'not above'");
    cmd->add_option("--importance", f.importance, "Importance CSV (id,factor)");
    cmd->add_option("--objective", f.objective, "Position-error objective")->check(CLI::IsMember({"sum", "max"}));
  }
}

void AddSolveFlags(CLI::App* cmd, SolveFlags& f, bool opt_flags) {
  cmd->add_option("--time-limit", f.time_limit, "Wall-clock limit in seconds");
  cmd->add_option("--seed", f.seed, "Random seed");
  if (opt_flags) {
    cmd->add_option("--node-limit", f.node_limit, "Branch-and-bound node limit");
    cmd->add_flag("--no-prune", f.no_prune, "Disable dominance pruning");
  }
}

void AddOutputFlags(CLI::App* cmd, OutputFlags& f) {
  cmd->add_option("--out", f.out, "Write the JSON report here instead of stdout");
  cmd->add_flag("--no-timestamp", f.no_timestamp, "Omit the timestamp field");
  cmd->add_flag("--timing", f.timing, "Include elapsed seconds");
}

ProblemSpec LoadProblem(const ProblemFlags& f) {
  ProblemSpec spec;
  spec.relation = LoadRelation(f.data, f.dedup);
  spec.ranking = LoadRanking(f.ranking);
  spec.k = f.k;
  if (!f.constraints.empty()) {
    spec.predicate = WeightPredicate::Parse(ReadFile(f.constraints), spec.relation.columns());
  }
  if (!f.importance.empty()) spec.importance = ParseImportanceCsv(ReadFile(f.importance));
  spec.epsilon.tau = f.tau;
  spec.epsilon.eps1 = f.eps1;
  spec.epsilon.eps2 = f.eps2;
  spec.epsilon.max_escalations = f.max_escalations;
  spec.objective = *ParseObjectiveKind(f.objective);
  spec.top_k_mode = f.top_k_mode == "rank" ? TopKMode::kRankCutoff : TopKMode::kPermutationPrefix;
  spec.Validate();
  return spec;
}

SolveOptions MakeSolveOptions(const SolveFlags& f) {
  SolveOptions o;
  o.time_limit = f.time_limit;
  o.node_limit = f.node_limit;
  o.prune = !f.no_prune;
  o.seed = f.seed;
  return o;
}

int ExitCodeFor(ReportStatus status) {
  switch (status) {
    case ReportStatus::kUnsatisfiable:
    case ReportStatus::kInfeasible:
      return kExitUnsatisfiable;
    case ReportStatus::kTimeoutNoSolution:
    case ReportStatus::kNumericalError:
      return kExitSolverFailure;
    default:
      return kExitOk;
  }
}

void Emit(const std::string& text, const OutputFlags& f, std::ostream& out) {
  if (f.out.empty()) {
    out << text << '\n';
  } else {
    WriteFile(f.out, text + '\n');
  }
}

int EmitReport(const ExplanationReport& report, const OutputFlags& f, std::ostream& out) {
  Emit(ReportToJson(report, !f.no_timestamp, f.timing), f, out);
  return ExitCodeFor(report.status);
}

}  // namespace

std::vector<double> ParseWeightsText(const std::string& text) {
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && (text[first] == '[' || text[first] == '{')) {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("weights JSON: ") + e.what());
    }
    if (j.is_object()) j = j.value("weights", nlohmann::json());
    if (!j.is_array()) throw InputError("weights JSON must be an array or an object with \"weights\"");
    std::vector<double> w;
    for (const auto& v : j) {
      if (!v.is_number()) throw InputError("weights JSON must contain numbers only");
      w.push_back(v.get<double>());
    }
    return w;
  }
  std::string cleaned = text;
  for (char& c : cleaned) {
    if (c == ',' || c == ';') c = ' ';
  }
  std::istringstream in(cleaned);
  std::vector<double> w;
  std::string token;
  while (in >> token) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(token, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != token.size()) throw InputError("weights: '" + token + "' is not a number");
    w.push_back(v);
  }
  if (w.empty()) throw InputError("weights: no values");
  return w;
}

int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Explain a given ranking with linear scoring functions"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "linrank 0.1.0");

  ProblemFlags problem;
  SolveFlags solve;
  OutputFlags output;

  CLI::App* sat = app.add_subcommand("sat", "Is there a W reproducing the top-k exactly?");
  AddProblemFlags(sat, problem, false);
  AddSolveFlags(sat, solve, false);
  AddOutputFlags(sat, output);

  CLI::App* opt = app.add_subcommand("opt", "W minimizing the position error of the top-k");
  AddProblemFlags(opt, problem, true);
  AddSolveFlags(opt, solve, true);
  AddOutputFlags(opt, output);

  std::string strategy = "ordreg";
  double cell_size = 0.01;
  std::int64_t samples = 1000;
  std::string weights_file;
  std::size_t window = 0;
  unsigned threads = 0;
  CLI::App* cell = app.add_subcommand("cell", "OPT restricted to a cell around a seed W");
  AddProblemFlags(cell, problem, true);
  AddSolveFlags(cell, solve, true);
  AddOutputFlags(cell, output);
  cell->add_option("--seed-strategy", strategy, "Seed for the cell center")
      ->check(CLI::IsMember({"sample", "window", "lr", "ordreg", "explicit"}));
  cell->add_option("--cell-size", cell_size, "Half-width c of the cell")->check(CLI::PositiveNumber);
  cell->add_option("--samples", samples, "Sampling budget for --seed-strategy sample")->check(CLI::PositiveNumber);
  cell->add_option("--weights", weights_file, "Seed weights for --seed-strategy explicit");
  cell->add_option("--window", window, "Window length for --seed-strategy window");
  cell->add_option("--threads", threads, "Worker threads for window solves (0 = hardware)");

  double shrink = 0.8;
  double max_error = 0.0;
  CLI::App* local = app.add_subcommand("local", "Largest sub-problem solvable without an exception");
  AddProblemFlags(local, problem, true);
  AddSolveFlags(local, solve, true);
  AddOutputFlags(local, output);
  local->add_option("--shrink", shrink, "Factor applied to k per level")->check(CLI::Range(0.01, 0.99));
  local->add_option("--max-error", max_error, "Largest acceptable error");

  std::string method;
  CLI::App* baseline = app.add_subcommand("baseline", "Competitor methods");
  AddProblemFlags(baseline, problem, true);
  AddSolveFlags(baseline, solve, false);
  AddOutputFlags(baseline, output);
  baseline->add_option("--method", method, "lr, ordreg or sample")
      ->required()
      ->check(CLI::IsMember({"lr", "ordreg", "sample"}));
  baseline->add_option("--samples", samples, "Sampling budget")->check(CLI::PositiveNumber);

  CLI::App* verify = app.add_subcommand("verify", "Error and metrics of a given W");
  AddProblemFlags(verify, problem, true);
  AddOutputFlags(verify, output);
  verify->add_option("--weights", weights_file, "Weights file")->required();

  std::string mode;
  std::string data_out;
  CLI::App* normalize = app.add_subcommand("normalize", "Normalization statistics and weight transform");
  normalize->add_option("--data", problem.data, "Relation CSV")->required();
  normalize->add_flag("--dedup", problem.dedup, "Drop duplicate tuples");
  normalize->add_option("--mode", mode, "minmax, mean or zscore")
      ->required()
      ->check(CLI::IsMember({"minmax", "mean", "zscore"}));
  normalize->add_option("--weights", weights_file, "Raw-data weights to transform");
  normalize->add_option("--data-out", data_out, "Write the normalized relation CSV here");
  normalize->add_option("--out", output.out, "Write the JSON result here instead of stdout");

  std::size_t gen_n = 100;
  std::size_t gen_m = 3;
  std::uint64_t gen_seed = 42;
  bool gen_unsat = false;
  std::string ranking_out;
  CLI::App* gen = app.add_subcommand("gen", "Synthetic uniform data");
  gen->add_option("--n", gen_n, "Tuples")->check(CLI::PositiveNumber);
  gen->add_option("--m", gen_m, "Attributes")->check(CLI::PositiveNumber);
  gen->add_option("--seed", gen_seed, "Random seed");
  gen->add_flag("--unsat", gen_unsat, "Rank by sum, then move positions 6..10 to the front");
  gen->add_option("--data-out", data_out, "Relation CSV path")->required();
  gen->add_option("--ranking-out", ranking_out, "Ranking file path (required with --unsat)");

  std::vector<const char*> argv;
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      if (gen_unsat && ranking_out.empty()) throw InputError("--unsat needs --ranking-out");
      const Relation rel = GenerateUniform(gen_n, gen_m, gen_seed);
      WriteFile(data_out, RelationToCsv(rel));
      if (!ranking_out.empty()) {
        WriteFile(ranking_out, RankingToText(gen_unsat ? BuildUnsatRanking(rel) : RankBySum(rel)));
      }
      return kExitOk;
    }
    if (normalize->parsed()) {
      const Relation rel = LoadRelation(problem.data, problem.dedup);
      const NormalizationMode nm = *ParseNormalizationMode(mode);
      const NormalizationStats stats = NormalizationStats::Compute(rel);
      Json j;
      j["schema"] = 1;
      j["mode"] = ToString(nm);
      j["attributes"] = rel.columns();
      Json attrs = Json::array();
      for (std::size_t i = 0; i < rel.num_attributes(); ++i) {
        const AttributeStats& a = stats.attributes()[i];
        attrs.push_back({{"name", rel.columns()[i]},
                         {"min", a.min},
                         {"max", a.max},
                         {"mean", a.mean},
                         {"stddev", a.stddev},
                         {"scale", stats.Scale(i, nm)},
                         {"offset", stats.Offset(i, nm)}});
      }
      j["stats"] = std::move(attrs);
      if (!weights_file.empty()) {
        const WeightVector w = WeightVector::Normalized(ParseWeightsText(ReadFile(weights_file)));
        if (w.size() != rel.num_attributes()) throw InputError("weights do not match the attribute count");
        j["weights"] = w.values();
        j["normalized_weights"] = TransformWeights(w, stats, nm).values();
      }
      if (!data_out.empty()) WriteFile(data_out, RelationToCsv(NormalizeRelation(rel, stats, nm)));
      Emit(j.dump(2), output, out);
      return kExitOk;
    }

    const ProblemSpec spec = LoadProblem(problem);
    SolveOptions options = MakeSolveOptions(solve);
    if (sat->parsed()) return EmitReport(ExplainSat(spec, options), output, out);
    if (opt->parsed()) return EmitReport(ExplainOpt(spec, options), output, out);
    if (cell->parsed()) {
      CellOptions co;
      co.strategy = *ParseSeedStrategy(strategy);
      co.cell_size = cell_size;
      co.samples = samples;
      co.window = window;
      co.threads = threads;
      co.solve = options;
      if (co.strategy == SeedStrategy::kExplicit) {
        if (weights_file.empty()) throw InputError("--seed-strategy explicit needs --weights");
        co.explicit_weights = ParseWeightsText(ReadFile(weights_file));
      }
      return EmitReport(CellSolve(spec, co), output, out);
    }
    if (local->parsed()) {
      const LocalResult result = LocalExplain(spec, shrink, DefaultException(max_error),
                                              [&](const ProblemSpec& s) { return ExplainOpt(s, options); });
      ExplanationReport report = result.report;
      report.mode = "local";
      report.notes.push_back("sub-problem k = " + std::to_string(result.k) + ", n = " +
                             std::to_string(result.n) + " after " + std::to_string(result.solves) + " solves");
      const int code = EmitReport(report, output, out);
      return result.success ? code : kExitSolverFailure;
    }
    if (baseline->parsed()) {
      if (method == "lr") return EmitReport(LinearRegressionReport(spec), output, out);
      if (method == "ordreg") return EmitReport(OrdinalRegressionReport(spec, solve.time_limit), output, out);
      return EmitReport(SamplingReport(spec, samples, solve.seed), output, out);
    }
    if (verify->parsed()) {
      const std::vector<double> w = ParseWeightsText(ReadFile(weights_file));
      EmitReport(EvaluateWeights(spec, w), output, out);
      return kExitOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitSolverFailure;
  }
  return kExitUsage;
}

}  // namespace linrank::cli
