#include "service.h"

#include <chrono>
#include <sstream>

#include "json.hpp"
#include "linrank/approx.h"

namespace linrank::service {
namespace {

using Json = nlohmann::ordered_json;

Response JsonResponse(int status, const Json& j) { return {status, j.dump(2), "application/json"}; }

Response Error(int status, const std::string& message) { return JsonResponse(status, Json{{"error", message}}); }

std::vector<std::string> SplitPath(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

Json ParseBody(const std::string& body) {
  if (body.empty()) return Json::object();
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw InputError("request body must be a JSON object");
  return j;
}

template <typename T>
T Field(const Json& j, const char* name, T fallback) {
  if (!j.contains(name) || j[name].is_null()) return fallback;
  try {
    return j[name].get<T>();
  } catch (const Json::exception&) {
    throw InputError(std::string("field '") + name + "' has the wrong type");
  }
}

// The parsed solve request, built before the job is queued so that malformed
// input is rejected synchronously.
struct SolveRequest {
  std::string mode;
  ProblemSpec spec;
  SolveOptions options;
  CellOptions cell;
};

SolveRequest ParseSolveRequest(const Json& j, const Relation& relation, const GivenRanking& ranking) {
  SolveRequest req;
  req.mode = Field<std::string>(j, "mode", "opt");
  if (req.mode != "sat" && req.mode != "opt" && req.mode != "cell") {
    throw InputError("mode must be sat, opt or cell");
  }
  req.spec.relation = relation;
  req.spec.ranking = ranking;
  req.spec.k = Field<int>(j, "k", 1);
  if (j.contains("constraints")) {
    const std::vector<std::string> lines = Field<std::vector<std::string>>(j, "constraints", {});
    req.spec.predicate = WeightPredicate::ParseLines(lines, relation.columns());
  }
  if (j.contains("importance")) {
    const Json& imp = j["importance"];
    if (imp.is_string()) {
      req.spec.importance = ParseImportanceCsv(imp.get<std::string>());
    } else if (imp.is_object()) {
      for (const auto& [id, factor] : imp.items()) {
        if (!factor.is_number()) throw InputError("importance factors must be numbers");
        req.spec.importance[id] = factor.get<double>();
      }
    } else if (!imp.is_null()) {
      throw InputError("importance must be an object or CSV text");
    }
  }
  if (j.contains("eps")) {
    const Json& eps = j["eps"];
    if (eps.is_number()) {
      req.spec.epsilon.eps1 = eps.get<double>();
    } else if (eps.is_object()) {
      req.spec.epsilon.tau = Field<double>(eps, "tau", req.spec.epsilon.tau);
      req.spec.epsilon.eps1 = Field<double>(eps, "eps1", req.spec.epsilon.eps1);
      req.spec.epsilon.eps2 = Field<double>(eps, "eps2", req.spec.epsilon.eps2);
      req.spec.epsilon.max_escalations = Field<int>(eps, "maxEscalations", req.spec.epsilon.max_escalations);
    } else if (!eps.is_null()) {
      throw InputError("eps must be a number or an object");
    }
  }
  const std::string objective = Field<std::string>(j, "objective", "sum");
  const auto kind = ParseObjectiveKind(objective);
  if (!kind) throw InputError("objective must be sum or max");
  req.spec.objective = *kind;
  const std::string top_k_mode = Field<std::string>(j, "topKMode", "prefix");
  if (top_k_mode != "prefix" && top_k_mode != "rank") throw InputError("topKMode must be prefix or rank");
  req.spec.top_k_mode = top_k_mode == "rank" ? TopKMode::kRankCutoff : TopKMode::kPermutationPrefix;
  req.spec.Validate();

  req.options.time_limit = Field<double>(j, "timeLimit", 60.0);
  if (!(req.options.time_limit > 0.0)) throw InputError("timeLimit must be positive");
  req.options.seed = Field<std::uint64_t>(j, "seed", 0);

  if (req.mode == "cell") {
    const Json cell = j.contains("cell") && j["cell"].is_object() ? j["cell"] : Json::object();
    const std::string strategy = Field<std::string>(cell, "strategy", "ordreg");
    const auto parsed = ParseSeedStrategy(strategy);
    if (!parsed) throw InputError("unknown cell strategy '" + strategy + "'");
    req.cell.strategy = *parsed;
    req.cell.cell_size = Field<double>(cell, "size", req.cell.cell_size);
    if (!(req.cell.cell_size > 0.0)) throw InputError("cell size must be positive");
    req.cell.samples = Field<std::int64_t>(cell, "samples", req.cell.samples);
    req.cell.window = Field<std::size_t>(cell, "window", req.cell.window);
    req.cell.explicit_weights = Field<std::vector<double>>(cell, "weights", {});
    if (req.cell.strategy == SeedStrategy::kExplicit &&
        req.cell.explicit_weights.size() != relation.num_attributes()) {
      throw InputError("cell weights must have one entry per attribute");
    }
  }
  return req;
}

}  // namespace

Service::Service(ServiceOptions options) : options_(options) {
  const std::size_t n = std::max<std::size_t>(1, options_.workers);
  for (std::size_t i = 0; i < n; ++i) workers_.emplace_back([this] { WorkerLoop(); });
}

Service::~Service() {
  {
    std::lock_guard<std::mutex> lock(mu_);
    for (auto& [id, job] : jobs_) job->cancel->store(true);
  }
  {
    std::lock_guard<std::mutex> lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  for (std::thread& t : workers_) t.join();
}

Response Service::Handle(const std::string& method, const std::string& path, const std::string& body) {
  const std::vector<std::string> p = SplitPath(path);
  try {
    if (!p.empty() && p[0] == "datasets") {
      if (p.size() == 1 && method == "POST") return CreateDataset(body);
      if (p.size() == 2 && method == "GET") return GetDataset(p[1]);
      if (p.size() == 2 && method == "DELETE") return DeleteDataset(p[1]);
      if (p.size() == 3 && p[2] == "solve" && method == "POST") return Solve(p[1], body);
      if (p.size() == 3 && p[2] == "explanations" && method == "GET") return Explanations(p[1]);
    } else if (p.size() == 2 && p[0] == "jobs") {
      if (method == "GET") return GetJob(p[1]);
      if (method == "DELETE") return CancelJob(p[1]);
    }
  } catch (const InputError& e) {
    return Error(400, e.what());
  } catch (const std::invalid_argument& e) {
    return Error(400, e.what());
  }
  return Error(404, "no route for " + method + " " + path);
}

Response Service::CreateDataset(const std::string& body) {
  const Json j = ParseBody(body);
  const std::string csv = Field<std::string>(j, "csv", "");
  const std::string ranking_text = Field<std::string>(j, "ranking", "");
  if (csv.empty()) throw InputError("field 'csv' is required");
  if (ranking_text.empty()) throw InputError("field 'ranking' is required");
  auto relation = std::make_shared<const Relation>(ParseRelationCsv(csv, Field<bool>(j, "dedup", false)));
  if (relation->size() > options_.max_rows) {
    return Error(413, "dataset has " + std::to_string(relation->size()) + " rows; the limit is " +
                          std::to_string(options_.max_rows));
  }
  auto ranking = std::make_shared<const GivenRanking>(ParseRankingText(ranking_text));
  ranking->CheckAgainst(*relation);

  std::lock_guard<std::mutex> lock(mu_);
  Dataset d;
  d.id = "d" + std::to_string(next_dataset_++);
  d.relation = std::move(relation);
  d.ranking = std::move(ranking);
  const Json out = {{"id", d.id},
                    {"attributes", d.relation->columns()},
                    {"n", d.relation->size()},
                    {"m", d.relation->num_attributes()}};
  datasets_.emplace(d.id, std::move(d));
  return JsonResponse(201, out);
}

Response Service::GetDataset(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) return Error(404, "unknown dataset " + id);
  const Dataset& d = it->second;
  return JsonResponse(200, Json{{"id", d.id},
                                {"attributes", d.relation->columns()},
                                {"n", d.relation->size()},
                                {"m", d.relation->num_attributes()},
                                {"explanations", d.history.size()},
                                {"activeJob", d.active_job.empty() ? Json() : Json(d.active_job)}});
}

Response Service::DeleteDataset(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = datasets_.find(id);
  if (it == datasets_.end()) return Error(404, "unknown dataset " + id);
  if (!it->second.active_job.empty()) return Error(409, "job " + it->second.active_job + " is still running");
  datasets_.erase(it);
  return {204, "", "application/json"};
}

Response Service::Solve(const std::string& dataset_id, const std::string& body) {
  std::shared_ptr<const Relation> relation;
  std::shared_ptr<const GivenRanking> ranking;
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) return Error(404, "unknown dataset " + dataset_id);
    if (!it->second.active_job.empty()) return Error(409, "job " + it->second.active_job + " is still running");
    relation = it->second.relation;
    ranking = it->second.ranking;
  }
  auto request = std::make_shared<SolveRequest>(ParseSolveRequest(ParseBody(body), *relation, *ranking));

  auto job = std::make_shared<Job>();
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = datasets_.find(dataset_id);
    if (it == datasets_.end()) return Error(404, "unknown dataset " + dataset_id);
    if (!it->second.active_job.empty()) return Error(409, "job " + it->second.active_job + " is still running");
    job->id = "j" + std::to_string(next_job_++);
    job->dataset_id = dataset_id;
    job->mode = request->mode;
    it->second.active_job = job->id;
    jobs_.emplace(job->id, job);
  }
  request->options.cancel = job->cancel;
  request->cell.solve = request->options;

  Enqueue([this, job, request] {
    {
      std::lock_guard<std::mutex> lock(mu_);
      if (job->state != JobState::kQueued) return;
      job->state = JobState::kRunning;
    }
    try {
      ExplanationReport report;
      if (request->mode == "sat") {
        report = ExplainSat(request->spec, request->options);
      } else if (request->mode == "opt") {
        report = ExplainOpt(request->spec, request->options);
      } else {
        report = CellSolve(request->spec, request->cell);
      }
      Finish(job->id, &report, "");
    } catch (const std::exception& e) {
      Finish(job->id, nullptr, e.what());
    }
  });
  return JsonResponse(202, Json{{"job", job->id}, {"dataset", dataset_id}, {"status", "queued"}});
}

void Service::Finish(const std::string& job_id, const ExplanationReport* report, const std::string& error) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return;
  Job& job = *it->second;
  if (report != nullptr) {
    job.report = ReportToJson(*report);
    job.state = job.cancel->load() ? JobState::kCancelled : JobState::kDone;
  } else if (job.state != JobState::kCancelled) {
    job.error = error;
    job.state = JobState::kFailed;
  }
  auto ds = datasets_.find(job.dataset_id);
  if (ds != datasets_.end()) {
    if (ds->second.active_job == job.id) ds->second.active_job.clear();
    if (!job.report.empty()) ds->second.history.push_back(job.report);
  }
  job_done_.notify_all();
}

Response Service::Explanations(const std::string& dataset_id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = datasets_.find(dataset_id);
  if (it == datasets_.end()) return Error(404, "unknown dataset " + dataset_id);
  Json list = Json::array();
  for (const std::string& report : it->second.history) list.push_back(Json::parse(report));
  return JsonResponse(200, Json{{"dataset", dataset_id}, {"explanations", std::move(list)}});
}

Response Service::GetJob(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return Error(404, "unknown job " + id);
  const Job& job = *it->second;
  Json out = {{"job", job.id}, {"dataset", job.dataset_id}, {"mode", job.mode}, {"status", JobStateName(job.state)}};
  if (!job.report.empty()) out["report"] = Json::parse(job.report);
  if (!job.error.empty()) out["error"] = job.error;
  return JsonResponse(200, out);
}

Response Service::CancelJob(const std::string& id) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = jobs_.find(id);
  if (it == jobs_.end()) return Error(404, "unknown job " + id);
  Job& job = *it->second;
  job.cancel->store(true);
  if (job.state == JobState::kQueued) {
    job.state = JobState::kCancelled;
    auto ds = datasets_.find(job.dataset_id);
    if (ds != datasets_.end() && ds->second.active_job == job.id) ds->second.active_job.clear();
    job_done_.notify_all();
  }
  return JsonResponse(202, Json{{"job", job.id}, {"status", JobStateName(job.state)}});
}

bool Service::WaitForJob(const std::string& job_id, double timeout_seconds) {
  std::unique_lock<std::mutex> lock(mu_);
  auto finished = [&] {
    auto it = jobs_.find(job_id);
    if (it == jobs_.end()) return true;
    const JobState s = it->second->state;
    if (s == JobState::kQueued || s == JobState::kRunning) return false;
    // A cancelled running job is final once the dataset is released.
    auto ds = datasets_.find(it->second->dataset_id);
    return ds == datasets_.end() || ds->second.active_job != job_id;
  };
  return job_done_.wait_for(lock, std::chrono::duration<double>(timeout_seconds), finished);
}

void Service::Enqueue(std::function<void()> task) {
  {
    std::lock_guard<std::mutex> lock(queue_mu_);
    queue_.push_back(std::move(task));
  }
  queue_cv_.notify_one();
}

void Service::WorkerLoop() {
  for (;;) {
    std::function<void()> task;
    {
      std::unique_lock<std::mutex> lock(queue_mu_);
      queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
      if (stopping_) return;
      task = std::move(queue_.front());
      queue_.pop_front();
    }
    task();
  }
}

std::string Service::JobStateName(JobState state) {
  switch (state) {
    case JobState::kQueued:
      return "queued";
    case JobState::kRunning:
      return "running";
    case JobState::kDone:
      return "done";
    case JobState::kCancelled:
      return "cancelled";
    case JobState::kFailed:
      return "failed";
  }
  return "failed";
}

}  // namespace linrank::service
