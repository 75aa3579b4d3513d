#ifndef LINRANK_TOOLS_SERVICE_H_
#define LINRANK_TOOLS_SERVICE_H_

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "linrank/explain.h"
#include "linrank/formulate.h"
#include "linrank/model.h"

namespace linrank::service {

struct Response {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct ServiceOptions {
  std::size_t workers = 2;
  // Largest accepted upload, in tuples.
  std::size_t max_rows = 100000;
};

// JSON API over an in-memory dataset store:
//   POST   /datasets                      {csv, ranking, dedup} -> 201 {id, attributes, n, m}
//   GET    /datasets/{id}                 dataset summary
//   DELETE /datasets/{id}
//   POST   /datasets/{id}/solve           {mode, k, constraints, ...} -> 202 {job}
//   GET    /datasets/{id}/explanations    finished reports, oldest first
//   GET    /jobs/{id}                     state, plus the report once finished
//   DELETE /jobs/{id}                     cancel
// Solves run on a fixed pool of worker threads, one active job per dataset.
class Service {
 public:
  explicit Service(ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  Response Handle(const std::string& method, const std::string& path, const std::string& body);

  // Blocks until the job leaves the queued/running states or the timeout
  // passes; returns whether it finished.
  bool WaitForJob(const std::string& job_id, double timeout_seconds);

 private:
  enum class JobState { kQueued, kRunning, kDone, kCancelled, kFailed };

  struct Dataset {
    std::string id;
    std::shared_ptr<const Relation> relation;
    std::shared_ptr<const GivenRanking> ranking;
    std::vector<std::string> history;  // report JSON, append-only
    std::string active_job;
  };

  struct Job {
    std::string id;
    std::string dataset_id;
    std::string mode;
    JobState state = JobState::kQueued;
    std::shared_ptr<std::atomic<bool>> cancel = std::make_shared<std::atomic<bool>>(false);
    std::string report;  // JSON, when finished
    std::string error;
  };

  Response CreateDataset(const std::string& body);
  Response GetDataset(const std::string& id);
  Response DeleteDataset(const std::string& id);
  Response Solve(const std::string& dataset_id, const std::string& body);
  Response Explanations(const std::string& dataset_id);
  Response GetJob(const std::string& id);
  Response CancelJob(const std::string& id);

  void Enqueue(std::function<void()> task);
  void WorkerLoop();
  void Finish(const std::string& job_id, const ExplanationReport* report, const std::string& error);

  static std::string JobStateName(JobState state);

  ServiceOptions options_;
  std::mutex mu_;
  std::condition_variable job_done_;
  std::map<std::string, Dataset> datasets_;
  std::map<std::string, std::shared_ptr<Job>> jobs_;
  std::uint64_t next_dataset_ = 1;
  std::uint64_t next_job_ = 1;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::deque<std::function<void()>> queue_;
  bool stopping_ = false;
  std::vector<std::thread> workers_;
};

}  // namespace linrank::service

#endif  // LINRANK_TOOLS_SERVICE_H_
