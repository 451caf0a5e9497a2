#pragma once

// Proof jobs over HTTP. Submit a theorem, poll until the job reaches a
// terminal state, optionally cancel it.
//
//   POST   /prove      {"name", "hypotheses", "target", "total_time_s"?} -> 202 {"job_id"}
//   GET    /jobs/{id}  {"status", "proof"?, "error"?, "elapsed_s"}
//   DELETE /jobs/{id}  cancel a queued or running job
//   GET    /jobs       every job plus running/queued counts
//
// Each running job owns a search thread and a fresh environment. At most
// `max_jobs` run at once; the rest wait in the queued state.

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <stop_token>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dsprover/bench.hpp"
#include "dsprover/dataio.hpp"
#include "dsprover/env.hpp"
#include "dsprover/generator.hpp"
#include "dsprover/search.hpp"

namespace dsprover {

enum class JobStatus { kQueued, kRunning, kProved, kTimeout, kExhausted, kError };

inline std::string_view job_status_name(JobStatus s) {
  switch (s) {
    case JobStatus::kQueued: return "queued";
    case JobStatus::kRunning: return "running";
    case JobStatus::kProved: return "proved";
    case JobStatus::kTimeout: return "timeout";
    case JobStatus::kExhausted: return "exhausted";
    case JobStatus::kError: return "error";
  }
  return "?";
}

inline bool is_terminal(JobStatus s) { return s != JobStatus::kQueued && s != JobStatus::kRunning; }

struct ProofJob {
  std::string id;
  TheoremSpec spec;
  JobStatus status = JobStatus::kQueued;
  std::optional<ProofResult> result;
  Clock::time_point submitted_at{};
  std::optional<Clock::time_point> started_at;
  std::optional<Clock::time_point> finished_at;

  double elapsed_seconds(Clock::time_point now = Clock::now()) const {
    if (!started_at) return 0.0;
    return std::chrono::duration<double>(finished_at.value_or(now) - *started_at).count();
  }
};

struct ServiceConfig {
  EnvFactory make_env;
  std::shared_ptr<const TacticGenerator> generator;
  SearchConfig search;  // total_time is the default per-job budget
  std::size_t max_jobs = 2;
  std::optional<std::string> results_log;
};

// Tactic timeout for a job whose budget may be smaller than the default.
inline Duration clamp_tactic_timeout(Duration configured, Duration total) {
  return std::min(configured, total / 2);
}

class JobManager {
 public:
  explicit JobManager(ServiceConfig config) : config_(std::move(config)) {
    if (!config_.make_env) throw Error("job manager needs an environment factory");
    if (!config_.generator) throw Error("job manager needs a generator");
    if (config_.max_jobs < 1) throw Error("max_jobs must be >= 1");
  }

  JobManager(const JobManager&) = delete;
  JobManager& operator=(const JobManager&) = delete;

  ~JobManager() {
    std::vector<std::jthread> threads;
    {
      std::lock_guard lock(mu_);
      shutting_down_ = true;
      for (auto& [id, slot] : jobs_) {
        slot.stop.request_stop();
        if (slot.thread.joinable()) threads.push_back(std::move(slot.thread));
      }
    }
    threads.clear();  // joins
  }

  // Throws InitError for statements the environment rejects.
  std::string submit(const TheoremSpec& spec, std::optional<Duration> total_time = std::nullopt) {
    config_.make_env()->check(spec);
    SearchConfig cfg = config_.search;
    if (total_time) {
      if (*total_time <= Duration::zero()) throw InitError("total_time_s must be positive");
      cfg.total_time = *total_time;
    }
    cfg.per_tactic_timeout = clamp_tactic_timeout(cfg.per_tactic_timeout, cfg.total_time);
    validate(cfg);

    std::lock_guard lock(mu_);
    std::string id = fresh_id();
    Slot& slot = jobs_[id];
    slot.job.id = id;
    slot.job.spec = spec;
    slot.job.submitted_at = Clock::now();
    slot.cfg = std::move(cfg);
    order_.push_back(id);
    queue_.push_back(id);
    dispatch_locked();
    return id;
  }

  std::optional<ProofJob> get(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second.job;
  }

  std::vector<ProofJob> list() const {
    std::lock_guard lock(mu_);
    std::vector<ProofJob> out;
    for (const auto& id : order_) out.push_back(jobs_.at(id).job);
    return out;
  }

  // False for unknown ids. Terminal jobs are left as they are.
  bool cancel(const std::string& id) {
    std::lock_guard lock(mu_);
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return false;
    Slot& slot = it->second;
    if (slot.job.status == JobStatus::kQueued) {
      queue_.erase(std::remove(queue_.begin(), queue_.end(), id), queue_.end());
      slot.job.status = JobStatus::kError;
      slot.job.result = EnvironmentError{std::string(kCancelledMessage)};
      slot.job.finished_at = Clock::now();
      log_locked(slot.job);
      changed_.notify_all();
    } else if (slot.job.status == JobStatus::kRunning) {
      slot.stop.request_stop();
    }
    return true;
  }

  // Blocks until the job is terminal or `timeout` passes.
  std::optional<ProofJob> wait(const std::string& id, Duration timeout) const {
    std::unique_lock lock(mu_);
    changed_.wait_for(lock, timeout, [&] {
      auto it = jobs_.find(id);
      return it == jobs_.end() || is_terminal(it->second.job.status);
    });
    auto it = jobs_.find(id);
    if (it == jobs_.end()) return std::nullopt;
    return it->second.job;
  }

  std::size_t running() const {
    std::lock_guard lock(mu_);
    return running_;
  }
  std::size_t queued() const {
    std::lock_guard lock(mu_);
    return queue_.size();
  }
  std::size_t peak_running() const {
    std::lock_guard lock(mu_);
    return peak_running_;
  }
  std::size_t max_jobs() const { return config_.max_jobs; }

 private:
  struct Slot {
    ProofJob job;
    SearchConfig cfg;
    std::stop_source stop;
    std::jthread thread;
  };

  std::string fresh_id() {
    static constexpr char kHex[] = "0123456789abcdef";
    while (true) {
      std::string id;
      for (int i = 0; i < 16; ++i) id.push_back(kHex[rng_() & 0xf]);
      if (!jobs_.contains(id)) return id;
    }
  }

  void dispatch_locked() {
    while (!shutting_down_ && running_ < config_.max_jobs && !queue_.empty()) {
      const std::string id = queue_.front();
      queue_.pop_front();
      Slot& slot = jobs_.at(id);
      slot.job.status = JobStatus::kRunning;
      slot.job.started_at = Clock::now();
      ++running_;
      peak_running_ = std::max(peak_running_, running_);
      slot.thread = std::jthread([this, id, spec = slot.job.spec, cfg = slot.cfg,
                                  token = slot.stop.get_token()] { run(id, spec, cfg, token); });
    }
    changed_.notify_all();
  }

  void run(const std::string& id, const TheoremSpec& spec, const SearchConfig& cfg, std::stop_token stop) {
    ProofResult result = EnvironmentError{"internal error"};
    try {
      std::unique_ptr<Environment> env = config_.make_env();
      SearchHooks hooks;
      hooks.stop = stop;
      result = prove(spec, *env, *config_.generator, cfg, hooks).result;
    } catch (const std::exception& e) {
      result = EnvironmentError{e.what()};
    }
    std::lock_guard lock(mu_);
    Slot& slot = jobs_.at(id);
    slot.job.status = std::visit(
        [](const auto& r) {
          using T = std::decay_t<decltype(r)>;
          if constexpr (std::is_same_v<T, Proved>) return JobStatus::kProved;
          if constexpr (std::is_same_v<T, Timeout>) return JobStatus::kTimeout;
          if constexpr (std::is_same_v<T, QueueExhausted>) return JobStatus::kExhausted;
          return JobStatus::kError;
        },
        result);
    slot.job.result = std::move(result);
    slot.job.finished_at = Clock::now();
    --running_;
    log_locked(slot.job);
    dispatch_locked();
  }

  void log_locked(const ProofJob& job) {
    if (!config_.results_log) return;
    std::ofstream out(*config_.results_log, std::ios::app);
    out << job_json(job).dump() << '\n';
  }

 public:
  static nlohmann::ordered_json job_json(const ProofJob& job) {
    nlohmann::ordered_json j;
    j["job_id"] = job.id;
    j["name"] = job.spec.name;
    j["status"] = job_status_name(job.status);
    if (job.result) {
      if (const auto* p = std::get_if<Proved>(&*job.result)) j["proof"] = p->tactics;
      if (const auto* e = std::get_if<EnvironmentError>(&*job.result)) j["error"] = e->message;
    }
    j["elapsed_s"] = job.elapsed_seconds();
    return j;
  }

 private:
  ServiceConfig config_;
  mutable std::mutex mu_;
  mutable std::condition_variable changed_;
  std::map<std::string, Slot> jobs_;
  std::vector<std::string> order_;
  std::deque<std::string> queue_;
  std::size_t running_ = 0;
  std::size_t peak_running_ = 0;
  bool shutting_down_ = false;
  std::mt19937_64 rng_{std::random_device{}()};
};

class HttpService {
 public:
  explicit HttpService(JobManager& jobs) : jobs_(jobs) { routes(); }

  // Binds to `port` (0 picks a free one) and returns the bound port.
  int bind(const std::string& host, int port) {
    if (port == 0) {
      const int bound = server_.bind_to_any_port(host);
      if (bound < 0) throw Error("cannot bind " + host);
      return bound;
    }
    if (!server_.bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
  }

  // Blocks until stop().
  bool serve() { return server_.listen_after_bind(); }

  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  static void send_json(httplib::Response& res, int status, const nlohmann::ordered_json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json; charset=utf-8");
  }

  void routes() {
    server_.Post("/prove", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string type = req.get_header_value("Content-Type");
      if (type.rfind("application/json", 0) != 0) {
        send_json(res, 415, {{"error", "content type must be application/json"}});
        return;
      }
      const nlohmann::json body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object()) {
        send_json(res, 400, {{"error", "request body is not a JSON object"}});
        return;
      }
      try {
        const TheoremSpec spec = theorem_from_json(body);
        std::optional<Duration> budget;
        if (body.contains("total_time_s")) {
          if (!body["total_time_s"].is_number()) throw Error("total_time_s must be a number");
          budget = std::chrono::duration_cast<Duration>(
              std::chrono::duration<double>(body["total_time_s"].get<double>()));
        }
        send_json(res, 202, {{"job_id", jobs_.submit(spec, budget)}});
      } catch (const Error& e) {
        send_json(res, 400, {{"error", e.what()}});
      }
    });

    server_.Get(R"(/jobs/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      auto job = jobs_.get(req.matches[1]);
      if (!job) {
        send_json(res, 404, {{"error", "unknown job"}});
        return;
      }
      send_json(res, 200, JobManager::job_json(*job));
    });

    server_.Delete(R"(/jobs/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
      const std::string id = req.matches[1];
      if (!jobs_.cancel(id)) {
        send_json(res, 404, {{"error", "unknown job"}});
        return;
      }
      send_json(res, 200, JobManager::job_json(*jobs_.get(id)));
    });

    server_.Get("/jobs", [this](const httplib::Request&, httplib::Response& res) {
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      std::size_t running = 0;
      for (const auto& job : jobs_.list()) {
        if (job.status == JobStatus::kRunning) ++running;
        list.push_back({{"job_id", job.id}, {"name", job.spec.name}, {"status", job_status_name(job.status)}});
      }
      send_json(res, 200,
                {{"jobs", list},
                 {"running", running},
                 {"queued", jobs_.queued()},
                 {"max_jobs", jobs_.max_jobs()},
                 {"peak_running", jobs_.peak_running()}});
    });

    server_.Get("/health", [](const httplib::Request&, httplib::Response& res) {
      send_json(res, 200, {{"ok", true}});
    });
  }

  JobManager& jobs_;
  httplib::Server server_;
};

}  // namespace dsprover
