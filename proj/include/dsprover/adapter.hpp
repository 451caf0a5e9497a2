#pragma once

// Environment backed by an external prover process speaking newline-delimited
// JSON over stdin/stdout, one request then one response:
//
//   {"cmd":"init","name":..,"hypotheses":[{"name":..,"statement":..}],"target":..}
//     -> {"ok":true,"state_id":0,"state_text":..} | {"ok":false,"error":..}
//   {"cmd":"run_tac","state_id":N,"tactic":..,"timeout_ms":..}
//     -> {"ok":true,"state_id":M,"state_text":..,"proved":false}
//      | {"ok":true,"proved":true}
//      | {"ok":false,"error":..,"timeout":false}
//   {"cmd":"shutdown"} -> process exits 0
//
// A reply that does not arrive within the tactic timeout kills the process; it
// is restarted lazily and known states are rebuilt by replaying their tactics.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsprover/core.hpp"
#include "dsprover/env.hpp"

extern char** environ;

namespace dsprover {

class AdapterError : public EnvFailure {
 public:
  enum class Kind { kSpawnFailed, kProcessDead, kProtocolViolation, kUnknownState };

  AdapterError(Kind kind, const std::string& what) : EnvFailure(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Child process with piped stdin/stdout; stderr is inherited.
class Subprocess {
 public:
  explicit Subprocess(const std::vector<std::string>& argv) {
    if (argv.empty()) throw AdapterError(AdapterError::Kind::kSpawnFailed, "empty command line");
    // Writes to a dead child must surface as EPIPE, not kill us.
    ::signal(SIGPIPE, SIG_IGN);
    int in[2];
    int out[2];
    if (::pipe2(in, O_CLOEXEC) != 0) spawn_error("pipe");
    if (::pipe2(out, O_CLOEXEC) != 0) {
      ::close(in[0]);
      ::close(in[1]);
      spawn_error("pipe");
    }
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out[1], STDOUT_FILENO);
    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);
    const int rc = ::posix_spawnp(&pid_, args[0], &actions, nullptr, args.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(in[0]);
    ::close(out[1]);
    to_child_ = in[1];
    from_child_ = out[0];
    if (rc != 0) {
      pid_ = -1;
      close_fds();
      throw AdapterError(AdapterError::Kind::kSpawnFailed,
                         "cannot start '" + argv[0] + "': " + std::strerror(rc));
    }
  }

  Subprocess(const Subprocess&) = delete;
  Subprocess& operator=(const Subprocess&) = delete;

  ~Subprocess() {
    kill();
    close_fds();
  }

  void write_line(std::string_view line) {
    std::string buf(line);
    buf.push_back('\n');
    std::size_t off = 0;
    while (off < buf.size()) {
      ssize_t n = ::write(to_child_, buf.data() + off, buf.size() - off);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw AdapterError(AdapterError::Kind::kProcessDead,
                           std::string("prover process closed its input: ") + std::strerror(errno));
      }
      off += static_cast<std::size_t>(n);
    }
  }

  // nullopt when `deadline` passes first. Throws kProcessDead on EOF.
  std::optional<std::string> read_line(Clock::time_point deadline) {
    while (true) {
      if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto now = Clock::now();
      if (now >= deadline) return std::nullopt;
      const auto wait = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count();
      pollfd pfd{from_child_, POLLIN, 0};
      const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(wait + 1, 1000)));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw AdapterError(AdapterError::Kind::kProcessDead, std::string("poll: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[4096];
      ssize_t n = ::read(from_child_, chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR || errno == EAGAIN) continue;
        throw AdapterError(AdapterError::Kind::kProcessDead, std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) throw AdapterError(AdapterError::Kind::kProcessDead, "prover process exited");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  // Waits up to `grace` for a voluntary exit. Returns the exit status if reaped.
  std::optional<int> wait_exit(Duration grace) {
    const auto deadline = Clock::now() + grace;
    while (pid_ > 0) {
      int status = 0;
      pid_t r = ::waitpid(pid_, &status, WNOHANG);
      if (r == pid_) {
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
      }
      if (r < 0 || Clock::now() >= deadline) return std::nullopt;
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    return std::nullopt;
  }

  void kill() {
    if (pid_ <= 0) return;
    ::kill(pid_, SIGKILL);
    int status = 0;
    ::waitpid(pid_, &status, 0);
    pid_ = -1;
  }

  pid_t pid() const { return pid_; }

 private:
  [[noreturn]] static void spawn_error(const char* what) {
    throw AdapterError(AdapterError::Kind::kSpawnFailed, std::string(what) + ": " + std::strerror(errno));
  }

  void close_fds() {
    if (to_child_ >= 0) ::close(to_child_);
    if (from_child_ >= 0) ::close(from_child_);
    to_child_ = from_child_ = -1;
  }

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::string buffer_;
};

struct AdapterOptions {
  std::vector<std::string> extra_args;
  // Added to the tactic timeout before the reply is considered lost, so a
  // prover that enforces the timeout itself gets to say so.
  Duration reply_grace = std::chrono::milliseconds(200);
  Duration init_timeout = std::chrono::seconds(60);
};

class AdapterEnv final : public Environment {
 public:
  explicit AdapterEnv(std::string executable, AdapterOptions options = {})
      : executable_(std::move(executable)), options_(std::move(options)) {}

  ~AdapterEnv() override { shutdown(); }

  ProofState init(const TheoremSpec& spec) override {
    check(spec);
    spec_ = spec;
    states_.clear();
    if (!proc_) spawn();
    return start_theorem();
  }

  ApplyOutcome run_tactic(const ProofState& state, std::string_view tactic, Duration timeout) override {
    if (!spec_) throw AdapterError(AdapterError::Kind::kUnknownState, "no theorem initialised");
    if (state.proved()) return outcome::TacticError{"no goals"};
    const std::string& key = state.canonical_text();
    if (!states_.contains(key)) {
      throw AdapterError(AdapterError::Kind::kUnknownState, "state was not produced by this session");
    }
    const int id = resolve(key);

    nlohmann::json req{{"cmd", "run_tac"},
                       {"state_id", id},
                       {"tactic", std::string(tactic)},
                       {"timeout_ms", std::chrono::duration_cast<std::chrono::milliseconds>(timeout).count()}};
    std::optional<std::string> line = exchange(req, Clock::now() + timeout + options_.reply_grace);
    if (!line) {
      proc_.reset();  // kills the stuck process; restarted on next use
      return outcome::TacticTimeout{};
    }
    const nlohmann::json reply = parse_reply(*line);
    if (!field<bool>(reply, "ok")) {
      if (reply.contains("timeout") && field<bool>(reply, "timeout")) return outcome::TacticTimeout{};
      return outcome::TacticError{field<std::string>(reply, "error")};
    }
    if (reply.contains("proved") && field<bool>(reply, "proved")) return outcome::Proved{};
    ProofState next = parse_state(field<std::string>(reply, "state_text"));
    const int next_id = field<int>(reply, "state_id");
    if (next.canonical_text() == key) return outcome::TacticError{"tactic made no progress"};
    auto [it, inserted] = states_.try_emplace(next.canonical_text());
    if (inserted) it->second.lineage = Lineage{key, std::string(tactic)};
    it->second.id = next_id;
    it->second.generation = generation_;
    return outcome::NewState{std::move(next)};
  }

  void shutdown() {
    if (!proc_) return;
    try {
      proc_->write_line(R"({"cmd":"shutdown"})");
      proc_->wait_exit(std::chrono::seconds(2));
    } catch (const AdapterError&) {
    }
    proc_.reset();
  }

  // Exit status of a shutdown handshake, for conformance checks.
  std::optional<int> shutdown_and_wait(Duration grace = std::chrono::seconds(2)) {
    if (!proc_) return std::nullopt;
    proc_->write_line(R"({"cmd":"shutdown"})");
    auto status = proc_->wait_exit(grace);
    proc_.reset();
    return status;
  }

  bool running() const { return proc_ != nullptr; }
  std::size_t restarts() const { return generation_ > 0 ? generation_ - 1 : 0; }

 private:
  struct Lineage {
    std::string parent_text;
    std::string tactic;
  };
  struct Known {
    int id = -1;
    std::size_t generation = 0;
    std::optional<Lineage> lineage;
  };

  void spawn() {
    std::vector<std::string> argv{executable_};
    argv.insert(argv.end(), options_.extra_args.begin(), options_.extra_args.end());
    proc_ = std::make_unique<Subprocess>(argv);
    ++generation_;
  }

  ProofState start_theorem() {
    nlohmann::json hyps = nlohmann::json::array();
    for (const auto& h : spec_->hypotheses) hyps.push_back({{"name", h.name}, {"statement", h.statement}});
    nlohmann::json req{{"cmd", "init"}, {"name", spec_->name}, {"hypotheses", hyps}, {"target", spec_->target}};
    std::optional<std::string> line = exchange(req, Clock::now() + options_.init_timeout);
    if (!line) {
      proc_.reset();
      throw AdapterError(AdapterError::Kind::kProcessDead, "prover did not answer init in time");
    }
    const nlohmann::json reply = parse_reply(*line);
    if (!field<bool>(reply, "ok")) throw InitError(field<std::string>(reply, "error"));
    ProofState root = parse_state(field<std::string>(reply, "state_text"));
    Known& k = states_[root.canonical_text()];
    k.id = field<int>(reply, "state_id");
    k.generation = generation_;
    return root;
  }

  // Prover-side id of a known state, replaying its lineage after a restart.
  int resolve(const std::string& text) {
    if (!proc_) {
      spawn();
      start_theorem();
    }
    Known& k = states_.at(text);
    if (k.generation == generation_) return k.id;
    if (!k.lineage) throw AdapterError(AdapterError::Kind::kUnknownState, "root state lost after restart");
    const Lineage lineage = *k.lineage;
    const int parent = resolve(lineage.parent_text);
    nlohmann::json req{{"cmd", "run_tac"},
                       {"state_id", parent},
                       {"tactic", lineage.tactic},
                       {"timeout_ms", std::chrono::duration_cast<std::chrono::milliseconds>(kDefaultTacticTimeout).count()}};
    auto line = exchange(req, Clock::now() + kDefaultTacticTimeout + options_.reply_grace);
    if (!line) {
      proc_.reset();
      throw AdapterError(AdapterError::Kind::kProcessDead, "replay after restart timed out");
    }
    const nlohmann::json reply = parse_reply(*line);
    if (!field<bool>(reply, "ok") || !reply.contains("state_text") ||
        parse_state(field<std::string>(reply, "state_text")).canonical_text() != text) {
      throw AdapterError(AdapterError::Kind::kProtocolViolation, "replay after restart diverged");
    }
    Known& again = states_.at(text);
    again.id = field<int>(reply, "state_id");
    again.generation = generation_;
    return again.id;
  }

  // One request/response round trip. A dead process is dropped before the
  // error propagates.
  std::optional<std::string> exchange(const nlohmann::json& req, Clock::time_point deadline) {
    try {
      proc_->write_line(req.dump());
      return proc_->read_line(deadline);
    } catch (const AdapterError&) {
      proc_.reset();
      throw;
    }
  }

  nlohmann::json parse_reply(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      proc_.reset();
      throw AdapterError(AdapterError::Kind::kProtocolViolation, "malformed reply: " + line);
    }
    return j;
  }

  template <class T>
  T field(const nlohmann::json& j, const char* key) {
    try {
      return j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      proc_.reset();
      throw AdapterError(AdapterError::Kind::kProtocolViolation,
                         std::string("reply field '") + key + "' missing or mistyped: " + j.dump());
    }
  }

  ProofState parse_state(const std::string& s) {
    try {
      return ProofState::from_text(s);
    } catch (const Error& e) {
      proc_.reset();
      throw AdapterError(AdapterError::Kind::kProtocolViolation, std::string("bad state_text: ") + e.what());
    }
  }

  std::string executable_;
  AdapterOptions options_;
  std::unique_ptr<Subprocess> proc_;
  std::size_t generation_ = 0;
  std::optional<TheoremSpec> spec_;
  std::unordered_map<std::string, Known> states_;
};

static_assert(ProverEnvironment<AdapterEnv>);

}  // namespace dsprover
