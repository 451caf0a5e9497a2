#pragma once

// Best-first proof search. The frontier is ordered by cumulative tactic
// log-probability; each expansion asks the schedule how many tactics to apply
// given the fraction of the time budget already spent.

#include <functional>
#include <map>
#include <optional>
#include <stop_token>
#include <string>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsprover/core.hpp"
#include "dsprover/env.hpp"
#include "dsprover/generator.hpp"
#include "dsprover/schedule.hpp"

namespace dsprover {

struct SearchConfig {
  ScheduleConfig schedule = DynamicScheduleConfig{};
  Duration total_time = std::chrono::minutes(10);
  Duration per_tactic_timeout = kDefaultTacticTimeout;
  std::size_t oversample_factor = kDefaultOversampleFactor;
  // Safety valve for CI; reaching it ends the search like a timeout.
  std::optional<std::size_t> max_nodes;
  bool dedup = true;
};

inline void validate(const SearchConfig& cfg) {
  std::visit([](const auto& s) { validate(s); }, cfg.schedule);
  if (cfg.total_time <= Duration::zero()) throw Error("total time must be positive");
  if (cfg.per_tactic_timeout <= Duration::zero()) throw Error("per-tactic timeout must be positive");
  if (cfg.per_tactic_timeout >= cfg.total_time) {
    throw Error("per-tactic timeout must be shorter than the total time budget");
  }
  if (cfg.oversample_factor < 1) throw Error("oversample factor must be >= 1");
  if (cfg.max_nodes && *cfg.max_nodes < 1) throw Error("max_nodes must be >= 1");
}

struct SearchEvent {
  enum class Kind { kPush, kPop, kExpand, kApply, kResult };

  Kind kind = Kind::kPop;
  double t = 0.0;  // seconds since the search started
  std::size_t node = 0;
  std::optional<std::size_t> parent;
  double cum_log_prob = 0.0;
  std::size_t depth = 0;
  std::uint64_t seq = 0;
  // expand
  double elapsed_ratio = 0.0;
  std::size_t target_count = 0;
  std::size_t requested = 0;
  // apply
  std::string tactic;
  std::string outcome;
  // result
  std::string status;
};

inline std::string_view kind_name(SearchEvent::Kind k) {
  switch (k) {
    case SearchEvent::Kind::kPush: return "push";
    case SearchEvent::Kind::kPop: return "pop";
    case SearchEvent::Kind::kExpand: return "expand";
    case SearchEvent::Kind::kApply: return "apply";
    case SearchEvent::Kind::kResult: return "result";
  }
  return "?";
}

inline nlohmann::ordered_json to_json(const SearchEvent& e) {
  nlohmann::ordered_json j;
  j["event"] = kind_name(e.kind);
  j["t"] = e.t;
  switch (e.kind) {
    case SearchEvent::Kind::kPush:
    case SearchEvent::Kind::kPop:
      j["node"] = e.node;
      if (e.parent) j["parent"] = *e.parent;
      j["cum_log_prob"] = e.cum_log_prob;
      j["depth"] = e.depth;
      j["seq"] = e.seq;
      break;
    case SearchEvent::Kind::kExpand:
      j["node"] = e.node;
      j["r"] = e.elapsed_ratio;
      j["n"] = e.target_count;
      j["requested"] = e.requested;
      break;
    case SearchEvent::Kind::kApply:
      j["node"] = e.node;
      j["tactic"] = e.tactic;
      j["outcome"] = e.outcome;
      break;
    case SearchEvent::Kind::kResult:
      j["status"] = e.status;
      break;
  }
  return j;
}

struct SearchHooks {
  std::function<void(const SearchEvent&)> on_event;
  std::stop_token stop;
};

struct SearchOutput {
  ProofResult result;
  SearchStats stats;
};

inline constexpr std::string_view kCancelledMessage = "cancelled";

template <ProverEnvironment Env, CandidateGenerator Gen>
class BestFirstSearch {
 public:
  BestFirstSearch(Env& env, const Gen& gen, SearchConfig cfg, SearchHooks hooks = {})
      : env_(env), gen_(gen), cfg_(std::move(cfg)), hooks_(std::move(hooks)) {
    validate(cfg_);
  }

  SearchOutput prove(const TheoremSpec& spec) {
    budget_ = TimeBudget{cfg_.total_time, Clock::now()};
    try {
      ProofResult r = run(spec);
      emit_result(r);
      return {std::move(r), stats_};
    } catch (const EnvFailure& e) {
      ProofResult r = EnvironmentError{e.what()};
      emit_result(r);
      return {std::move(r), stats_};
    } catch (const GeneratorError& e) {
      ProofResult r = EnvironmentError{std::string("generator: ") + e.what()};
      emit_result(r);
      return {std::move(r), stats_};
    }
  }

  // Root node of a fresh search rooted at `state`; for driving expand() directly.
  const SearchNode& start(ProofState state, Clock::time_point now = Clock::now()) {
    budget_ = TimeBudget{cfg_.total_time, now};
    const SearchNode& root = store_.add_root(std::make_shared<const ProofState>(std::move(state)));
    seen_.insert(root.state->canonical_text());
    ++stats_.nodes_per_depth[0];
    return root;
  }

  // Applies up to n tactics (n from the schedule at `now`) to `node` and
  // returns the ids of the children created.
  std::vector<NodeId> expand(const SearchNode& node, Clock::time_point now) {
    const double r = elapsed_ratio(budget_, now);
    const std::size_t n = sample_count(cfg_.schedule, r);
    const bool dynamic = std::holds_alternative<DynamicScheduleConfig>(cfg_.schedule);
    const std::size_t requested = dynamic ? oversample_request(n, cfg_.oversample_factor) : n;

    ++stats_.expansions;
    SearchEvent ev = node_event(SearchEvent::Kind::kExpand, node);
    ev.elapsed_ratio = r;
    ev.target_count = n;
    ev.requested = requested;
    emit(std::move(ev));

    const GeneratorRequest req{node.state->canonical_text(), requested};
    const RankedCandidates ranked = gen_.generate(req);
    check_candidates(req, ranked);
    stats_.tactics_sampled += ranked.items.size();

    // Copies: store_ may reallocate while children are added.
    const NodeId parent_id = node.id;
    const std::shared_ptr<const ProofState> parent_state = node.state;

    std::vector<NodeId> children;
    std::size_t successes = 0;
    for (const auto& cand : ranked.items) {
      if (dynamic && successes >= n) break;
      if (halted()) {
        truncated_ = true;
        break;
      }
      ApplyOutcome out = env_.run_tactic(*parent_state, cand.text, cfg_.per_tactic_timeout);
      SearchEvent apply = SearchEvent{};
      apply.kind = SearchEvent::Kind::kApply;
      apply.node = parent_id.value;
      apply.tactic = cand.text;
      if (const auto* err = std::get_if<outcome::TacticError>(&out)) {
        ++stats_.tactic_errors;
        apply.outcome = "error: " + err->message;
        emit(std::move(apply));
        continue;
      }
      if (std::holds_alternative<outcome::TacticTimeout>(out)) {
        ++stats_.tactic_timeouts;
        apply.outcome = "timeout";
        emit(std::move(apply));
        continue;
      }
      ++successes;
      ++stats_.tactics_succeeded;
      const ProofState& next = resulting_state(out);
      apply.outcome = next.proved() ? "proved" : "new";
      emit(std::move(apply));
      // Proved states are exempt so the best-scoring proof still wins.
      if (cfg_.dedup && !next.proved() && !seen_.insert(next.canonical_text()).second) {
        ++stats_.duplicates_discarded;
        continue;
      }
      const SearchNode& child = store_.add_child(parent_id, cand.text, cand.log_prob,
                                                 std::make_shared<const ProofState>(next));
      ++stats_.nodes_per_depth[child.depth];
      children.push_back(child.id);
      if (cfg_.max_nodes && store_.size() >= *cfg_.max_nodes) {
        truncated_ = true;
        break;
      }
    }
    stats_.trace.push_back({r, n, requested, successes, children.size()});
    return children;
  }

  const NodeStore& store() const { return store_; }
  const SearchStats& stats() const { return stats_; }
  const TimeBudget& budget() const { return budget_; }

 private:
  ProofResult run(const TheoremSpec& spec) {
    ProofState root_state = env_.init(spec);
    const SearchNode& root = start(std::move(root_state), budget_.started_at);
    Frontier frontier;
    push(frontier, root);

    while (true) {
      if (hooks_.stop.stop_requested()) return EnvironmentError{std::string(kCancelledMessage)};
      std::optional<SearchNode> node = frontier.pop();
      // An empty frontier only means exhaustion if no expansion was cut short.
      if (!node && !truncated_) return QueueExhausted{store_.size(), elapsed()};
      if (!node) {
        if (hooks_.stop.stop_requested()) return EnvironmentError{std::string(kCancelledMessage)};
        return Timeout{store_.size(), elapsed()};
      }
      emit(node_event(SearchEvent::Kind::kPop, *node));
      if (node->state->proved()) {
        Proved p{extract_proof(store_, node->id), store_.size(), elapsed()};
        stats_.proof_size = p.tactics.size();
        return p;
      }
      if (halted()) {
        if (hooks_.stop.stop_requested()) return EnvironmentError{std::string(kCancelledMessage)};
        return Timeout{store_.size(), elapsed()};
      }
      for (NodeId id : expand(*node, Clock::now())) push(frontier, store_.at(id));
    }
  }

  bool halted() const {
    return hooks_.stop.stop_requested() || Clock::now() >= budget_.deadline() ||
           (cfg_.max_nodes && store_.size() >= *cfg_.max_nodes);
  }

  void push(Frontier& frontier, const SearchNode& node) {
    emit(node_event(SearchEvent::Kind::kPush, node));
    frontier.push(node);
  }

  Duration elapsed() const { return Clock::now() - budget_.started_at; }

  SearchEvent node_event(SearchEvent::Kind kind, const SearchNode& node) const {
    SearchEvent e;
    e.kind = kind;
    e.node = node.id.value;
    if (node.parent) e.parent = node.parent->parent.value;
    e.cum_log_prob = node.cum_log_prob;
    e.depth = node.depth;
    e.seq = node.insertion_seq;
    return e;
  }

  void emit(SearchEvent e) {
    if (!hooks_.on_event) return;
    e.t = std::chrono::duration<double>(Clock::now() - budget_.started_at).count();
    hooks_.on_event(e);
  }

  void emit_result(const ProofResult& r) {
    SearchEvent e;
    e.kind = SearchEvent::Kind::kResult;
    e.status = std::string(status_name(r));
    emit(std::move(e));
  }

  Env& env_;
  const Gen& gen_;
  SearchConfig cfg_;
  SearchHooks hooks_;
  TimeBudget budget_{};
  NodeStore store_;
  SearchStats stats_;
  std::unordered_set<std::string> seen_;
  bool truncated_ = false;
};

template <ProverEnvironment Env, CandidateGenerator Gen>
SearchOutput prove(const TheoremSpec& spec, Env& env, const Gen& gen, const SearchConfig& cfg,
                   SearchHooks hooks = {}) {
  return BestFirstSearch<Env, Gen>(env, gen, cfg, std::move(hooks)).prove(spec);
}

inline std::map<std::size_t, std::size_t> depth_histogram(const SearchStats& stats) {
  return stats.nodes_per_depth;
}

// proof size -> number of proved runs with that size.
inline std::map<std::size_t, std::size_t> proof_size_report(const std::vector<SearchOutput>& runs) {
  std::map<std::size_t, std::size_t> table;
  for (const auto& run : runs) {
    if (const auto* p = std::get_if<Proved>(&run.result)) ++table[p->tactics.size()];
  }
  return table;
}

// Replays `tactics` from the theorem's initial state. Returns the final state,
// or the first failing outcome.
template <ProverEnvironment Env>
std::variant<ProofState, ApplyOutcome> replay_proof(Env& env, const TheoremSpec& spec,
                                                    const std::vector<std::string>& tactics,
                                                    Duration timeout = kDefaultTacticTimeout) {
  ProofState state = env.init(spec);
  for (const auto& t : tactics) {
    if (state.proved()) return ApplyOutcome{outcome::TacticError{"no goals left for '" + t + "'"}};
    ApplyOutcome out = env.run_tactic(state, t, timeout);
    if (!succeeded(out)) return out;
    state = resulting_state(out);
  }
  return state;
}

}  // namespace dsprover
