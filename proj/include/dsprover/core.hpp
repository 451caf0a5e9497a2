#pragma once

// Domain types shared by every part of the prover: goals, proof states,
// search nodes, the best-first frontier and the node store.

#include <chrono>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <variant>
#include <vector>

namespace dsprover {

using Clock = std::chrono::steady_clock;
using Duration = Clock::duration;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace text {

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Collapses every whitespace run to one space and trims the ends.
inline std::string collapse_spaces(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending = false;
  for (char c : s) {
    if (is_space(c)) {
      pending = !out.empty();
      continue;
    }
    if (pending) out.push_back(' ');
    pending = false;
    out.push_back(c);
  }
  return out;
}

inline std::vector<std::string> split_words(std::string_view s) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && is_space(s[i])) ++i;
    std::size_t j = i;
    while (j < s.size() && !is_space(s[j])) ++j;
    if (j > i) words.emplace_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

// Letters, digits and '_', not starting with a digit. Bytes >= 0x80 count as
// letters so UTF-8 names such as `α` are accepted.
inline bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto ok = [](unsigned char c, bool first) {
    if (c >= 0x80 || c == '_') return true;
    if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z')) return true;
    return !first && c >= '0' && c <= '9';
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!ok(static_cast<unsigned char>(s[i]), i == 0)) return false;
  }
  return true;
}

}  // namespace text

// `decl` hypotheses carry variable binder lines such as `x y z w: nat`, whose
// "name" is a space separated list of identifiers.
enum class HypothesisKind { kProp, kDecl };

struct Hypothesis {
  std::string name;
  std::string statement;
  HypothesisKind kind = HypothesisKind::kProp;

  bool operator==(const Hypothesis&) const = default;
};

inline void validate(const Hypothesis& h) {
  if (h.kind == HypothesisKind::kDecl) {
    auto names = text::split_words(h.name);
    if (names.empty()) throw Error("binder line without variables");
    for (const auto& n : names) {
      if (!text::is_identifier(n)) throw Error("invalid binder name '" + n + "'");
    }
  } else if (!text::is_identifier(h.name)) {
    throw Error("invalid hypothesis name '" + h.name + "'");
  }
  if (text::trim(h.statement).empty()) {
    throw Error("hypothesis '" + h.name + "' has an empty statement");
  }
}

struct Goal {
  std::vector<Hypothesis> hypotheses;
  std::string target;

  bool operator==(const Goal&) const = default;

  const Hypothesis* find(std::string_view name) const {
    for (const auto& h : hypotheses) {
      if (h.kind == HypothesisKind::kProp && h.name == name) return &h;
    }
    return nullptr;
  }
};

inline void validate(const Goal& g) {
  std::unordered_set<std::string> seen;
  for (const auto& h : g.hypotheses) {
    validate(h);
    if (!seen.insert(h.name).second) {
      throw Error("duplicate hypothesis name '" + h.name + "'");
    }
  }
  if (text::trim(g.target).empty()) throw Error("empty goal target");
}

inline constexpr std::string_view kNoGoals = "no goals";
inline constexpr std::string_view kTurnstile = "|- ";

// Hypotheses one per line as `name: statement`, then the target prefixed by
// `|- `; goals are separated by a blank line.
inline std::string canonicalize_state(const std::vector<Goal>& goals) {
  if (goals.empty()) return std::string(kNoGoals);
  std::string out;
  for (std::size_t i = 0; i < goals.size(); ++i) {
    if (i > 0) out += "\n\n";
    for (const auto& h : goals[i].hypotheses) {
      out += h.name;
      out += ": ";
      out += h.statement;
      out += '\n';
    }
    out += kTurnstile;
    out += goals[i].target;
  }
  return out;
}

// Inverse of canonicalize_state. Used for prover replies and generator input.
inline std::vector<Goal> parse_state_text(std::string_view s) {
  std::vector<Goal> goals;
  if (text::trim(s) == kNoGoals) return goals;
  Goal current;
  bool have_target = false;
  bool in_goal = false;
  std::size_t line_no = 0;
  auto finish = [&] {
    if (!in_goal) return;
    if (!have_target) {
      throw Error("state text: goal ending at line " + std::to_string(line_no) +
                  " has no `|- ` target line");
    }
    goals.push_back(std::move(current));
    current = Goal{};
    have_target = false;
    in_goal = false;
  };
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t end = s.find('\n', pos);
    if (end == std::string_view::npos) end = s.size();
    std::string_view line = s.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    ++line_no;
    pos = end + 1;
    if (text::trim(line).empty()) {
      finish();
      if (end == s.size()) break;
      continue;
    }
    if (have_target) {
      throw Error("state text: line " + std::to_string(line_no) +
                  " follows the target without a blank separator");
    }
    in_goal = true;
    std::string_view t = text::trim(line);
    if (t.starts_with("|-") || t.starts_with("⊢")) {
      t.remove_prefix(t.starts_with("|-") ? 2 : std::string_view("⊢").size());
      current.target = text::collapse_spaces(t);
      have_target = true;
    } else {
      auto colon = t.find(':');
      if (colon == std::string_view::npos) {
        throw Error("state text: line " + std::to_string(line_no) +
                    " is neither `name: statement` nor a target");
      }
      Hypothesis h;
      h.name = text::collapse_spaces(t.substr(0, colon));
      h.statement = text::collapse_spaces(t.substr(colon + 1));
      h.kind = h.name.find(' ') != std::string::npos ? HypothesisKind::kDecl
                                                     : HypothesisKind::kProp;
      validate(h);
      current.hypotheses.push_back(std::move(h));
    }
    if (end == s.size()) break;
  }
  finish();
  return goals;
}

// Immutable after construction.
class ProofState {
 public:
  ProofState() : canonical_text_(kNoGoals) {}
  explicit ProofState(std::vector<Goal> goals)
      : goals_(std::move(goals)), canonical_text_(canonicalize_state(goals_)) {}

  static ProofState from_text(std::string_view s) { return ProofState(parse_state_text(s)); }

  const std::vector<Goal>& goals() const { return goals_; }
  const std::string& canonical_text() const { return canonical_text_; }
  bool proved() const { return goals_.empty(); }

  bool operator==(const ProofState& other) const {
    return canonical_text_ == other.canonical_text_;
  }

 private:
  std::vector<Goal> goals_;
  std::string canonical_text_;
};

struct TacticCandidate {
  std::string text;
  double log_prob = 0.0;

  bool operator==(const TacticCandidate&) const = default;
};

inline bool is_valid(const TacticCandidate& c) {
  return c.log_prob <= 0.0 && !text::trim(c.text).empty();
}

struct NodeId {
  std::size_t value = 0;
  auto operator<=>(const NodeId&) const = default;
};

struct ParentEdge {
  NodeId parent;
  std::string tactic;
};

struct SearchNode {
  NodeId id;
  std::shared_ptr<const ProofState> state;
  double cum_log_prob = 0.0;
  std::size_t depth = 0;
  std::optional<ParentEdge> parent;
  std::uint64_t insertion_seq = 0;
};

// Max cum_log_prob, then min depth, then FIFO.
inline bool higher_priority(const SearchNode& a, const SearchNode& b) {
  if (a.cum_log_prob != b.cum_log_prob) return a.cum_log_prob > b.cum_log_prob;
  if (a.depth != b.depth) return a.depth < b.depth;
  return a.insertion_seq < b.insertion_seq;
}

class Frontier {
 public:
  void push(SearchNode node) {
    if (!present_.insert(node.id.value).second) {
      throw Error("frontier already holds node " + std::to_string(node.id.value));
    }
    heap_.push(std::move(node));
  }

  std::optional<SearchNode> pop() {
    if (heap_.empty()) return std::nullopt;
    SearchNode top = heap_.top();
    heap_.pop();
    present_.erase(top.id.value);
    return top;
  }

  bool empty() const { return heap_.empty(); }
  std::size_t size() const { return heap_.size(); }

 private:
  struct Lower {
    bool operator()(const SearchNode& a, const SearchNode& b) const {
      return higher_priority(b, a);
    }
  };
  std::priority_queue<SearchNode, std::vector<SearchNode>, Lower> heap_;
  std::unordered_set<std::size_t> present_;
};

// Owns every node created during one search. Ids are dense indices.
class NodeStore {
 public:
  const SearchNode& add_root(std::shared_ptr<const ProofState> state) {
    if (!nodes_.empty()) throw Error("node store already has a root");
    SearchNode root;
    root.id = NodeId{0};
    root.state = std::move(state);
    root.insertion_seq = next_seq_++;
    nodes_.push_back(std::move(root));
    return nodes_.back();
  }

  const SearchNode& add_child(NodeId parent, std::string tactic, double log_prob,
                              std::shared_ptr<const ProofState> state) {
    const SearchNode& p = at(parent);
    SearchNode child;
    child.id = NodeId{nodes_.size()};
    child.state = std::move(state);
    child.cum_log_prob = p.cum_log_prob + log_prob;
    child.depth = p.depth + 1;
    child.parent = ParentEdge{parent, std::move(tactic)};
    child.insertion_seq = next_seq_++;
    nodes_.push_back(std::move(child));
    return nodes_.back();
  }

  const SearchNode& at(NodeId id) const {
    if (id.value >= nodes_.size()) {
      throw Error("unknown node " + std::to_string(id.value));
    }
    return nodes_[id.value];
  }

  bool contains(NodeId id) const { return id.value < nodes_.size(); }
  std::size_t size() const { return nodes_.size(); }
  const std::vector<SearchNode>& nodes() const { return nodes_; }

 private:
  std::vector<SearchNode> nodes_;
  std::uint64_t next_seq_ = 0;
};

// Parent-edge tactics from the root to `proved`, root first.
inline std::vector<std::string> extract_proof(const NodeStore& store, NodeId proved) {
  if (!store.contains(proved)) {
    throw Error("extract_proof: unknown node " + std::to_string(proved.value));
  }
  const SearchNode* node = &store.at(proved);
  if (!node->state->proved()) {
    throw Error("extract_proof: node " + std::to_string(proved.value) + " has open goals");
  }
  std::vector<std::string> tactics;
  tactics.reserve(node->depth);
  while (node->parent) {
    tactics.push_back(node->parent->tactic);
    node = &store.at(node->parent->parent);
  }
  return {tactics.rbegin(), tactics.rend()};
}

struct Proved {
  std::vector<std::string> tactics;
  std::size_t node_count = 0;
  Duration elapsed{};
};

struct Timeout {
  std::size_t node_count = 0;
  Duration elapsed{};
};

struct QueueExhausted {
  std::size_t node_count = 0;
  Duration elapsed{};
};

struct EnvironmentError {
  std::string message;
};

using ProofResult = std::variant<Proved, Timeout, QueueExhausted, EnvironmentError>;

inline std::string_view status_name(const ProofResult& r) {
  switch (r.index()) {
    case 0: return "proved";
    case 1: return "timeout";
    case 2: return "exhausted";
    default: return "error";
  }
}

inline std::optional<Duration> elapsed_of(const ProofResult& r) {
  if (auto* p = std::get_if<Proved>(&r)) return p->elapsed;
  if (auto* t = std::get_if<Timeout>(&r)) return t->elapsed;
  if (auto* q = std::get_if<QueueExhausted>(&r)) return q->elapsed;
  return std::nullopt;
}

// One row per expansion: where on the schedule it happened and what it did.
struct ExpansionRecord {
  double elapsed_ratio = 0.0;
  std::size_t target_count = 0;  // n from the schedule
  std::size_t requested = 0;     // candidates asked of the generator
  std::size_t successes = 0;
  std::size_t children = 0;
};

struct SearchStats {
  std::map<std::size_t, std::size_t> nodes_per_depth;
  std::size_t expansions = 0;
  std::size_t tactics_sampled = 0;
  std::size_t tactics_succeeded = 0;
  std::size_t tactic_errors = 0;
  std::size_t tactic_timeouts = 0;
  std::size_t duplicates_discarded = 0;
  std::optional<std::size_t> proof_size;
  std::vector<ExpansionRecord> trace;

  std::size_t total_nodes() const {
    std::size_t n = 0;
    for (const auto& [depth, count] : nodes_per_depth) n += count;
    return n;
  }
};

}  // namespace dsprover
