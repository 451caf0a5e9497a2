#pragma once

// Reference implementations used only by the tests: a string-level rewriter,
// an exhaustive BFS prover and seeded random theorem generators.

#include <deque>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dsprover/dsprover.hpp"

namespace oracle {

inline std::string squeeze(const std::string& s) {
  std::istringstream in(s);
  std::string word, out;
  while (in >> word) {
    if (!out.empty()) out += ' ';
    out += word;
  }
  return out;
}

// Space-delimited substring replacement. Adjacent matches share the padding
// space, which gives left-to-right non-overlapping semantics.
inline std::optional<std::string> rewrite(const std::string& term, const std::string& from, const std::string& to) {
  const std::string s = " " + squeeze(term) + " ";
  const std::string p = " " + squeeze(from) + " ";
  std::string out;
  std::size_t pos = 0;
  bool found = false;
  while (true) {
    const std::size_t hit = s.find(p, pos);
    if (hit == std::string::npos) break;
    out += s.substr(pos, hit - pos);
    out += " " + squeeze(to);
    pos = hit + p.size() - 1;
    found = true;
  }
  if (!found) return std::nullopt;
  out += s.substr(pos);
  return squeeze(out);
}

struct Eq {
  std::string lhs;
  std::string rhs;
};

inline Eq split_eq(const std::string& statement) {
  const auto at = statement.find(" = ");
  return {squeeze(statement.substr(0, at)), squeeze(statement.substr(at + 3))};
}

// Sequential `rw` of a single-equation target with the named equations:
// every premise must hit, and the goal may only become trivial at the end.
// nullopt on failure, "" when the goal closes.
inline std::optional<std::string> rw_chain(const std::string& target, const std::vector<Eq>& rules) {
  Eq goal = split_eq(target);
  for (std::size_t i = 0; i < rules.size(); ++i) {
    auto l = rewrite(goal.lhs, rules[i].lhs, rules[i].rhs);
    auto r = rewrite(goal.rhs, rules[i].lhs, rules[i].rhs);
    if (!l && !r) return std::nullopt;
    Eq next{l.value_or(goal.lhs), r.value_or(goal.rhs)};
    if (next.lhs == goal.lhs && next.rhs == goal.rhs) return std::nullopt;
    goal = next;
    if (goal.lhs == goal.rhs) {
      if (i + 1 < rules.size()) return std::nullopt;
      return std::string();
    }
  }
  return goal.lhs + " = " + goal.rhs;
}

struct BfsResult {
  bool proved = false;
  std::size_t depth = 0;     // shortest proof length when proved
  bool complete = false;     // the reachable space was exhausted (or a proof found)
  std::size_t states = 0;
};

// Breadth-first over every tactic the heuristic generator can emit.
inline BfsResult bfs_prove(const dsprover::TheoremSpec& spec, std::size_t max_states = 200000) {
  using namespace dsprover;
  SimEnv env;
  BfsResult res;
  std::deque<std::pair<ProofState, std::size_t>> queue;
  std::unordered_set<std::string> seen;
  ProofState root = env.init(spec);
  seen.insert(root.canonical_text());
  queue.emplace_back(root, 0);
  while (!queue.empty()) {
    auto [state, depth] = queue.front();
    queue.pop_front();
    for (const auto& t : HeuristicSimGenerator::enumerate(state.canonical_text())) {
      ApplyOutcome out = env.apply(state, t);
      if (std::holds_alternative<outcome::Proved>(out)) {
        res.proved = true;
        res.depth = depth + 1;
        res.complete = true;
        res.states = seen.size();
        return res;
      }
      if (const auto* s = std::get_if<outcome::NewState>(&out)) {
        if (seen.insert(s->state.canonical_text()).second) {
          if (seen.size() > max_states) {
            res.states = seen.size();
            return res;
          }
          queue.emplace_back(s->state, depth + 1);
        }
      }
    }
  }
  res.complete = true;
  res.states = seen.size();
  return res;
}

inline std::string random_term(std::mt19937_64& rng, std::size_t min_len, std::size_t max_len,
                               const std::string& alphabet = "abcde") {
  std::uniform_int_distribution<std::size_t> len(min_len, max_len);
  std::uniform_int_distribution<std::size_t> sym(0, alphabet.size() - 1);
  std::string out;
  for (std::size_t i = 0, n = len(rng); i < n; ++i) {
    if (i) out += ' ';
    out += alphabet[sym(rng)];
  }
  return out;
}

// Up to four non-growing equations (rhs no longer than lhs), so every
// rewrite keeps the target bounded and the reachable space is finite. Targets
// are often derived from the hypotheses so a fair share is provable.
inline dsprover::TheoremSpec random_bounded_theorem(std::mt19937_64& rng, const std::string& name) {
  dsprover::TheoremSpec spec;
  spec.name = name;
  std::uniform_int_distribution<std::size_t> hyp_count(0, 4);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  const std::size_t nh = hyp_count(rng);
  std::vector<Eq> rules;
  for (std::size_t i = 0; i < nh; ++i) {
    const std::string lhs = random_term(rng, 1, 3);
    const std::size_t lhs_len = (lhs.size() + 1) / 2;
    const std::string rhs = random_term(rng, 1, lhs_len);
    rules.push_back({lhs, rhs});
    spec.hypotheses.push_back({"h" + std::to_string(i + 1), lhs + " = " + rhs});
  }
  auto side = [&]() {
    std::string t = random_term(rng, 1, 4);
    if (!rules.empty() && coin(rng) < 0.7) {
      // Plant a hypothesis pattern so rewriting has something to do.
      const Eq& r = rules[std::uniform_int_distribution<std::size_t>(0, rules.size() - 1)(rng)];
      t = coin(rng) < 0.5 ? r.lhs + " " + t : t + " " + r.lhs;
    }
    return squeeze(t);
  };
  auto equation = [&]() {
    const std::string lhs = side();
    std::string rhs = lhs;
    for (int k = 0; k < 2 && !rules.empty(); ++k) {
      const Eq& r = rules[std::uniform_int_distribution<std::size_t>(0, rules.size() - 1)(rng)];
      if (auto n = rewrite(rhs, r.lhs, r.rhs)) rhs = *n;
    }
    if (coin(rng) < 0.35) rhs = random_term(rng, 1, 3);
    return lhs + " = " + rhs;
  };
  if (!spec.hypotheses.empty() && coin(rng) < 0.1) {
    spec.target = spec.hypotheses.back().statement;
  } else {
    spec.target = equation();
    if (coin(rng) < 0.25) spec.target += " ∧ " + equation();
  }
  return spec;
}

}  // namespace oracle
