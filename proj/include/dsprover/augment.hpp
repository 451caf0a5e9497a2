#pragma once

// Data augmentation by decomposition: multi-premise rewrite/simp tactics are
// split into single-premise tactics and each resulting step becomes a new
// tactic-goal pair.
//
// Rewrite families keep premise order, so the split is textual; the goal text
// for every step after the first is obtained by running the steps. Simp
// families are unordered: single-premise candidates are tried greedily against
// the environment and only the ones that apply are recorded.

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dsprover/core.hpp"
#include "dsprover/dataio.hpp"
#include "dsprover/env.hpp"
#include "dsprover/tactic_syntax.hpp"

namespace dsprover {

class ReplayFailure : public Error {
 public:
  using Error::Error;
};

// init(spec), then each of `replay` in order.
template <ProverEnvironment Env>
ProofState reconstruct_state(Env& env, const TheoremSpec& spec, const std::vector<std::string>& replay,
                             Duration timeout = kDefaultTacticTimeout) {
  ProofState state;
  try {
    state = env.init(spec);
  } catch (const EnvFailure& e) {
    throw ReplayFailure(std::string("cannot start theorem: ") + e.what());
  }
  for (const auto& t : replay) {
    if (state.proved()) throw ReplayFailure("no goals left for '" + t + "'");
    ApplyOutcome out = env.run_tactic(state, t, timeout);
    if (!succeeded(out)) throw ReplayFailure("'" + t + "' no longer applies: " + describe(out));
    state = resulting_state(out);
  }
  return state;
}

inline bool is_simp_family(TacticFamily f) { return !is_ordered_family(f); }

// Binder lines are context some environments do not track. States are
// compared without them and emitted goals get the record's binders back.
inline ProofState without_decls(const ProofState& state) {
  std::vector<Goal> goals = state.goals();
  for (auto& g : goals) {
    std::erase_if(g.hypotheses, [](const Hypothesis& h) { return h.kind == HypothesisKind::kDecl; });
  }
  return ProofState(std::move(goals));
}

inline std::string with_decls(const ProofState& state, const std::vector<Hypothesis>& decls) {
  if (decls.empty()) return state.canonical_text();
  std::vector<Goal> goals = state.goals();
  for (auto& g : goals) {
    std::vector<Hypothesis> hyps;
    for (const auto& d : decls) {
      if (!g.find(d.name)) hyps.push_back(d);
    }
    hyps.insert(hyps.end(), g.hypotheses.begin(), g.hypotheses.end());
    g.hypotheses = std::move(hyps);
  }
  return canonicalize_state(goals);
}

inline std::vector<Hypothesis> decls_of(const std::string& goal_text) {
  std::vector<Hypothesis> out;
  const std::vector<Goal> goals = parse_state_text(goal_text);
  if (goals.empty()) return out;
  for (const auto& h : goals.front().hypotheses) {
    if (h.kind == HypothesisKind::kDecl) out.push_back(h);
  }
  return out;
}

inline bool same_state(const ProofState& a, const ProofState& b) {
  return without_decls(a).canonical_text() == without_decls(b).canonical_text();
}

// Runs `tactics` in order from `state`, pairing each with the goal it was
// applied to. nullopt if any step fails or the goal closes early.
template <ProverEnvironment Env>
std::optional<std::vector<PairRecord>> ground_rewrite_steps(Env& env, const ProofState& start,
                                                            const std::vector<std::string>& tactics,
                                                            const std::string& theorem,
                                                            Duration timeout = kDefaultTacticTimeout,
                                                            const std::vector<Hypothesis>& decls = {}) {
  std::vector<PairRecord> pairs;
  ProofState state = start;
  for (const auto& t : tactics) {
    if (state.proved()) return std::nullopt;
    ApplyOutcome out = env.run_tactic(state, t, timeout);
    if (!succeeded(out)) return std::nullopt;
    pairs.push_back({theorem, with_decls(state, decls), t, Provenance::kRewriteDecomposed});
    state = resulting_state(out);
  }
  return pairs;
}

// Greedy discovery of an order for a simp-family premise list: try each
// remaining single-premise tactic in listed order, keep the first that
// applies, advance, and repeat until nothing applies or the goal closes.
template <ProverEnvironment Env>
std::vector<PairRecord> decompose_simp_at(Env& env, const ProofState& start, const TacticAst& ast,
                                          const std::string& theorem,
                                          Duration timeout = kDefaultTacticTimeout,
                                          const std::vector<Hypothesis>& decls = {}) {
  std::vector<std::string> remaining = single_premise_tactics(ast);
  std::vector<PairRecord> pairs;
  std::vector<ProofState> applied_at;
  ProofState state = start;
  while (!remaining.empty() && !state.proved()) {
    bool advanced = false;
    for (auto it = remaining.begin(); it != remaining.end(); ++it) {
      ApplyOutcome out = env.run_tactic(state, *it, timeout);
      if (!succeeded(out)) continue;
      pairs.push_back({theorem, with_decls(state, decls), *it, Provenance::kSimpValidated});
      applied_at.push_back(state);
      state = resulting_state(out);
      remaining.erase(it);
      advanced = true;
      break;
    }
    if (!advanced) break;
  }
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (!succeeded(env.run_tactic(applied_at[i], pairs[i].tactic, timeout))) {
      throw Error("validated pair did not replay: " + pairs[i].tactic);
    }
  }
  return pairs;
}

// `replay` rebuilds the record's goal from the theorem statement. A single
// premise tactic passes through unchanged.
template <ProverEnvironment Env>
std::vector<PairRecord> decompose_simp_validated(const PairRecord& record, Env& env, const TheoremSpec& spec,
                                                 const std::vector<std::string>& replay,
                                                 Duration timeout = kDefaultTacticTimeout) {
  const std::optional<TacticAst> ast = parse_tactic(record.tactic);
  if (!ast || !is_simp_family(ast->family)) {
    throw Error("decompose_simp_validated: '" + record.tactic + "' is not a simp-family tactic");
  }
  if (ast->premises.size() < 2) return {record};
  const ProofState state = reconstruct_state(env, spec, replay, timeout);
  if (!same_state(state, ProofState::from_text(record.goal))) {
    throw ReplayFailure("replayed state does not match the record's goal");
  }
  return decompose_simp_at(env, state, *ast, record.theorem, timeout, decls_of(record.goal));
}

struct AugmentOptions {
  bool rewrite_only = false;
  Duration tactic_timeout = kDefaultTacticTimeout;
};

struct AugmentStats {
  std::size_t originals = 0;
  std::size_t rewrite_added = 0;
  std::size_t simp_added = 0;
  // Decomposable records whose decomposition could not be produced in full.
  std::size_t skipped = 0;

  bool operator==(const AugmentStats&) const = default;
};

struct AugmentOutput {
  std::vector<PairRecord> records;
  AugmentStats stats;
};

// Originals are kept verbatim and in order; each is followed by its new pairs.
// New pairs already present in the output (same goal and tactic) are dropped.
// Goal states are rebuilt per theorem by treating the theorem's first record
// as the root and replaying the original tactics in file order.
inline AugmentOutput augment_records(const std::vector<PairRecord>& input, Environment* env,
                                     const AugmentOptions& options = {}) {
  AugmentOutput out;
  std::unordered_set<std::string> seen;
  auto key = [](const PairRecord& r) { return r.goal + '\x1f' + r.tactic; };

  // Per-theorem replay cursor; nullopt once replay has broken down.
  std::unordered_map<std::string, std::optional<ProofState>> cursor;
  auto state_for = [&](const PairRecord& r) -> std::optional<ProofState> {
    if (!env) return std::nullopt;
    auto [it, fresh] = cursor.try_emplace(r.theorem);
    try {
      if (fresh) {
        std::vector<Goal> goals = parse_state_text(r.goal);
        if (goals.size() != 1) throw Error("first record is not a single-goal root state");
        TheoremSpec spec{r.theorem.empty() ? "anonymous" : r.theorem, goals[0].hypotheses, goals[0].target};
        it->second = env->init(spec);
      }
      if (!it->second || !same_state(*it->second, ProofState::from_text(r.goal))) {
        it->second.reset();
        return std::nullopt;
      }
    } catch (const Error&) {
      it->second.reset();
      return std::nullopt;
    }
    return it->second;
  };
  auto advance = [&](const PairRecord& r) {
    if (!env) return;
    auto it = cursor.find(r.theorem);
    if (it == cursor.end() || !it->second) return;
    try {
      ApplyOutcome o = env->run_tactic(*it->second, r.tactic, options.tactic_timeout);
      if (succeeded(o)) {
        it->second = resulting_state(o);
      } else {
        it->second.reset();
      }
    } catch (const Error&) {
      it->second.reset();
    }
  };
  auto add = [&](const PairRecord& r, std::size_t& counter) {
    if (seen.insert(key(r)).second) {
      out.records.push_back(r);
      ++counter;
    }
  };

  for (const auto& rec : input) {
    out.records.push_back(rec);
    seen.insert(key(rec));
    ++out.stats.originals;

    std::optional<TacticAst> ast;
    try {
      ast = parse_tactic(rec.tactic);
    } catch (const MalformedBrackets&) {
    }
    const bool decomposable = ast && ast->premises.size() >= 2;
    if (!decomposable || (is_simp_family(ast->family) && (options.rewrite_only || !env))) {
      if (env) {
        state_for(rec);
        advance(rec);
      }
      continue;
    }

    const std::optional<ProofState> state = state_for(rec);
    std::vector<Hypothesis> decls;
    try {
      decls = decls_of(rec.goal);
    } catch (const Error&) {
    }
    if (is_ordered_family(ast->family)) {
      const std::vector<std::string> steps = decompose_rewrite(*ast);
      if (!state) {
        // The first step's goal is the record's own; later goals are unknown.
        add({rec.theorem, rec.goal, steps.front(), Provenance::kRewriteDecomposed}, out.stats.rewrite_added);
        ++out.stats.skipped;
      } else if (auto pairs = ground_rewrite_steps(*env, *state, steps, rec.theorem, options.tactic_timeout, decls)) {
        for (const auto& p : *pairs) add(p, out.stats.rewrite_added);
      } else {
        ++out.stats.skipped;
      }
    } else if (!state) {
      ++out.stats.skipped;
    } else {
      try {
        for (const auto& p : decompose_simp_at(*env, *state, *ast, rec.theorem, options.tactic_timeout, decls)) {
          add(p, out.stats.simp_added);
        }
      } catch (const EnvFailure&) {
        ++out.stats.skipped;
      }
    }
    advance(rec);
  }
  return out;
}

inline AugmentStats augment_dataset(const std::string& in_path, const std::string& out_path, Environment* env,
                                    const AugmentOptions& options = {}) {
  AugmentOutput result = augment_records(read_pairs(in_path), env, options);
  write_pairs(out_path, result.records);
  return result.stats;
}

}  // namespace dsprover
