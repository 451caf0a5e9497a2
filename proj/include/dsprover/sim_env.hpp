#pragma once

// A self-contained rewrite calculus used in place of a real prover. Terms are
// flat sequences of identifier symbols; propositions are conjunctions of
// equations `lhs = rhs`.
//
// Accepted tactics (on the first goal):
//   refl | rfl                 close `t = t`
//   assumption                 close when a hypothesis is byte-equal to the target
//   split                      `A ∧ B` becomes goals A and B
//   rw/erw [p1, ..., pk] [at h]   rewrite with each premise in turn
//   rwa [...] [at h]           rw, then close by assumption
//   simp/dsimp [only] [...] [at h]  rewrite with all premises to a fixpoint
//   simpa [only] [...]         simp, then the goal must close
//   simp_rw [...] [at h]       one simp fixpoint per premise, in order

#include <algorithm>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "dsprover/core.hpp"
#include "dsprover/env.hpp"
#include "dsprover/tactic_syntax.hpp"

namespace dsprover {

struct SimTerm {
  std::vector<std::string> symbols;

  bool operator==(const SimTerm&) const = default;
};

struct SimEquation {
  SimTerm lhs;
  SimTerm rhs;

  bool operator==(const SimEquation&) const = default;
};

// Conjunction of equations, at least one.
using SimProp = std::vector<SimEquation>;

// Replaces every non-overlapping occurrence of `pattern`, scanning left to
// right. nullopt when there is no occurrence.
inline std::optional<SimTerm> sim_rewrite(const SimTerm& term, const SimTerm& pattern,
                                          const SimTerm& replacement) {
  if (pattern.symbols.empty()) throw Error("sim_rewrite: empty pattern");
  const auto& t = term.symbols;
  const auto& p = pattern.symbols;
  SimTerm out;
  bool found = false;
  std::size_t i = 0;
  while (i < t.size()) {
    if (i + p.size() <= t.size() && std::equal(p.begin(), p.end(), t.begin() + i)) {
      out.symbols.insert(out.symbols.end(), replacement.symbols.begin(), replacement.symbols.end());
      i += p.size();
      found = true;
    } else {
      out.symbols.push_back(t[i++]);
    }
  }
  if (!found) return std::nullopt;
  return out;
}

inline std::string render(const SimTerm& t) {
  std::string out;
  for (std::size_t i = 0; i < t.symbols.size(); ++i) {
    if (i > 0) out += ' ';
    out += t.symbols[i];
  }
  return out;
}

inline std::string render(const SimProp& prop) {
  std::string out;
  for (std::size_t i = 0; i < prop.size(); ++i) {
    if (i > 0) out += " ∧ ";
    out += render(prop[i].lhs) + " = " + render(prop[i].rhs);
  }
  return out;
}

namespace sim_detail {

enum class TokenKind { kSymbol, kEquals, kAnd };

struct Token {
  TokenKind kind;
  std::string text;
};

inline bool is_symbol_byte(unsigned char c) {
  return c >= 0x80 || c == '_' || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9');
}

inline void check_brackets(std::string_view s) {
  int depth = 0;
  bool any = false;
  for (char c : s) {
    if (c == '(' || c == '[' || c == '{') {
      ++depth;
      any = true;
    } else if (c == ')' || c == ']' || c == '}') {
      --depth;
      any = true;
      if (depth < 0) break;
    }
  }
  if (depth != 0) throw Error("unbalanced brackets in '" + std::string(s) + "'");
  if (any) throw Error("brackets are not part of the term grammar in '" + std::string(s) + "'");
}

inline std::vector<Token> tokenize(std::string_view s) {
  check_brackets(s);
  static constexpr std::string_view kDot = "·";
  static constexpr std::string_view kAnd = "∧";
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::string_view rest = s.substr(i);
    if (text::is_space(s[i])) {
      ++i;
    } else if (rest.starts_with(kDot)) {
      i += kDot.size();
    } else if (rest.starts_with(kAnd)) {
      tokens.push_back({TokenKind::kAnd, std::string(kAnd)});
      i += kAnd.size();
    } else if (rest.starts_with("/\\")) {
      tokens.push_back({TokenKind::kAnd, std::string(kAnd)});
      i += 2;
    } else if (s[i] == '=') {
      tokens.push_back({TokenKind::kEquals, "="});
      ++i;
    } else if (is_symbol_byte(static_cast<unsigned char>(s[i])) && !rest.starts_with("⊢")) {
      std::size_t j = i;
      while (j < s.size() && is_symbol_byte(static_cast<unsigned char>(s[j])) &&
             !s.substr(j).starts_with(kDot) && !s.substr(j).starts_with(kAnd) &&
             !s.substr(j).starts_with("⊢")) {
        ++j;
      }
      std::string sym(s.substr(i, j - i));
      if (!text::is_identifier(sym)) throw Error("invalid symbol '" + sym + "'");
      tokens.push_back({TokenKind::kSymbol, std::move(sym)});
      i = j;
    } else {
      std::size_t len = 1;
      const auto lead = static_cast<unsigned char>(s[i]);
      if (lead >= 0xF0) len = 4;
      else if (lead >= 0xE0) len = 3;
      else if (lead >= 0xC0) len = 2;
      throw Error("unexpected symbol '" + std::string(s.substr(i, len)) + "'");
    }
  }
  return tokens;
}

}  // namespace sim_detail

// Throws Error with a readable message on malformed input.
inline SimProp parse_sim_prop(std::string_view s) {
  using sim_detail::TokenKind;
  const auto tokens = sim_detail::tokenize(s);
  if (tokens.empty()) throw Error("empty proposition");
  SimProp prop;
  std::size_t i = 0;
  auto term = [&](const char* where) {
    SimTerm t;
    while (i < tokens.size() && tokens[i].kind == TokenKind::kSymbol) t.symbols.push_back(tokens[i++].text);
    if (t.symbols.empty()) {
      throw Error(std::string("expected a term ") + where + " in '" + std::string(s) + "'");
    }
    return t;
  };
  while (true) {
    SimEquation eq;
    eq.lhs = term("before '='");
    if (i >= tokens.size() || tokens[i].kind != TokenKind::kEquals) {
      throw Error("expected '=' in '" + std::string(s) + "'");
    }
    ++i;
    eq.rhs = term("after '='");
    prop.push_back(std::move(eq));
    if (i == tokens.size()) break;
    if (tokens[i].kind != TokenKind::kAnd) {
      throw Error("unexpected '" + tokens[i].text + "' in '" + std::string(s) + "'");
    }
    ++i;
  }
  return prop;
}

struct SimEnvOptions {
  // Artificial cost per tactic call, standing in for a real prover's latency.
  Duration tactic_latency{};
  std::size_t simp_max_rounds = 32;
  std::size_t max_term_symbols = 256;
};

class SimEnv final : public Environment {
 public:
  SimEnv() = default;
  explicit SimEnv(SimEnvOptions options) : options_(options) {}

  const SimEnvOptions& options() const { return options_; }

  // Binder (decl) lines are dropped: sim symbols are untyped.
  ProofState init(const TheoremSpec& spec) override { return ProofState({normalized_goal(spec)}); }

  void check(const TheoremSpec& spec) const override { (void)normalized_goal(spec); }

  ApplyOutcome run_tactic(const ProofState& state, std::string_view tactic,
                          Duration timeout) override {
    const auto start = Clock::now();
    ApplyOutcome result = apply(state, tactic);
    if (options_.tactic_latency > Duration::zero()) {
      std::this_thread::sleep_for(std::min(options_.tactic_latency, timeout));
    }
    if (Clock::now() - start > timeout) return outcome::TacticTimeout{};
    return result;
  }

  // The tactic semantics without latency or timeout accounting.
  ApplyOutcome apply(const ProofState& state, std::string_view tactic) const {
    try {
      return apply_or_throw(state, tactic);
    } catch (const Error& e) {
      return outcome::TacticError{e.what()};
    }
  }

 private:
  Goal normalized_goal(const TheoremSpec& spec) const {
    if (!is_theorem_name(spec.name)) throw InitError("invalid theorem name '" + spec.name + "'");
    Goal goal;
    for (const auto& h : spec.hypotheses) {
      if (h.kind == HypothesisKind::kDecl) continue;
      Hypothesis norm = h;
      try {
        validate(h);
        norm.statement = render(parse_sim_prop(h.statement));
      } catch (const Error& e) {
        throw InitError("hypothesis " + h.name + ": " + e.what());
      }
      if (goal.find(norm.name)) throw InitError("duplicate hypothesis name '" + h.name + "'");
      goal.hypotheses.push_back(std::move(norm));
    }
    try {
      goal.target = render(parse_sim_prop(spec.target));
    } catch (const Error& e) {
      throw InitError(std::string("target: ") + e.what());
    }
    return goal;
  }

  struct Rule {
    std::string name;
    SimTerm from;
    SimTerm to;
  };

  static bool closable(const SimProp& p) { return p.size() == 1 && p[0].lhs == p[0].rhs; }

  static std::optional<SimProp> rewrite_prop(const SimProp& prop, const Rule& rule) {
    SimProp out = prop;
    bool any = false;
    for (auto& eq : out) {
      for (SimTerm* side : {&eq.lhs, &eq.rhs}) {
        if (auto r = sim_rewrite(*side, rule.from, rule.to)) {
          *side = std::move(*r);
          any = true;
        }
      }
    }
    if (!any) return std::nullopt;
    return out;
  }

  std::size_t symbol_count(const SimProp& p) const {
    std::size_t n = 0;
    for (const auto& eq : p) n += eq.lhs.symbols.size() + eq.rhs.symbols.size();
    return n;
  }

  SimProp simp_fixpoint(SimProp subject, const std::vector<Rule>& rules) const {
    for (std::size_t round = 0; round < options_.simp_max_rounds; ++round) {
      bool changed = false;
      for (const auto& rule : rules) {
        if (auto r = rewrite_prop(subject, rule); r && *r != subject) {
          subject = std::move(*r);
          changed = true;
          if (symbol_count(subject) > options_.max_term_symbols) {
            throw Error("simp: term grew beyond " + std::to_string(options_.max_term_symbols) +
                        " symbols");
          }
        }
      }
      if (!changed) return subject;
    }
    throw Error("simp: no fixpoint within " + std::to_string(options_.simp_max_rounds) + " rounds");
  }

  static ApplyOutcome close_first(const ProofState& state) {
    std::vector<Goal> rest(state.goals().begin() + 1, state.goals().end());
    if (rest.empty()) return outcome::Proved{};
    return outcome::NewState{ProofState(std::move(rest))};
  }

  static ApplyOutcome replace_first(const ProofState& state, std::vector<Goal> replacement) {
    std::vector<Goal> goals = std::move(replacement);
    goals.insert(goals.end(), state.goals().begin() + 1, state.goals().end());
    ProofState next(std::move(goals));
    if (next.canonical_text() == state.canonical_text()) throw Error("tactic made no progress");
    return outcome::NewState{std::move(next)};
  }

  static bool matches_hypothesis(const Goal& goal, const std::string& statement) {
    return std::any_of(goal.hypotheses.begin(), goal.hypotheses.end(), [&](const Hypothesis& h) {
      return h.kind == HypothesisKind::kProp && h.statement == statement;
    });
  }

  static std::vector<Rule> resolve_rules(const Goal& goal, const TacticAst& ast) {
    std::vector<Rule> rules;
    for (const auto& p : ast.premises) {
      if (p.reversed) throw Error("reverse rewriting unsupported");
      const Hypothesis* h = goal.find(p.name);
      if (!h) throw Error("unknown premise '" + p.name + "'");
      SimProp prop = parse_sim_prop(h->statement);
      if (prop.size() != 1) throw Error("premise '" + p.name + "' is not an equation");
      rules.push_back({p.name, std::move(prop[0].lhs), std::move(prop[0].rhs)});
    }
    return rules;
  }

  ApplyOutcome apply_or_throw(const ProofState& state, std::string_view raw) const {
    if (state.proved()) throw Error("no goals");
    const Goal& goal = state.goals().front();
    const SimProp target = parse_sim_prop(goal.target);
    const std::string tactic = text::collapse_spaces(raw);

    if (tactic == "refl" || tactic == "rfl") {
      if (!closable(target)) throw Error("refl failed: sides differ");
      return close_first(state);
    }
    if (tactic == "assumption") {
      if (!matches_hypothesis(goal, goal.target)) throw Error("assumption failed");
      return close_first(state);
    }
    if (tactic == "split") {
      if (target.size() < 2) throw Error("split failed: target is not a conjunction");
      Goal left{goal.hypotheses, render(SimProp{target.front()})};
      Goal right{goal.hypotheses, render(SimProp(target.begin() + 1, target.end()))};
      return replace_first(state, {std::move(left), std::move(right)});
    }

    std::optional<TacticAst> ast;
    try {
      ast = parse_tactic(tactic);
    } catch (const MalformedBrackets& e) {
      throw Error(e.what());
    }
    if (!ast) throw Error("unknown tactic '" + tactic + "'");
    if (ast->trailing) throw Error("unsupported clause '" + *ast->trailing + "'");
    if (ast->family == TacticFamily::kEquivRw || ast->family == TacticFamily::kAssocRw) {
      throw Error(std::string(family_name(ast->family)) + " is not supported here");
    }
    const std::vector<Rule> rules = resolve_rules(goal, *ast);

    // Subject of the rewrite: the target, or hypothesis `at h`.
    std::size_t hyp_index = goal.hypotheses.size();
    if (ast->location) {
      const std::string& loc = *ast->location;
      if (!text::is_identifier(loc)) throw Error("unsupported location '" + loc + "'");
      for (std::size_t i = 0; i < goal.hypotheses.size(); ++i) {
        if (goal.hypotheses[i].kind == HypothesisKind::kProp && goal.hypotheses[i].name == loc) {
          hyp_index = i;
        }
      }
      if (hyp_index == goal.hypotheses.size()) throw Error("unknown hypothesis '" + loc + "'");
      for (const auto& r : rules) {
        if (r.name == loc) throw Error("cannot rewrite hypothesis '" + loc + "' with itself");
      }
    }
    const bool on_target = !ast->location.has_value();
    SimProp subject = on_target ? target : parse_sim_prop(goal.hypotheses[hyp_index].statement);
    const SimProp start = subject;

    // Rewriting may not close the goal before the last premise is used.
    auto guard_early_close = [&](std::size_t i, const SimProp& p) {
      if (on_target && i + 1 < rules.size() && closable(p)) {
        throw Error("goal closed before premise '" + rules[i + 1].name + "' was used");
      }
    };

    switch (ast->family) {
      case TacticFamily::kRw:
      case TacticFamily::kErw:
      case TacticFamily::kRwa:
        for (std::size_t i = 0; i < rules.size(); ++i) {
          auto next = rewrite_prop(subject, rules[i]);
          if (!next) {
            throw Error(std::string(family_name(ast->family)) + " [" + rules[i].name +
                        "]: no occurrence of pattern '" + render(rules[i].from) + "'");
          }
          if (*next == subject) throw Error("rewrite with '" + rules[i].name + "' made no progress");
          subject = std::move(*next);
          guard_early_close(i, subject);
        }
        break;
      case TacticFamily::kSimpRw:
        for (std::size_t i = 0; i < rules.size(); ++i) {
          SimProp next = simp_fixpoint(subject, {rules[i]});
          if (next == subject) throw Error("simp_rw [" + rules[i].name + "] made no progress");
          subject = std::move(next);
          guard_early_close(i, subject);
        }
        break;
      case TacticFamily::kSimp:
      case TacticFamily::kDsimp:
      case TacticFamily::kSimpa:
        subject = simp_fixpoint(subject, rules);
        if (subject == start && ast->family != TacticFamily::kSimpa) {
          throw Error("simp made no progress");
        }
        break;
      default:
        throw Error("unsupported tactic family");
    }

    Goal next_goal = goal;
    if (on_target) {
      next_goal.target = render(subject);
    } else {
      next_goal.hypotheses[hyp_index].statement = render(subject);
    }
    const SimProp next_target = on_target ? subject : target;

    if (on_target && closable(next_target)) return close_first(state);
    if (ast->family == TacticFamily::kRwa || ast->family == TacticFamily::kSimpa) {
      if (closable(next_target) || matches_hypothesis(next_goal, next_goal.target)) {
        return close_first(state);
      }
      throw Error(std::string(family_name(ast->family)) + " failed to close the goal");
    }
    return replace_first(state, {std::move(next_goal)});
  }

  SimEnvOptions options_;
};

static_assert(ProverEnvironment<SimEnv>);

}  // namespace dsprover
