#pragma once

// The prover-environment contract: start a theorem, run one tactic against a
// proof state, observe the outcome.

#include <concepts>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "dsprover/core.hpp"

namespace dsprover {

struct TheoremSpec {
  std::string name;
  std::vector<Hypothesis> hypotheses;
  std::string target;

  bool operator==(const TheoremSpec&) const = default;
};

// Dotted names such as `nat.add_comm` are accepted.
inline bool is_theorem_name(std::string_view name) {
  if (name.empty()) return false;
  std::size_t begin = 0;
  while (true) {
    std::size_t dot = name.find('.', begin);
    std::string_view part = name.substr(begin, dot == std::string_view::npos ? dot : dot - begin);
    if (!text::is_identifier(part)) return false;
    if (dot == std::string_view::npos) return true;
    begin = dot + 1;
  }
}

inline Goal root_goal(const TheoremSpec& spec) {
  return Goal{spec.hypotheses, spec.target};
}

// Fatal environment failures. Tactic failures are outcomes, not exceptions.
class EnvFailure : public Error {
 public:
  using Error::Error;
};

class InitError : public EnvFailure {
 public:
  using EnvFailure::EnvFailure;
};

namespace outcome {

struct NewState {
  ProofState state;
};
struct Proved {};
struct TacticError {
  std::string message;
};
struct TacticTimeout {};

}  // namespace outcome

using ApplyOutcome =
    std::variant<outcome::NewState, outcome::Proved, outcome::TacticError, outcome::TacticTimeout>;

inline bool succeeded(const ApplyOutcome& o) {
  return std::holds_alternative<outcome::NewState>(o) || std::holds_alternative<outcome::Proved>(o);
}

inline const ProofState& proved_state() {
  static const ProofState kProved;
  return kProved;
}

// State after a successful outcome.
inline const ProofState& resulting_state(const ApplyOutcome& o) {
  if (const auto* s = std::get_if<outcome::NewState>(&o)) return s->state;
  return proved_state();
}

inline std::string describe(const ApplyOutcome& o) {
  if (const auto* s = std::get_if<outcome::NewState>(&o)) return "new state:\n" + s->state.canonical_text();
  if (std::holds_alternative<outcome::Proved>(o)) return "proved";
  if (const auto* e = std::get_if<outcome::TacticError>(&o)) return "error: " + e->message;
  return "timeout";
}

inline constexpr Duration kDefaultTacticTimeout = std::chrono::seconds(10);

template <class E>
concept ProverEnvironment = requires(E& env, const TheoremSpec& spec, const ProofState& state,
                                     std::string_view tactic, Duration timeout) {
  { env.init(spec) } -> std::same_as<ProofState>;
  { env.run_tactic(state, tactic, timeout) } -> std::same_as<ApplyOutcome>;
};

// Runtime-polymorphic environment, for callers that pick the backend from
// configuration.
class Environment {
 public:
  virtual ~Environment() = default;

  // Throws InitError when the statement is rejected.
  virtual ProofState init(const TheoremSpec& spec) = 0;

  // Acts on the first goal of `state`; the rest are carried over unchanged.
  virtual ApplyOutcome run_tactic(const ProofState& state, std::string_view tactic,
                                  Duration timeout) = 0;

  // Cheap well-formedness check that does not start a session.
  virtual void check(const TheoremSpec& spec) const {
    if (!is_theorem_name(spec.name)) throw InitError("invalid theorem name '" + spec.name + "'");
    try {
      validate(root_goal(spec));
    } catch (const Error& e) {
      throw InitError(e.what());
    }
  }
};

static_assert(ProverEnvironment<Environment>);

}  // namespace dsprover
