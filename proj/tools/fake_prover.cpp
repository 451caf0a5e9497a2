// Reference prover process for the adapter stdio protocol. Tactic semantics
// come from the simulated rewrite calculus; a few extra tactics exercise the
// failure paths:
//
//   sleep <ms>   block for <ms> milliseconds, ignoring the timeout (a hung prover)
//   garbage      reply with a line that is not JSON
//   crash        exit with status 3 without replying
//
// Flags:
//   --self-timeout   `sleep` honours timeout_ms and reports {"timeout": true}
//   --latency-ms N   add N ms to every tactic

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsprover/sim_env.hpp"

namespace {

using nlohmann::json;
using namespace dsprover;

void reply(const json& j) { std::cout << j.dump() << '\n' << std::flush; }

void fail(const std::string& message, bool timeout = false) {
  reply({{"ok", false}, {"error", message}, {"timeout", timeout}});
}

}  // namespace

int main(int argc, char** argv) {
  bool self_timeout = false;
  long latency_ms = 0;
  for (int i = 1; i < argc; ++i) {
    std::string arg = argv[i];
    if (arg == "--self-timeout") {
      self_timeout = true;
    } else if (arg == "--latency-ms" && i + 1 < argc) {
      latency_ms = std::strtol(argv[++i], nullptr, 10);
    } else {
      std::cerr << "fake_prover: unknown argument " << arg << '\n';
      return 2;
    }
  }

  SimEnv env;
  std::vector<ProofState> states;
  std::string line;
  while (std::getline(std::cin, line)) {
    json req = json::parse(line, nullptr, false);
    if (req.is_discarded() || !req.is_object() || !req.contains("cmd")) {
      fail("bad request");
      continue;
    }
    const std::string cmd = req.value("cmd", "");
    if (cmd == "shutdown") return 0;

    if (cmd == "init") {
      try {
        TheoremSpec spec;
        spec.name = req.at("name").get<std::string>();
        spec.target = req.at("target").get<std::string>();
        for (const auto& h : req.at("hypotheses")) {
          Hypothesis hyp{h.at("name").get<std::string>(), h.at("statement").get<std::string>()};
          if (hyp.name.find(' ') != std::string::npos) hyp.kind = HypothesisKind::kDecl;
          spec.hypotheses.push_back(std::move(hyp));
        }
        states = {env.init(spec)};
        reply({{"ok", true}, {"state_id", 0}, {"state_text", states[0].canonical_text()}});
      } catch (const std::exception& e) {
        fail(e.what());
      }
      continue;
    }

    if (cmd != "run_tac") {
      fail("unknown command '" + cmd + "'");
      continue;
    }
    const long id = req.value("state_id", -1L);
    const std::string tactic = req.value("tactic", "");
    const long timeout_ms = req.value("timeout_ms", 10000L);
    if (id < 0 || static_cast<std::size_t>(id) >= states.size()) {
      fail("unknown state_id " + std::to_string(id));
      continue;
    }
    if (latency_ms > 0) std::this_thread::sleep_for(std::chrono::milliseconds(latency_ms));

    if (tactic.rfind("sleep ", 0) == 0) {
      const long ms = std::strtol(tactic.c_str() + 6, nullptr, 10);
      if (self_timeout && ms > timeout_ms) {
        std::this_thread::sleep_for(std::chrono::milliseconds(timeout_ms));
        fail("tactic timed out", true);
      } else {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
        fail("slept " + std::to_string(ms) + " ms");
      }
      continue;
    }
    if (tactic == "garbage") {
      std::cout << "this is not json\n" << std::flush;
      continue;
    }
    if (tactic == "crash") return 3;

    const ApplyOutcome out =
        env.run_tactic(states[static_cast<std::size_t>(id)], tactic, std::chrono::milliseconds(timeout_ms));
    if (const auto* s = std::get_if<outcome::NewState>(&out)) {
      states.push_back(s->state);
      reply({{"ok", true},
             {"state_id", states.size() - 1},
             {"state_text", s->state.canonical_text()},
             {"proved", false}});
    } else if (std::holds_alternative<outcome::Proved>(out)) {
      reply({{"ok", true}, {"proved", true}});
    } else if (const auto* e = std::get_if<outcome::TacticError>(&out)) {
      fail(e->message);
    } else {
      fail("tactic timed out", true);
    }
  }
  return 0;
}
