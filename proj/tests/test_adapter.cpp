#include <gtest/gtest.h>

#include "dsprover/adapter.hpp"
#include "dsprover/search.hpp"
#include "support/fixtures.hpp"

using namespace dsprover;
using namespace std::chrono_literals;

namespace {

AdapterEnv fake(std::vector<std::string> args = {}) {
  AdapterOptions opts;
  opts.extra_args = std::move(args);
  return AdapterEnv(DSPROVER_FAKE_PROVER, opts);
}

}  // namespace

TEST(Adapter, InitMatchesSimEnv) {
  auto env = fake();
  SimEnv sim;
  EXPECT_EQ(env.init(fixtures::thm1()).canonical_text(), sim.init(fixtures::thm1()).canonical_text());
  EXPECT_TRUE(env.running());
}

TEST(Adapter, RunTacticOutcomes) {
  auto env = fake();
  const ProofState root = env.init(fixtures::thm1());
  const auto next = env.run_tactic(root, "rw [h1, h2]", 10s);
  ASSERT_TRUE(std::holds_alternative<outcome::NewState>(next)) << describe(next);
  EXPECT_EQ(resulting_state(next).goals()[0].target, "z = w");
  EXPECT_TRUE(std::holds_alternative<outcome::Proved>(env.run_tactic(resulting_state(next), "assumption", 10s)));
  const auto err = env.run_tactic(root, "rw [h3]", 10s);
  ASSERT_TRUE(std::holds_alternative<outcome::TacticError>(err));
  EXPECT_NE(std::get<outcome::TacticError>(err).message.find("no occurrence"), std::string::npos);
}

TEST(Adapter, InitErrorFromProver) {
  auto env = fake();
  // Passes structural checks; the prover rejects the term.
  EXPECT_THROW(env.init({"t", {}, "a = (b"}), InitError);
}

TEST(Adapter, UnknownStateRejected) {
  auto env = fake();
  env.init(fixtures::thm1());
  try {
    env.run_tactic(ProofState::from_text("|- q = r"), "refl", 1s);
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_EQ(e.kind(), AdapterError::Kind::kUnknownState);
  }
}

TEST(Adapter, HungTacticTimesOutAndRestarts) {
  auto env = fake();
  const ProofState root = env.init(fixtures::thm1());
  const auto mid = resulting_state(env.run_tactic(root, "rw [h1]", 10s));
  const auto t0 = Clock::now();
  const auto out = env.run_tactic(mid, "sleep 5000", 300ms);
  const auto took = Clock::now() - t0;
  EXPECT_TRUE(std::holds_alternative<outcome::TacticTimeout>(out));
  EXPECT_GE(took, 300ms);
  EXPECT_LT(took, 2s);
  EXPECT_FALSE(env.running());
  // The intermediate state is rebuilt in a fresh process.
  const auto after = env.run_tactic(mid, "rw [h2]", 10s);
  ASSERT_TRUE(std::holds_alternative<outcome::NewState>(after)) << describe(after);
  EXPECT_EQ(resulting_state(after).goals()[0].target, "z = w");
  EXPECT_EQ(env.restarts(), 1u);
}

TEST(Adapter, ProverReportedTimeoutKeepsProcess) {
  auto env = fake({"--self-timeout"});
  const ProofState root = env.init(fixtures::thm1());
  EXPECT_TRUE(std::holds_alternative<outcome::TacticTimeout>(env.run_tactic(root, "sleep 5000", 200ms)));
  EXPECT_TRUE(env.running());
  EXPECT_EQ(env.restarts(), 0u);
}

TEST(Adapter, GarbageReplyIsProtocolViolation) {
  auto env = fake();
  const ProofState root = env.init(fixtures::thm1());
  try {
    env.run_tactic(root, "garbage", 5s);
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_EQ(e.kind(), AdapterError::Kind::kProtocolViolation);
  }
  EXPECT_TRUE(succeeded(env.run_tactic(root, "rw [h1]", 5s)));
}

TEST(Adapter, CrashIsProcessDead) {
  auto env = fake();
  const ProofState root = env.init(fixtures::thm1());
  try {
    env.run_tactic(root, "crash", 5s);
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_EQ(e.kind(), AdapterError::Kind::kProcessDead);
  }
  EXPECT_FALSE(env.running());
  EXPECT_TRUE(succeeded(env.run_tactic(root, "rw [h1]", 5s)));
}

TEST(Adapter, MissingExecutable) {
  AdapterEnv env("/nonexistent/prover");
  try {
    env.init(fixtures::thm1());
    FAIL();
  } catch (const AdapterError& e) {
    EXPECT_TRUE(e.kind() == AdapterError::Kind::kSpawnFailed || e.kind() == AdapterError::Kind::kProcessDead);
  }
}

TEST(Adapter, ShutdownExitsCleanly) {
  auto env = fake();
  env.init(fixtures::thm1());
  EXPECT_EQ(env.shutdown_and_wait(), 0);
  EXPECT_FALSE(env.running());
}

TEST(Adapter, SearchThroughProcess) {
  auto env = fake();
  auto gen = ScriptedGenerator(ScriptedGenerator::load_table(fixtures::data_path("thm1_table.jsonl")));
  SearchConfig cfg;
  cfg.total_time = 10s;
  cfg.per_tactic_timeout = 2s;
  const auto out = prove(fixtures::thm1(), env, gen, cfg);
  ASSERT_TRUE(std::holds_alternative<Proved>(out.result)) << status_name(out.result);
  EXPECT_EQ(std::get<Proved>(out.result).tactics, (std::vector<std::string>{"rw [h1, h2]", "assumption"}));
}

TEST(Adapter, CrashDuringSearchIsEnvironmentError) {
  auto env = fake();
  ScriptedGenerator gen({{fixtures::kThm1Root, {{"crash", -0.1}}}});
  SearchConfig cfg;
  cfg.total_time = 10s;
  cfg.per_tactic_timeout = 2s;
  const auto out = prove(fixtures::thm1(), env, gen, cfg);
  EXPECT_TRUE(std::holds_alternative<EnvironmentError>(out.result)) << status_name(out.result);
}
