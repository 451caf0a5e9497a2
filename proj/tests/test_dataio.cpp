#include <gtest/gtest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "dsprover/dataio.hpp"
#include "support/fixtures.hpp"

using namespace dsprover;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string tmp(const std::string& name) { return ::testing::TempDir() + name; }

std::vector<std::string> names(std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back("thm" + std::to_string(i));
  return out;
}

}  // namespace

TEST(Pairs, RoundTripIsByteStable) {
  const auto records = read_pairs(fixtures::data_path("thm1_pairs.jsonl"));
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].tactic, "rw [h1, h2]");
  EXPECT_EQ(records[1].provenance, Provenance::kOriginal);
  write_pairs(tmp("once.jsonl"), records);
  write_pairs(tmp("twice.jsonl"), read_pairs(tmp("once.jsonl")));
  EXPECT_EQ(slurp(tmp("once.jsonl")), slurp(tmp("twice.jsonl")));
  EXPECT_EQ(read_pairs(tmp("twice.jsonl")), records);
}

TEST(Pairs, CompactOneObjectPerLine) {
  std::ostringstream out;
  write_pairs(out, {{"", "|- a = a", "refl", Provenance::kSimpValidated}});
  EXPECT_EQ(out.str(), "{\"goal\":\"|- a = a\",\"tactic\":\"refl\",\"provenance\":\"simp_validated\"}\n");
}

TEST(Pairs, MissingTacticReportsLine) {
  std::istringstream in("{\"goal\": \"|- a = a\", \"tactic\": \"refl\"}\n\n{\"goal\": \"|- a = a\"}\n");
  try {
    parse_pairs(in);
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(e.reason().find("tactic"), std::string::npos);
  }
}

TEST(Pairs, OtherSchemaErrors) {
  auto parse = [](const std::string& s) {
    std::istringstream in(s);
    return parse_pairs(in);
  };
  EXPECT_THROW(parse("not json\n"), SchemaError);
  EXPECT_THROW(parse("[1, 2]\n"), SchemaError);
  EXPECT_THROW(parse("{\"goal\": 3, \"tactic\": \"x\"}\n"), SchemaError);
  EXPECT_THROW(parse("{\"goal\": \"g\", \"tactic\": \"  \"}\n"), SchemaError);
  EXPECT_THROW(parse("{\"goal\": \"g\", \"tactic\": \"t\", \"provenance\": \"magic\"}\n"), SchemaError);
}

TEST(Pairs, EmptyFileAndMissingFile) {
  std::ofstream(tmp("empty.jsonl")).close();
  EXPECT_TRUE(read_pairs(tmp("empty.jsonl")).empty());
  EXPECT_THROW(read_pairs("/nonexistent/pairs.jsonl"), IoError);
  EXPECT_THROW(write_pairs("/nonexistent/dir/out.jsonl", {}), IoError);
}

TEST(Theorems, FormatsAndRoundTrip) {
  const auto one = read_theorems(fixtures::data_path("thm1.json"));
  ASSERT_EQ(one.size(), 1u);
  EXPECT_EQ(one[0], fixtures::thm1());
  const std::vector<TheoremSpec> suite{fixtures::thm1(), fixtures::simp_order_theorem()};
  write_theorems(tmp("suite.json"), suite);
  EXPECT_EQ(read_theorems(tmp("suite.json")), suite);
  std::ofstream(tmp("suite.jsonl")) << to_json(suite[0]).dump() << "\n\n" << to_json(suite[1]).dump() << "\n";
  EXPECT_EQ(read_theorems(tmp("suite.jsonl")), suite);
}

TEST(Theorems, BadFields) {
  EXPECT_THROW(theorem_from_json(nlohmann::json{{"name", "t"}}), Error);
  EXPECT_THROW(theorem_from_json(nlohmann::json{{"name", "t"}, {"target", "a = a"}, {"hypotheses", 3}}), Error);
  const auto decl = theorem_from_json(nlohmann::json::parse(
      R"({"name":"t","target":"a = a","hypotheses":[{"name":"a b","statement":"nat"}]})"));
  EXPECT_EQ(decl.hypotheses[0].kind, HypothesisKind::kDecl);
}

TEST(Split, Deterministic) {
  const SplitSpec spec{std::size_t{8}, 1, 1, 7};
  const auto a = split_theorems(names(10), spec);
  EXPECT_EQ(a, split_theorems(names(10), spec));
  EXPECT_EQ(a.train.size(), 8u);
  EXPECT_EQ(a.validation.size(), 1u);
  EXPECT_EQ(a.test.size(), 1u);
  EXPECT_NE(a, split_theorems(names(10), SplitSpec{std::size_t{8}, 1, 1, 8}));
}

TEST(Split, TooLarge) {
  EXPECT_THROW(split_theorems(names(9), SplitSpec{std::size_t{8}, 1, 1, 7}), SpecError);
  EXPECT_THROW(split_theorems(names(9), SplitSpec{std::size_t{0}, 5, 5, 7}), SpecError);
  EXPECT_THROW(split_theorems({"a", "a"}, SplitSpec{std::size_t{1}, 0, 0, 0}), SpecError);
  EXPECT_THROW(split_theorems(names(4), SplitSpec{1.5, 0, 0, 0}), SpecError);
}

TEST(Split, FullScaleShape) {
  const auto out = split_theorems(names(98508), SplitSpec{std::size_t{96508}, 1000, 1000, 1});
  EXPECT_EQ(out.train.size(), 96508u);
  EXPECT_EQ(out.validation.size(), 1000u);
  EXPECT_EQ(out.test.size(), 1000u);
}

TEST(Split, DisjointAndCovering) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto out = split_theorems(names(40), SplitSpec{0.5, 5, 7, seed});
    EXPECT_EQ(out.train.size(), 14u);
    std::set<std::string> all;
    for (const auto* part : {&out.train, &out.validation, &out.test}) all.insert(part->begin(), part->end());
    EXPECT_EQ(all.size(), out.train.size() + out.validation.size() + out.test.size());
  }
}

TEST(Split, Manifest) {
  const auto out = split_theorems(names(3), SplitSpec{std::size_t{1}, 1, 1, 3});
  const auto j = split_manifest(out, 3);
  EXPECT_EQ(j["seed"], 3);
  EXPECT_EQ(j["train"].size(), 1u);
  EXPECT_EQ(j.begin().key(), "train");
}
