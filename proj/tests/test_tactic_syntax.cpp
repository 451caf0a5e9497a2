#include <gtest/gtest.h>

#include "dsprover/tactic_syntax.hpp"
#include "support/fixtures.hpp"

using namespace dsprover;

TEST(ParseTactic, RewriteList) {
  auto ast = parse_tactic("rw [h1, h2]");
  ASSERT_TRUE(ast);
  EXPECT_EQ(ast->family, TacticFamily::kRw);
  EXPECT_FALSE(ast->only_modifier);
  EXPECT_EQ(ast->premises, (std::vector<Premise>{{false, "h1"}, {false, "h2"}}));
  EXPECT_FALSE(ast->location);
}

TEST(ParseTactic, SimpOnlyAt) {
  auto ast = parse_tactic("simp only [p1, p2] at h1");
  ASSERT_TRUE(ast);
  EXPECT_EQ(ast->family, TacticFamily::kSimp);
  EXPECT_TRUE(ast->only_modifier);
  EXPECT_EQ(ast->premises.size(), 2u);
  EXPECT_EQ(ast->location, "h1");
}

TEST(ParseTactic, NotDecomposable) {
  EXPECT_FALSE(parse_tactic("nlinarith"));
  EXPECT_FALSE(parse_tactic("assumption"));
  EXPECT_FALSE(parse_tactic("rw h1"));
  EXPECT_FALSE(parse_tactic("rw []"));
  EXPECT_FALSE(parse_tactic("rw only [h1, h2]"));
  EXPECT_FALSE(parse_tactic("rw [h1, h2]; simp"));
}

TEST(ParseTactic, NestedPremisesAndArrows) {
  auto ast = parse_tactic("rw [← foo (a, b), bar ⟨x, y⟩, <- baz [1, 2]]");
  ASSERT_TRUE(ast);
  ASSERT_EQ(ast->premises.size(), 3u);
  EXPECT_EQ(ast->premises[0], (Premise{true, "foo (a, b)"}));
  EXPECT_EQ(ast->premises[1], (Premise{false, "bar ⟨x, y⟩"}));
  EXPECT_EQ(ast->premises[2], (Premise{true, "baz [1, 2]"}));
  EXPECT_EQ(render(*ast), "rw [← foo (a, b), bar ⟨x, y⟩, ← baz [1, 2]]");
}

TEST(ParseTactic, MalformedBrackets) {
  EXPECT_THROW(parse_tactic("rw [h1, h2"), MalformedBrackets);
  EXPECT_THROW(parse_tactic("rw [foo (a, b]"), MalformedBrackets);
  EXPECT_THROW(parse_tactic("rw [h1] at h1)"), MalformedBrackets);
}

TEST(ParseTactic, TrailingConfigKept) {
  auto ast = parse_tactic("simp [h1, h2] {contextual := tt}");
  ASSERT_TRUE(ast);
  EXPECT_EQ(ast->trailing, "{contextual := tt}");
  EXPECT_EQ(single_premise_tactics(*ast),
            (std::vector<std::string>{"simp [h1] {contextual := tt}", "simp [h2] {contextual := tt}"}));
}

TEST(ParseTactic, RenderNormalizes) {
  auto ast = parse_tactic("  rw   [h1 ,h2]   at   h3 ");
  ASSERT_TRUE(ast);
  EXPECT_EQ(render(*ast), "rw [h1, h2] at h3");
  EXPECT_EQ(parse_tactic(render(*ast)), ast);
}

TEST(Decompose, Rewrite) {
  EXPECT_EQ(decompose_rewrite(*parse_tactic("rw [h1, h2]")), (std::vector<std::string>{"rw [h1]", "rw [h2]"}));
  EXPECT_EQ(decompose_rewrite(*parse_tactic("erw [p1, p2] at h1")),
            (std::vector<std::string>{"erw [p1] at h1", "erw [p2] at h1"}));
  EXPECT_EQ(decompose_rewrite(*parse_tactic("rw [h1]")), (std::vector<std::string>{"rw [h1]"}));
  EXPECT_EQ(decompose_rewrite(*parse_tactic("rw [← h1, h2]")), (std::vector<std::string>{"rw [← h1]", "rw [h2]"}));
}

TEST(Decompose, RewriteRejectsSimpFamilies) {
  EXPECT_THROW(decompose_rewrite(*parse_tactic("simp [h1, h2]")), Error);
  EXPECT_THROW(decompose_rewrite(*parse_tactic("simpa only [h1, h2] at h3")), Error);
}

class TableRowTest : public ::testing::TestWithParam<fixtures::TableRow> {};

TEST_P(TableRowTest, DecomposesToThreeSinglePremiseTactics) {
  const auto& row = GetParam();
  const auto ast = parse_tactic(row.original);
  ASSERT_TRUE(ast) << row.original;
  EXPECT_EQ(is_ordered_family(ast->family), row.ordered);
  const auto out = row.ordered ? decompose_rewrite(*ast) : single_premise_tactics(*ast);
  EXPECT_EQ(out, row.expected);
  for (const auto& t : out) {
    const auto again = parse_tactic(t);
    ASSERT_TRUE(again) << t;
    EXPECT_EQ(again->premises.size(), 1u);
    EXPECT_EQ(again->family, ast->family);
    EXPECT_EQ(again->only_modifier, ast->only_modifier);
    EXPECT_EQ(again->location, ast->location);
  }
}

INSTANTIATE_TEST_SUITE_P(AllShapes, TableRowTest, ::testing::ValuesIn(fixtures::decomposition_table()),
                         [](const auto& info) {
                           std::string n;
                           for (char c : info.param.original) n += std::isalnum(static_cast<unsigned char>(c)) ? c : '_';
                           return n;
                         });

TEST(Table, HasTwentyFourRows) { EXPECT_EQ(fixtures::decomposition_table().size(), 24u); }
