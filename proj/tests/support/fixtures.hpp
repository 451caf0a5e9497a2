#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "dsprover/dsprover.hpp"
#include "support/oracles.hpp"

#ifndef DSPROVER_TEST_DATA
#define DSPROVER_TEST_DATA "tests/data"
#endif

namespace fixtures {

using namespace dsprover;

inline std::string data_path(const std::string& name) { return std::string(DSPROVER_TEST_DATA) + "/" + name; }

inline TheoremSpec thm1() {
  return {"thm1", {{"h1", "x = y"}, {"h2", "y = z"}, {"h3", "z = w"}}, "x = w"};
}

inline const std::string kThm1Root = "h1: x = y\nh2: y = z\nh3: z = w\n|- x = w";

// One row per shape of the decomposition table, with premises p1, p2, p3.
struct TableRow {
  std::string original;
  std::vector<std::string> expected;
  bool ordered;
};

inline std::vector<TableRow> decomposition_table() {
  std::vector<TableRow> rows;
  auto add = [&](const std::string& fam, bool only, bool at, bool ordered) {
    const std::string head = fam + (only ? " only" : "");
    const std::string tail = at ? " at h1" : "";
    TableRow row{head + " [p1, p2, p3]" + tail, {}, ordered};
    for (const char* p : {"p1", "p2", "p3"}) row.expected.push_back(head + " [" + p + "]" + tail);
    rows.push_back(std::move(row));
  };
  for (const char* fam : {"rw", "erw", "rwa", "equiv_rw", "assoc_rw", "simp_rw"}) {
    add(fam, false, false, true);
    add(fam, false, true, true);
  }
  for (const char* fam : {"simp", "dsimp", "simpa"}) {
    for (bool only : {false, true}) {
      add(fam, only, false, false);
      add(fam, only, true, false);
    }
  }
  return rows;
}

// Premise order has to be discovered: listed first, h2 only applies after h1.
inline TheoremSpec simp_order_theorem() {
  return {"simp_order", {{"h1", "a = x"}, {"h2", "x b = c"}}, "a b = c"};
}
inline const std::string kSimpOrderTactic = "simp [h2, h1]";

// Three premises, discovered order h3, h1, h2.
inline TheoremSpec simp_order3_theorem() {
  return {"simp_order3", {{"h1", "p = q"}, {"h2", "q r = s"}, {"h3", "u = p r"}}, "u t = s t"};
}
inline const std::string kSimpOrder3Tactic = "simp [h1, h2, h3]";

// Each premise alone leaves an open goal that simpa cannot close.
inline TheoremSpec simpa_joint_theorem() {
  return {"simpa_joint", {{"h1", "a = d"}, {"h2", "d b = c"}}, "a b t = c t"};
}
inline const std::string kSimpaJointTactic = "simpa [h1, h2]";

// Hypotheses that only ever grow the target; the target is unreachable.
inline TheoremSpec growth_theorem(std::mt19937_64& rng, const std::string& name, std::size_t hyps = 8) {
  TheoremSpec spec;
  spec.name = name;
  const std::string syms = "abcd";
  std::uniform_int_distribution<std::size_t> pick(0, syms.size() - 1);
  std::vector<std::string> statements;
  while (statements.size() < hyps) {
    const std::string s(1, syms[pick(rng)]);
    const std::string t(1, syms[pick(rng)]);
    const std::string st = (rng() & 1) ? s + " = " + s + " " + t : s + " = " + t + " " + s;
    if (std::find(statements.begin(), statements.end(), st) == statements.end()) statements.push_back(st);
  }
  for (std::size_t i = 0; i < statements.size(); ++i) {
    spec.hypotheses.push_back({"h" + std::to_string(i + 1), statements[i]});
  }
  spec.target = "a b c d = e";
  return spec;
}

// Random bounded theorems that the exhaustive oracle proves within `max_depth`.
inline std::vector<TheoremSpec> provable_suite(std::uint64_t seed, std::size_t count, std::size_t max_depth) {
  std::mt19937_64 rng(seed);
  std::vector<TheoremSpec> out;
  for (std::size_t i = 0; out.size() < count; ++i) {
    TheoremSpec spec = oracle::random_bounded_theorem(rng, "easy_" + std::to_string(i));
    const auto res = oracle::bfs_prove(spec, 20000);
    if (res.proved && res.depth <= max_depth) out.push_back(std::move(spec));
  }
  return out;
}

// Mostly quick proofs plus theorems that can only time out.
inline std::vector<TheoremSpec> bench_suite(std::uint64_t seed, std::size_t total = 50, std::size_t hard = 10) {
  std::vector<TheoremSpec> suite = provable_suite(seed, total - hard, 4);
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (std::size_t i = 0; i < hard; ++i) suite.push_back(growth_theorem(rng, "hard_" + std::to_string(i)));
  return suite;
}

struct RwCase {
  TheoremSpec spec;
  std::vector<std::string> premises;

  std::string tactic() const {
    std::string t = "rw [";
    for (std::size_t i = 0; i < premises.size(); ++i) t += (i ? ", " : "") + premises[i];
    return t + "]";
  }
};

// A state with 2 to 4 equations and a target seeded with their left-hand
// sides, plus a 2 or 3 premise list drawn from them. The rewrite may fail.
inline RwCase random_rw_case(std::mt19937_64& rng, const std::string& name = "rw_case") {
  RwCase c;
  c.spec.name = name;
  std::uniform_int_distribution<std::size_t> nh(2, 4);
  const std::size_t hyps = nh(rng);
  std::vector<std::string> lhs;
  for (std::size_t i = 0; i < hyps; ++i) {
    lhs.push_back(oracle::random_term(rng, 1, 2, "abcdef"));
    c.spec.hypotheses.push_back(
        {"h" + std::to_string(i + 1), lhs.back() + " = " + oracle::random_term(rng, 1, 3, "abcdef")});
  }
  std::vector<std::size_t> order(hyps);
  for (std::size_t i = 0; i < hyps; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  const std::size_t k = std::uniform_int_distribution<std::size_t>(2, std::min<std::size_t>(3, hyps))(rng);
  std::string left = oracle::random_term(rng, 0, 2, "abcdef");
  for (std::size_t i = 0; i < k; ++i) {
    c.premises.push_back(c.spec.hypotheses[order[i]].name);
    left += " " + lhs[order[i]] + " " + oracle::random_term(rng, 0, 1, "abcdef");
  }
  c.spec.target = oracle::squeeze(left) + " = " + oracle::random_term(rng, 1, 4, "abcdefg");
  return c;
}

}  // namespace fixtures
