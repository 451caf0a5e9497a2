#pragma once

// Tactic generators: given a proof-state text, return up to k ranked tactic
// candidates. The built-ins stand in for a trained model.

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <fstream>
#include <memory>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsprover/core.hpp"

namespace dsprover {

struct GeneratorRequest {
  std::string state_text;
  std::size_t k = 1;
};

// Sorted by log_prob descending, texts pairwise distinct, every log_prob <= 0.
struct RankedCandidates {
  std::vector<TacticCandidate> items;
};

class GeneratorError : public Error {
 public:
  using Error::Error;
};

// Stable sort by descending score, drop repeated texts (first wins), keep k.
inline RankedCandidates rank_candidates(std::vector<TacticCandidate> items, std::size_t k) {
  std::stable_sort(items.begin(), items.end(), [](const TacticCandidate& a, const TacticCandidate& b) {
    return a.log_prob > b.log_prob;
  });
  RankedCandidates out;
  std::unordered_set<std::string> seen;
  for (auto& c : items) {
    if (out.items.size() == k) break;
    if (seen.insert(c.text).second) out.items.push_back(std::move(c));
  }
  return out;
}

// Enforced at the boundary between generator and search.
inline void check_candidates(const GeneratorRequest& req, const RankedCandidates& ranked) {
  if (ranked.items.size() > req.k) {
    throw GeneratorError("generator returned " + std::to_string(ranked.items.size()) +
                         " candidates for k = " + std::to_string(req.k));
  }
  std::unordered_set<std::string_view> seen;
  for (std::size_t i = 0; i < ranked.items.size(); ++i) {
    const auto& c = ranked.items[i];
    if (!(c.log_prob <= 0.0)) {
      throw GeneratorError("candidate '" + c.text + "' has log_prob " + std::to_string(c.log_prob) +
                           " > 0");
    }
    if (text::trim(c.text).empty()) throw GeneratorError("empty tactic candidate");
    if (i > 0 && ranked.items[i - 1].log_prob < c.log_prob) {
      throw GeneratorError("candidates are not sorted by log_prob");
    }
    if (!seen.insert(c.text).second) throw GeneratorError("duplicate candidate '" + c.text + "'");
  }
}

template <class G>
concept CandidateGenerator = requires(const G& gen, const GeneratorRequest& req) {
  { gen.generate(req) } -> std::same_as<RankedCandidates>;
};

class TacticGenerator {
 public:
  virtual ~TacticGenerator() = default;
  virtual RankedCandidates generate(const GeneratorRequest& req) const = 0;
};

static_assert(CandidateGenerator<TacticGenerator>);

inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Exact lookup table from state text to ranked candidates.
class ScriptedGenerator final : public TacticGenerator {
 public:
  enum class Mode { kStrict, kLenient };

  using Table = std::unordered_map<std::string, std::vector<TacticCandidate>>;

  explicit ScriptedGenerator(Table table, Mode mode = Mode::kLenient,
                             std::shared_ptr<const TacticGenerator> fallback = nullptr)
      : table_(std::move(table)), mode_(mode), fallback_(std::move(fallback)) {
    for (auto& [state, items] : table_) {
      for (const auto& c : items) {
        if (!is_valid(c)) {
          throw GeneratorError("table entry '" + c.text + "' has log_prob > 0 or empty text");
        }
      }
      const std::size_t n = items.size();
      items = rank_candidates(std::move(items), n).items;
    }
  }

  // One `{"state": ..., "candidates": [{"tactic": ..., "log_prob": ...}]}` per
  // line. Rows for the same state are concatenated.
  static Table load_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeneratorError("cannot open generator table '" + path + "'");
    Table table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (text::trim(line).empty()) continue;
      try {
        const auto row = nlohmann::json::parse(line);
        auto& items = table[row.at("state").get<std::string>()];
        for (const auto& c : row.at("candidates")) {
          TacticCandidate cand{c.at("tactic").get<std::string>(), c.at("log_prob").get<double>()};
          if (!is_valid(cand)) throw GeneratorError("log_prob must be <= 0 and tactic non-empty");
          items.push_back(std::move(cand));
        }
      } catch (const std::exception& e) {
        throw GeneratorError(path + ":" + std::to_string(line_no) + ": " + e.what());
      }
    }
    return table;
  }

  RankedCandidates generate(const GeneratorRequest& req) const override {
    auto it = table_.find(req.state_text);
    if (it == table_.end()) {
      if (fallback_) return fallback_->generate(req);
      if (mode_ == Mode::kStrict) throw GeneratorError("no scripted candidates for state:\n" + req.state_text);
      return {};
    }
    RankedCandidates out;
    const std::size_t n = std::min(req.k, it->second.size());
    out.items.assign(it->second.begin(), it->second.begin() + static_cast<std::ptrdiff_t>(n));
    return out;
  }

  const Table& table() const { return table_; }

 private:
  Table table_;
  Mode mode_;
  std::shared_ptr<const TacticGenerator> fallback_;
};

// Enumerates every tactic shape the simulated environment understands for the
// first goal: refl, assumption, split, rw [h] and simp [h] per hypothesis.
// Rank i scores -0.1 * i.
class HeuristicSimGenerator final : public TacticGenerator {
 public:
  static std::vector<std::string> enumerate(std::string_view state_text) {
    std::vector<std::string> tactics{"refl", "assumption", "split"};
    std::vector<Goal> goals;
    try {
      goals = parse_state_text(state_text);
    } catch (const Error&) {
      return tactics;
    }
    if (goals.empty()) return {};
    std::vector<std::string> names;
    for (const auto& h : goals.front().hypotheses) {
      if (h.kind == HypothesisKind::kProp) names.push_back(h.name);
    }
    for (const auto& n : names) tactics.push_back("rw [" + n + "]");
    for (const auto& n : names) tactics.push_back("simp [" + n + "]");
    return tactics;
  }

  RankedCandidates generate(const GeneratorRequest& req) const override {
    const auto tactics = enumerate(req.state_text);
    RankedCandidates out;
    for (std::size_t i = 0; i < tactics.size() && i < req.k; ++i) {
      out.items.push_back({tactics[i], -0.1 * static_cast<double>(i)});
    }
    return out;
  }
};

// Interleaves syntactically valid but inapplicable tactics into another
// generator's list at `noise_rate`, then re-scores by position. Seeded per
// (seed, state) so identical requests give identical answers.
class NoisyGenerator final : public TacticGenerator {
 public:
  NoisyGenerator(std::shared_ptr<const TacticGenerator> inner, std::uint64_t seed, double noise_rate)
      : inner_(std::move(inner)), seed_(seed), noise_rate_(noise_rate) {
    if (!inner_) throw GeneratorError("noisy generator needs an inner generator");
    if (!(noise_rate_ >= 0.0 && noise_rate_ < 1.0)) {
      throw GeneratorError("noise rate must be in [0, 1)");
    }
  }

  RankedCandidates generate(const GeneratorRequest& req) const override {
    const RankedCandidates base = inner_->generate(req);
    std::mt19937_64 rng(seed_ ^ fnv1a(req.state_text));
    RankedCandidates out;
    std::size_t next_base = 0;
    std::size_t noise_id = 0;
    while (out.items.size() < req.k && next_base < base.items.size()) {
      const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      std::string tactic = u < noise_rate_ ? "rw [nonexistent_" + std::to_string(noise_id++) + "]"
                                           : base.items[next_base++].text;
      out.items.push_back({std::move(tactic), -0.1 * static_cast<double>(out.items.size())});
    }
    return out;
  }

 private:
  std::shared_ptr<const TacticGenerator> inner_;
  std::uint64_t seed_;
  double noise_rate_;
};

}  // namespace dsprover
