#pragma once

// Dataset plumbing: tactic-goal pair JSONL, theorem suites, seeded
// theorem-level train/validation/test splits.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "dsprover/core.hpp"
#include "dsprover/env.hpp"

namespace dsprover {

enum class Provenance { kOriginal, kRewriteDecomposed, kSimpValidated };

inline std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kOriginal: return "original";
    case Provenance::kRewriteDecomposed: return "rewrite_decomposed";
    case Provenance::kSimpValidated: return "simp_validated";
  }
  return "?";
}

inline std::optional<Provenance> provenance_from_name(std::string_view s) {
  for (auto p : {Provenance::kOriginal, Provenance::kRewriteDecomposed, Provenance::kSimpValidated}) {
    if (provenance_name(p) == s) return p;
  }
  return std::nullopt;
}

// One tactic-goal training example.
struct PairRecord {
  std::string theorem;
  std::string goal;
  std::string tactic;
  Provenance provenance = Provenance::kOriginal;

  bool operator==(const PairRecord&) const = default;
};

class SchemaError : public Error {
 public:
  SchemaError(std::size_t line, const std::string& reason)
      : Error("line " + std::to_string(line) + ": " + reason), line_(line), reason_(reason) {}

  std::size_t line() const { return line_; }
  const std::string& reason() const { return reason_; }

 private:
  std::size_t line_;
  std::string reason_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

inline nlohmann::ordered_json to_json(const PairRecord& r) {
  nlohmann::ordered_json j;
  if (!r.theorem.empty()) j["theorem"] = r.theorem;
  j["goal"] = r.goal;
  j["tactic"] = r.tactic;
  j["provenance"] = provenance_name(r.provenance);
  return j;
}

inline PairRecord pair_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw SchemaError(line, "expected a JSON object");
  auto text_field = [&](const char* key, bool required) -> std::string {
    if (!j.contains(key)) {
      if (required) throw SchemaError(line, std::string("missing \"") + key + "\"");
      return {};
    }
    if (!j[key].is_string()) throw SchemaError(line, std::string("\"") + key + "\" must be a string");
    std::string v = j[key].get<std::string>();
    if (required && text::trim(v).empty()) throw SchemaError(line, std::string("\"") + key + "\" is empty");
    return v;
  };
  PairRecord r;
  r.theorem = text_field("theorem", false);
  r.goal = text_field("goal", true);
  r.tactic = text_field("tactic", true);
  if (j.contains("provenance")) {
    auto p = provenance_from_name(text_field("provenance", true));
    if (!p) throw SchemaError(line, "unknown provenance '" + j["provenance"].get<std::string>() + "'");
    r.provenance = *p;
  }
  return r;
}

inline std::vector<PairRecord> parse_pairs(std::istream& in) {
  std::vector<PairRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw SchemaError(line_no, "invalid JSON");
    out.push_back(pair_from_json(j, line_no));
  }
  return out;
}

inline std::vector<PairRecord> read_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  return parse_pairs(in);
}

inline void write_pairs(std::ostream& out, const std::vector<PairRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline void write_pairs(const std::string& path, const std::vector<PairRecord>& records) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  write_pairs(out, records);
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---- theorem suites ---------------------------------------------------------

inline nlohmann::ordered_json to_json(const TheoremSpec& spec) {
  nlohmann::ordered_json hyps = nlohmann::ordered_json::array();
  for (const auto& h : spec.hypotheses) {
    nlohmann::ordered_json jh{{"name", h.name}, {"statement", h.statement}};
    if (h.kind == HypothesisKind::kDecl) jh["kind"] = "decl";
    hyps.push_back(std::move(jh));
  }
  return {{"name", spec.name}, {"hypotheses", hyps}, {"target", spec.target}};
}

// Throws Error naming the offending field.
inline TheoremSpec theorem_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error("theorem must be a JSON object");
  auto str = [](const nlohmann::json& o, const char* key) {
    if (!o.contains(key) || !o[key].is_string()) {
      throw Error(std::string("theorem field \"") + key + "\" missing or not a string");
    }
    return o[key].get<std::string>();
  };
  TheoremSpec spec;
  spec.name = str(j, "name");
  spec.target = str(j, "target");
  if (j.contains("hypotheses")) {
    if (!j["hypotheses"].is_array()) throw Error("\"hypotheses\" must be an array");
    for (const auto& h : j["hypotheses"]) {
      if (!h.is_object()) throw Error("hypothesis must be an object");
      Hypothesis hyp{str(h, "name"), str(h, "statement")};
      const bool decl = (h.contains("kind") && h["kind"] == "decl") || hyp.name.find(' ') != std::string::npos;
      if (decl) hyp.kind = HypothesisKind::kDecl;
      spec.hypotheses.push_back(std::move(hyp));
    }
  }
  return spec;
}

// Accepts {"theorems": [...]}, a bare array, a single theorem object, or JSONL.
inline std::vector<TheoremSpec> read_theorems(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  std::vector<TheoremSpec> out;
  nlohmann::json j = nlohmann::json::parse(content, nullptr, false);
  try {
    if (!j.is_discarded()) {
      const nlohmann::json& list = j.is_object() && j.contains("theorems") ? j["theorems"] : j;
      if (list.is_array()) {
        for (const auto& t : list) out.push_back(theorem_from_json(t));
      } else {
        out.push_back(theorem_from_json(list));
      }
      return out;
    }
  } catch (const Error& e) {
    throw IoError(path + ": " + e.what());
  }
  std::istringstream lines(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded()) throw SchemaError(line_no, "invalid JSON in theorem suite");
    try {
      out.push_back(theorem_from_json(row));
    } catch (const Error& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return out;
}

inline void write_theorems(const std::string& path, const std::vector<TheoremSpec>& specs) {
  nlohmann::ordered_json list = nlohmann::ordered_json::array();
  for (const auto& s : specs) list.push_back(to_json(s));
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << nlohmann::ordered_json{{"theorems", list}}.dump(2) << '\n';
}

// ---- splits -------------------------------------------------------------

// `train` is either an absolute count or a fraction of the names left after
// validation and test are carved out.
struct SplitSpec {
  std::variant<std::size_t, double> train = std::size_t{0};
  std::size_t validation = 0;
  std::size_t test = 0;
  std::uint64_t seed = 0;
};

struct Split {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;

  bool operator==(const Split&) const = default;
};

class SpecError : public Error {
 public:
  using Error::Error;
};

inline Split split_theorems(const std::vector<std::string>& names, const SplitSpec& spec) {
  std::unordered_set<std::string> unique(names.begin(), names.end());
  if (unique.size() != names.size()) throw SpecError("theorem names must be unique");
  const std::size_t held_out = spec.validation + spec.test;
  if (held_out > names.size()) {
    throw SpecError("validation + test = " + std::to_string(held_out) + " exceeds corpus size " +
                    std::to_string(names.size()));
  }
  std::size_t train = 0;
  if (const auto* count = std::get_if<std::size_t>(&spec.train)) {
    train = *count;
  } else {
    const double f = std::get<double>(spec.train);
    if (!(f >= 0.0 && f <= 1.0)) throw SpecError("train fraction must be in [0, 1]");
    train = static_cast<std::size_t>(f * static_cast<double>(names.size() - held_out));
  }
  if (train + held_out > names.size()) {
    throw SpecError("split " + std::to_string(train) + "/" + std::to_string(spec.validation) + "/" +
                    std::to_string(spec.test) + " exceeds corpus size " + std::to_string(names.size()));
  }
  std::vector<std::string> shuffled = names;
  std::mt19937_64 rng(spec.seed);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  Split out;
  auto take = [&, pos = std::size_t{0}](std::vector<std::string>& dst, std::size_t n) mutable {
    dst.assign(shuffled.begin() + static_cast<std::ptrdiff_t>(pos),
               shuffled.begin() + static_cast<std::ptrdiff_t>(pos + n));
    pos += n;
  };
  take(out.train, train);
  take(out.validation, spec.validation);
  take(out.test, spec.test);
  return out;
}

inline nlohmann::ordered_json split_manifest(const Split& split, std::uint64_t seed) {
  return {{"train", split.train}, {"validation", split.validation}, {"test", split.test}, {"seed", seed}};
}

}  // namespace dsprover
