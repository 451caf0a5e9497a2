#pragma once

// Parser and printer for the premise-list tactic shapes
//
//   <family> [only] [p1, ..., pn] [at h] [trailing]
//
// for the rewrite families (rw, erw, rwa, equiv_rw, assoc_rw, simp_rw) and the
// simplification families (simp, dsimp, simpa).

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dsprover/core.hpp"

namespace dsprover {

enum class TacticFamily { kRw, kErw, kRwa, kEquivRw, kAssocRw, kSimpRw, kSimp, kDsimp, kSimpa };

inline constexpr std::array<std::pair<TacticFamily, std::string_view>, 9> kFamilyNames{{
    {TacticFamily::kRw, "rw"},
    {TacticFamily::kErw, "erw"},
    {TacticFamily::kRwa, "rwa"},
    {TacticFamily::kEquivRw, "equiv_rw"},
    {TacticFamily::kAssocRw, "assoc_rw"},
    {TacticFamily::kSimpRw, "simp_rw"},
    {TacticFamily::kSimp, "simp"},
    {TacticFamily::kDsimp, "dsimp"},
    {TacticFamily::kSimpa, "simpa"},
}};

inline std::string_view family_name(TacticFamily f) {
  for (const auto& [family, name] : kFamilyNames) {
    if (family == f) return name;
  }
  return "?";
}

inline std::optional<TacticFamily> family_from_name(std::string_view name) {
  for (const auto& [family, n] : kFamilyNames) {
    if (n == name) return family;
  }
  return std::nullopt;
}

// Premise order is significant for these; decomposition is a textual split.
inline bool is_ordered_family(TacticFamily f) {
  switch (f) {
    case TacticFamily::kSimp:
    case TacticFamily::kDsimp:
    case TacticFamily::kSimpa:
      return false;
    default:
      return true;
  }
}

inline bool accepts_only_modifier(TacticFamily f) { return !is_ordered_family(f); }

class MalformedBrackets : public Error {
 public:
  using Error::Error;
};

struct Premise {
  bool reversed = false;
  std::string name;

  bool operator==(const Premise&) const = default;
};

struct TacticAst {
  TacticFamily family = TacticFamily::kRw;
  bool only_modifier = false;
  std::vector<Premise> premises;
  std::optional<std::string> location;
  std::optional<std::string> trailing;

  bool operator==(const TacticAst&) const = default;
};

namespace detail {

inline constexpr std::string_view kLeftAngle = "⟨";
inline constexpr std::string_view kRightAngle = "⟩";

// Returns the closing char for an opener at s[i] (and its byte width), or 0.
inline char opener_at(std::string_view s, std::size_t i, std::size_t& width) {
  width = 1;
  switch (s[i]) {
    case '[': return ']';
    case '(': return ')';
    case '{': return '}';
    default: break;
  }
  if (s.substr(i).starts_with(kLeftAngle)) {
    width = kLeftAngle.size();
    return '>';  // stands for ⟩
  }
  return 0;
}

inline char closer_at(std::string_view s, std::size_t i, std::size_t& width) {
  width = 1;
  switch (s[i]) {
    case ']':
    case ')':
    case '}':
      return s[i];
    default: break;
  }
  if (s.substr(i).starts_with(kRightAngle)) {
    width = kRightAngle.size();
    return '>';
  }
  return 0;
}

// Walks `s` tracking nesting. `on_top_level(i)` is called for every byte
// position at depth zero. Returns the index just past the bracket closing the
// opener at `start` when `start` is given, or s.size() when the whole string is
// balanced.
template <class F>
std::size_t scan_balanced(std::string_view s, std::size_t start, bool stop_at_close,
                          F&& on_top_level) {
  std::vector<char> stack;
  std::size_t i = start;
  while (i < s.size()) {
    std::size_t width = 1;
    if (char close = opener_at(s, i, width)) {
      stack.push_back(close);
      i += width;
      continue;
    }
    if (char close = closer_at(s, i, width)) {
      if (stack.empty() || stack.back() != close) {
        throw MalformedBrackets("unbalanced brackets in '" + std::string(s) + "'");
      }
      stack.pop_back();
      i += width;
      if (stop_at_close && stack.empty()) return i;
      continue;
    }
    if (stack.empty() || (stop_at_close && stack.size() == 1)) on_top_level(i);
    ++i;
  }
  if (!stack.empty()) {
    throw MalformedBrackets("unbalanced brackets in '" + std::string(s) + "'");
  }
  return s.size();
}

inline bool is_location_token(std::string_view tok) {
  return text::is_identifier(tok) || tok == "⊢" || tok == "|-" || tok == "*";
}

}  // namespace detail

inline std::vector<std::string> split_top_level_commas(std::string_view body) {
  std::vector<std::string> parts;
  std::size_t begin = 0;
  detail::scan_balanced(body, 0, false, [&](std::size_t i) {
    if (body[i] == ',') {
      parts.emplace_back(body.substr(begin, i - begin));
      begin = i + 1;
    }
  });
  parts.emplace_back(body.substr(begin));
  return parts;
}

inline Premise parse_premise(std::string_view raw) {
  Premise p;
  std::string_view s = text::trim(raw);
  if (s.starts_with("←")) {
    p.reversed = true;
    s.remove_prefix(std::string_view("←").size());
  } else if (s.starts_with("<-")) {
    p.reversed = true;
    s.remove_prefix(2);
  }
  p.name = text::collapse_spaces(s);
  return p;
}

// nullopt means "not one of the decomposable shapes".
inline std::optional<TacticAst> parse_tactic(std::string_view input) {
  std::string_view s = text::trim(input);
  std::size_t i = 0;
  while (i < s.size() && ((s[i] >= 'a' && s[i] <= 'z') || s[i] == '_')) ++i;
  auto family = family_from_name(s.substr(0, i));
  if (!family) return std::nullopt;
  if (i < s.size() && !text::is_space(s[i]) && s[i] != '[') return std::nullopt;

  TacticAst ast;
  ast.family = *family;
  std::string_view rest = text::trim(s.substr(i));
  if (rest.starts_with("only") && (rest.size() == 4 || text::is_space(rest[4]) || rest[4] == '[')) {
    if (!accepts_only_modifier(ast.family)) return std::nullopt;
    ast.only_modifier = true;
    rest = text::trim(rest.substr(4));
  }
  if (!rest.starts_with("[")) return std::nullopt;

  const std::size_t close = detail::scan_balanced(rest, 0, true, [](std::size_t) {});
  std::string_view body = rest.substr(1, close - 2);
  if (text::trim(body).empty()) return std::nullopt;
  for (const auto& part : split_top_level_commas(body)) {
    Premise p = parse_premise(part);
    if (p.name.empty()) return std::nullopt;
    ast.premises.push_back(std::move(p));
  }

  detail::scan_balanced(rest.substr(close), 0, false, [](std::size_t) {});
  std::vector<std::string> words = text::split_words(rest.substr(close));
  std::size_t w = 0;
  if (w < words.size() && words[w] == "at") {
    ++w;
    std::string loc;
    while (w < words.size() && detail::is_location_token(words[w])) {
      if (!loc.empty()) loc += ' ';
      loc += words[w++];
    }
    if (loc.empty()) return std::nullopt;
    ast.location = std::move(loc);
  }
  if (w < words.size()) {
    std::string trailing;
    for (; w < words.size(); ++w) {
      if (!trailing.empty()) trailing += ' ';
      trailing += words[w];
    }
    bool sequenced = false;
    detail::scan_balanced(trailing, 0, false, [&](std::size_t k) {
      if (trailing[k] == ';' || trailing[k] == ',' || trailing[k] == '|') sequenced = true;
    });
    if (sequenced) return std::nullopt;
    ast.trailing = std::move(trailing);
  }
  return ast;
}

inline std::string render_premise(const Premise& p) {
  return p.reversed ? "← " + p.name : p.name;
}

inline std::string render(const TacticAst& ast) {
  std::string out(family_name(ast.family));
  if (ast.only_modifier) out += " only";
  out += " [";
  for (std::size_t i = 0; i < ast.premises.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_premise(ast.premises[i]);
  }
  out += ']';
  if (ast.location) out += " at " + *ast.location;
  if (ast.trailing) out += " " + *ast.trailing;
  return out;
}

// One tactic per premise, in listed order, keeping family, `only`, `at` and
// any trailing clause.
inline std::vector<std::string> single_premise_tactics(const TacticAst& ast) {
  std::vector<std::string> out;
  out.reserve(ast.premises.size());
  for (const auto& p : ast.premises) {
    TacticAst one = ast;
    one.premises = {p};
    out.push_back(render(one));
  }
  return out;
}

inline std::vector<std::string> decompose_rewrite(const TacticAst& ast) {
  if (!is_ordered_family(ast.family)) {
    throw Error("decompose_rewrite: '" + std::string(family_name(ast.family)) +
                "' premises are unordered; use the validated simp decomposition");
  }
  if (ast.premises.empty()) throw Error("decompose_rewrite: empty premise list");
  return single_premise_tactics(ast);
}

}  // namespace dsprover
