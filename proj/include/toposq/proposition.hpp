#pragma once

// Proposition expressions over a scenario.
//
//   expr  := or ( ('⇒' | '=>' | '->') expr )?        right associative
//   or    := and ( ('∨' | '|' | 'or') and )*
//   and   := not ( ('∧' | '&' | 'and') not )*
//   not   := ('¬' | '!' | '~' | 'not') not | prim
//   prim  := '(' expr ')' | name | name 'in' interval (',' interval)*
//
// A bare name is a scenario proposition; `Obs in [a,b]` is the spectral
// projection of a scenario observable. Atoms are daseinised and connectives
// are then evaluated in the Heyting algebra of clopen subobjects.

#include <cctype>
#include <cstdlib>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "toposq/daseinisation.hpp"
#include "toposq/scenario.hpp"

namespace toposq {

struct PropExpr {
  enum class Kind { atom, negation, conjunction, disjunction, implication };

  Kind kind = Kind::atom;
  std::string name;          // atom: proposition or observable name
  bool is_range = false;     // atom given as `observable in intervals`
  IntervalSet intervals;
  std::vector<std::shared_ptr<const PropExpr>> operands;

  std::string to_string() const {
    auto wrap = [](const PropExpr& e) {
      return e.kind == Kind::atom || e.kind == Kind::negation ? e.to_string() : "(" + e.to_string() + ")";
    };
    switch (kind) {
      case Kind::atom: {
        if (!is_range) return name;
        std::string out = name + " in ";
        for (std::size_t i = 0; i < intervals.size(); ++i) {
          if (i > 0) out += ",";
          out += "[" + Json(intervals[i].lo).dump() + "," + Json(intervals[i].hi).dump() + "]";
        }
        return out;
      }
      case Kind::negation: return "¬" + wrap(*operands[0]);
      case Kind::conjunction: return wrap(*operands[0]) + " ∧ " + wrap(*operands[1]);
      case Kind::disjunction: return wrap(*operands[0]) + " ∨ " + wrap(*operands[1]);
      case Kind::implication: return wrap(*operands[0]) + " ⇒ " + wrap(*operands[1]);
    }
    return {};
  }
};

using PropPtr = std::shared_ptr<const PropExpr>;

namespace detail {

class PropParser {
 public:
  explicit PropParser(std::string_view text) : s_(text) {}

  PropPtr parse() {
    auto e = implication();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(s_.substr(pos_, 1)) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::ParseError, "proposition at offset " + std::to_string(pos_) + ": " + what);
  }

  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  static bool word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '\'';
  }

  // Consumes one of the spellings if present. Alphabetic spellings must end at a word boundary.
  bool accept(std::initializer_list<std::string_view> spellings) {
    skip();
    for (auto sp : spellings) {
      if (s_.substr(pos_, sp.size()) != sp) continue;
      const bool alpha = std::isalpha(static_cast<unsigned char>(sp.front()));
      if (alpha && pos_ + sp.size() < s_.size() && word_char(s_[pos_ + sp.size()])) continue;
      pos_ += sp.size();
      return true;
    }
    return false;
  }

  static PropPtr node(PropExpr::Kind k, std::vector<PropPtr> ops) {
    auto e = std::make_shared<PropExpr>();
    e->kind = k;
    e->operands = std::move(ops);
    return e;
  }

  PropPtr implication() {
    auto lhs = disjunction();
    if (accept({"⇒", "=>", "->"})) return node(PropExpr::Kind::implication, {lhs, implication()});
    return lhs;
  }

  PropPtr disjunction() {
    auto lhs = conjunction();
    while (accept({"∨", "||", "|", "or"})) lhs = node(PropExpr::Kind::disjunction, {lhs, conjunction()});
    return lhs;
  }

  PropPtr conjunction() {
    auto lhs = negation();
    while (accept({"∧", "&&", "&", "and"})) lhs = node(PropExpr::Kind::conjunction, {lhs, negation()});
    return lhs;
  }

  PropPtr negation() {
    if (accept({"¬", "!", "~", "not"})) return node(PropExpr::Kind::negation, {negation()});
    return primary();
  }

  double number() {
    skip();
    const char* begin = s_.data() + pos_;
    char* end = nullptr;
    const std::string buf(begin, s_.size() - pos_);
    const double x = std::strtod(buf.c_str(), &end);
    if (end == buf.c_str()) fail("expected a number");
    pos_ += static_cast<std::size_t>(end - buf.c_str());
    return x;
  }

  Interval interval() {
    if (!accept({"["})) fail("expected '['");
    const double lo = number();
    if (!accept({","})) fail("expected ','");
    const double hi = number();
    if (!accept({"]"})) fail("expected ']'");
    if (lo > hi) fail("interval bounds out of order");
    return {lo, hi};
  }

  PropPtr primary() {
    if (accept({"("})) {
      auto e = implication();
      if (!accept({")"})) fail("expected ')'");
      return e;
    }
    skip();
    const std::size_t start = pos_;
    while (pos_ < s_.size() && word_char(s_[pos_])) ++pos_;
    if (pos_ == start) fail(pos_ == s_.size() ? "unexpected end of input" : "expected a name");
    auto e = std::make_shared<PropExpr>();
    e->name = std::string(s_.substr(start, pos_ - start));
    if (accept({"in"})) {
      e->is_range = true;
      e->intervals.push_back(interval());
      for (;;) {
        const std::size_t save = pos_;
        if (accept({","}) && (skip(), pos_ < s_.size() && s_[pos_] == '[')) {
          e->intervals.push_back(interval());
        } else {
          pos_ = save;
          break;
        }
      }
    }
    return e;
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline PropPtr parseProposition(std::string_view text) { return detail::PropParser(text).parse(); }

/// Projection denoted by an atomic expression.
inline Projection atomProjection(const PropExpr& e, const Scenario& sc) {
  if (e.kind != PropExpr::Kind::atom) {
    throw Error(ErrorCode::UnknownProposition, "'" + e.to_string() + "' is compound and denotes no single projection");
  }
  if (e.is_range) return spectralProjection(sc.observable(e.name), e.intervals, sc.tolerances);
  return sc.projection_of(sc.proposition(e.name));
}

inline ClopenSubobject evaluateProposition(const PropExpr& e, const Scenario& sc, const PresheafPtr& sigma) {
  switch (e.kind) {
    case PropExpr::Kind::atom: return daseinise(atomProjection(e, sc), sigma);
    case PropExpr::Kind::negation: return negate(evaluateProposition(*e.operands[0], sc, sigma));
    case PropExpr::Kind::conjunction:
      return meet(evaluateProposition(*e.operands[0], sc, sigma), evaluateProposition(*e.operands[1], sc, sigma));
    case PropExpr::Kind::disjunction:
      return join(evaluateProposition(*e.operands[0], sc, sigma), evaluateProposition(*e.operands[1], sc, sigma));
    case PropExpr::Kind::implication:
      return implies(evaluateProposition(*e.operands[0], sc, sigma), evaluateProposition(*e.operands[1], sc, sigma));
  }
  throw Error(ErrorCode::UnknownProposition, "malformed expression");
}

}  // namespace toposq
