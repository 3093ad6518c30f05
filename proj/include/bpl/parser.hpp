#pragma once

// Recursive-descent parser for polynomial expressions.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' integer)?
//   primary := number | identifier | '(' expr ')'
//
// Numbers are integers, decimals or scientific literals and are read exactly.
// Division is only allowed by a non-zero constant. Juxtaposition ("2x1") is
// rejected.

#include <algorithm>
#include <cctype>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bpl/polynomial.hpp"

namespace bpl {

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Syntax, UnknownIdentifier };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : std::runtime_error(what + " at offset " + std::to_string(offset)),
        kind_(kind),
        offset_(offset) {}

  Kind kind() const { return kind_; }
  std::size_t offset() const { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

namespace detail {

inline bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
inline bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
inline bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

class PolyParser {
 public:
  PolyParser(std::string_view src, const std::vector<std::string>& names, std::size_t base)
      : src_(src), names_(names), base_(base) {}

  QPoly parse() {
    QPoly p = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return p;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, ParseError::Kind kind = ParseError::Kind::Syntax) {
    throw ParseError(kind, base_ + pos_, msg);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  QPoly expr() {
    QPoly acc = term();
    for (;;) {
      if (accept('+'))
        acc += term();
      else if (accept('-'))
        acc -= term();
      else
        return acc;
    }
  }

  QPoly term() {
    QPoly acc = unary();
    for (;;) {
      if (accept('*')) {
        acc = acc * unary();
      } else if (accept('/')) {
        const std::size_t at = pos_;
        QPoly d = unary();
        if (!d.is_constant() || d.is_zero()) {
          pos_ = at;
          fail("division by a non-constant or zero expression");
        }
        acc *= Rational(1) / d.constant_term();
      } else {
        return acc;
      }
    }
  }

  QPoly unary() {
    if (accept('-')) return -unary();
    if (accept('+')) return unary();
    return power();
  }

  QPoly power() {
    QPoly base = primary();
    if (accept('^')) {
      skip_ws();
      const std::size_t start = pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) ++pos_;
      if (start == pos_) fail("expected a non-negative integer exponent");
      const unsigned long k = std::stoul(std::string(src_.substr(start, pos_ - start)));
      if (k > 1000) {
        pos_ = start;
        fail("exponent too large");
      }
      base = base.pow(static_cast<unsigned>(k));
    }
    reject_juxtaposition();
    return base;
  }

  void reject_juxtaposition() {
    skip_ws();
    if (pos_ < src_.size() && (ident_start(src_[pos_]) || digit(src_[pos_]) || src_[pos_] == '(' ||
                               src_[pos_] == '.'))
      fail("implicit multiplication is not allowed");
  }

  QPoly primary() {
    skip_ws();
    const std::size_t n = names_.size();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      QPoly inner = expr();
      if (!accept(')')) fail("expected ')'");
      return inner;
    }
    if (digit(c) || c == '.') return QPoly::constant(n, number());
    if (ident_start(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && ident_char(src_[pos_])) ++pos_;
      const std::string id(src_.substr(start, pos_ - start));
      auto it = std::find(names_.begin(), names_.end(), id);
      if (it == names_.end()) {
        pos_ = start;
        fail("unknown identifier '" + id + "'", ParseError::Kind::UnknownIdentifier);
      }
      return QPoly::variable(n, static_cast<std::size_t>(it - names_.begin()));
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  Rational number() {
    const std::size_t start = pos_;
    std::string digits;
    long exp10 = 0;
    while (pos_ < src_.size() && digit(src_[pos_])) digits += src_[pos_++];
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && digit(src_[pos_])) {
        digits += src_[pos_++];
        --exp10;
      }
    }
    if (digits.empty()) {
      pos_ = start;
      fail("malformed number");
    }
    if (pos_ + 1 < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t q = pos_ + 1;
      bool neg = false;
      if (src_[q] == '+' || src_[q] == '-') {
        neg = src_[q] == '-';
        ++q;
      }
      if (q < src_.size() && digit(src_[q])) {
        long e = 0;
        while (q < src_.size() && digit(src_[q])) {
          e = e * 10 + (src_[q] - '0');
          if (e > 400) {
            pos_ = q;
            fail("exponent out of range");
          }
          ++q;
        }
        exp10 += neg ? -e : e;
        pos_ = q;
      }
    }
    boost::multiprecision::cpp_int num(digits);
    boost::multiprecision::cpp_int scale = boost::multiprecision::pow(
        boost::multiprecision::cpp_int(10), static_cast<unsigned>(exp10 < 0 ? -exp10 : exp10));
    return exp10 < 0 ? Rational(num, scale) : Rational(num * scale);
  }

  std::string_view src_;
  const std::vector<std::string>& names_;
  std::size_t base_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Parses `src` into a polynomial over `varnames`.
inline QPoly parse_poly(std::string_view src, const std::vector<std::string>& varnames) {
  return detail::PolyParser(src, varnames, 0).parse();
}

/// Parses "lhs >= rhs", "lhs <= rhs" (ASCII or Unicode) or a bare expression
/// meaning "expr >= 0", normalized to a single polynomial g with g >= 0.
inline QPoly parse_constraint(std::string_view src, const std::vector<std::string>& varnames) {
  struct Op {
    std::string_view text;
    bool ge;
  };
  static constexpr Op ops[] = {{">=", true}, {"<=", false}, {"≥", true}, {"≤", false}};
  for (const Op& op : ops) {
    const std::size_t at = src.find(op.text);
    if (at == std::string_view::npos) continue;
    const std::size_t rhs_at = at + op.text.size();
    QPoly lhs = detail::PolyParser(src.substr(0, at), varnames, 0).parse();
    QPoly rhs = detail::PolyParser(src.substr(rhs_at), varnames, rhs_at).parse();
    return op.ge ? lhs - rhs : rhs - lhs;
  }
  return parse_poly(src, varnames);
}

/// Collects identifiers appearing in the expressions, in natural order
/// (x2 before x10).
inline std::vector<std::string> infer_variables(const std::vector<std::string>& exprs) {
  std::set<std::string> seen;
  for (const std::string& s : exprs) {
    for (std::size_t i = 0; i < s.size();) {
      if (detail::ident_start(s[i]) && (i == 0 || !detail::ident_char(s[i - 1]) ||
                                         !detail::digit(s[i - 1]))) {
        std::size_t j = i;
        while (j < s.size() && detail::ident_char(s[j])) ++j;
        seen.insert(s.substr(i, j - i));
        i = j;
      } else {
        ++i;
      }
    }
  }
  std::vector<std::string> names(seen.begin(), seen.end());
  const auto split = [](const std::string& s) {
    std::size_t k = s.size();
    while (k > 0 && detail::digit(s[k - 1])) --k;
    const std::string stem = s.substr(0, k);
    const long idx = k < s.size() ? std::stol(s.substr(k)) : -1;
    return std::make_pair(stem, idx);
  };
  std::sort(names.begin(), names.end(),
            [&](const std::string& a, const std::string& b) { return split(a) < split(b); });
  return names;
}

}  // namespace bpl
