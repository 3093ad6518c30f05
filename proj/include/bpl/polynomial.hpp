#pragma once

// Sparse multivariate polynomials over exact rationals or doubles.
//
// Terms are kept in a std::map ordered by graded lexicographic order, so two
// polynomials with the same terms compare equal structurally. Zero
// coefficients are never stored.

#include <algorithm>
#include <complex>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace bpl {

using Rational = boost::multiprecision::cpp_rational;
using Exponents = std::vector<unsigned>;

/// Total degree of a polynomial. std::nullopt stands for the degree of the
/// zero polynomial (minus infinity).
using Degree = std::optional<unsigned>;

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline unsigned total_degree(const Exponents& e) {
  return std::accumulate(e.begin(), e.end(), 0u);
}

struct GradedLexLess {
  bool operator()(const Exponents& a, const Exponents& b) const {
    const unsigned da = total_degree(a);
    const unsigned db = total_degree(b);
    if (da != db) return da < db;
    return a < b;
  }
};

template <class T>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

/// Converts a coefficient to the scalar type used for evaluation.
template <class S, class C>
S coeff_as(const C& c) {
  if constexpr (std::is_same_v<S, C>) {
    return c;
  } else if constexpr (std::is_same_v<C, Rational>) {
    if constexpr (is_complex_v<S>)
      return S(static_cast<double>(c), 0.0);
    else
      return static_cast<S>(c);
  } else {
    return S(c);
  }
}

template <class C>
bool coeff_is_zero(const C& c) {
  return c == C(0);
}

template <class S>
S ipow(S base, unsigned e) {
  S result(1);
  while (e > 0) {
    if (e & 1u) result *= base;
    e >>= 1u;
    if (e) base *= base;
  }
  return result;
}

template <class Coeff>
class Polynomial {
 public:
  using coeff_type = Coeff;
  using TermMap = std::map<Exponents, Coeff, GradedLexLess>;

  Polynomial() = default;
  explicit Polynomial(std::size_t nvars) : nvars_(nvars) {}

  static Polynomial constant(std::size_t nvars, const Coeff& c) {
    Polynomial p(nvars);
    p.add_term(Exponents(nvars, 0u), c);
    return p;
  }

  static Polynomial variable(std::size_t nvars, std::size_t j, unsigned power = 1) {
    if (j >= nvars) throw DimensionError("variable index out of range");
    Exponents e(nvars, 0u);
    e[j] = power;
    Polynomial p(nvars);
    p.add_term(e, Coeff(1));
    return p;
  }

  static Polynomial monomial(const Coeff& c, Exponents e) {
    Polynomial p(e.size());
    p.add_term(e, c);
    return p;
  }

  std::size_t nvars() const { return nvars_; }
  const TermMap& terms() const { return terms_; }
  std::size_t size() const { return terms_.size(); }
  bool is_zero() const { return terms_.empty(); }

  Degree degree() const {
    if (terms_.empty()) return std::nullopt;
    return total_degree(terms_.rbegin()->first);
  }

  /// Degree restricted to a subset of variables; nullopt for the zero polynomial.
  Degree degree_in(std::span<const std::size_t> vars) const {
    if (terms_.empty()) return std::nullopt;
    unsigned best = 0;
    for (const auto& [e, c] : terms_) {
      unsigned d = 0;
      for (std::size_t v : vars) d += e.at(v);
      best = std::max(best, d);
    }
    return best;
  }

  bool is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && total_degree(terms_.begin()->first) == 0);
  }

  Coeff constant_term() const {
    auto it = terms_.find(Exponents(nvars_, 0u));
    return it == terms_.end() ? Coeff(0) : it->second;
  }

  bool is_homogeneous() const {
    if (terms_.empty()) return true;
    const unsigned d = total_degree(terms_.begin()->first);
    return std::all_of(terms_.begin(), terms_.end(),
                       [d](const auto& t) { return total_degree(t.first) == d; });
  }

  /// Adds c * x^e in place. Only used while a value is being built.
  void add_term(const Exponents& e, const Coeff& c) {
    if (e.size() != nvars_) throw DimensionError("exponent length does not match nvars");
    if (coeff_is_zero(c)) return;
    auto [it, inserted] = terms_.try_emplace(e, c);
    if (!inserted) {
      it->second += c;
      if (coeff_is_zero(it->second)) terms_.erase(it);
    }
  }

  template <class S>
  S evaluate(std::span<const S> x) const {
    if (x.size() != nvars_)
      throw DimensionError("evaluate: point has " + std::to_string(x.size()) +
                           " coordinates, polynomial has " + std::to_string(nvars_) +
                           " variables");
    S sum(0);
    for (const auto& [e, c] : terms_) {
      S term = coeff_as<S>(c);
      for (std::size_t j = 0; j < nvars_; ++j)
        if (e[j]) term *= ipow(x[j], e[j]);
      sum += term;
    }
    return sum;
  }

  template <class S>
  S evaluate(const std::vector<S>& x) const {
    return evaluate(std::span<const S>(x));
  }

  /// Sum of |c| * |x|^e over all terms; a magnitude bound for rounding error.
  double magnitude(std::span<const double> x) const {
    if (x.size() != nvars_) throw DimensionError("magnitude: dimension mismatch");
    double sum = 0.0;
    for (const auto& [e, c] : terms_) {
      double term = std::abs(coeff_as<double>(c));
      for (std::size_t j = 0; j < nvars_; ++j)
        if (e[j]) term *= ipow(std::abs(x[j]), e[j]);
      sum += term;
    }
    return sum;
  }

  Polynomial operator-() const {
    Polynomial r = *this;
    for (auto& [e, c] : r.terms_) c = -c;
    return r;
  }

  Polynomial& operator+=(const Polynomial& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, c);
    return *this;
  }
  Polynomial& operator-=(const Polynomial& o) {
    check_same(o);
    for (const auto& [e, c] : o.terms_) add_term(e, -c);
    return *this;
  }
  Polynomial& operator*=(const Coeff& s) {
    if (coeff_is_zero(s)) {
      terms_.clear();
      return *this;
    }
    for (auto& [e, c] : terms_) c *= s;
    return *this;
  }

  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(Polynomial a, const Coeff& s) { return a *= s; }
  friend Polynomial operator*(const Coeff& s, Polynomial a) { return a *= s; }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    a.check_same(b);
    Polynomial r(a.nvars_);
    Exponents e(a.nvars_);
    for (const auto& [ea, ca] : a.terms_)
      for (const auto& [eb, cb] : b.terms_) {
        for (std::size_t j = 0; j < a.nvars_; ++j) e[j] = ea[j] + eb[j];
        r.add_term(e, ca * cb);
      }
    return r;
  }

  Polynomial pow(unsigned k) const {
    Polynomial r = constant(nvars_, Coeff(1));
    for (unsigned i = 0; i < k; ++i) r = r * *this;
    return r;
  }

  friend bool operator==(const Polynomial& a, const Polynomial& b) {
    return a.nvars_ == b.nvars_ && a.terms_ == b.terms_;
  }

 private:
  void check_same(const Polynomial& o) const {
    if (o.nvars_ != nvars_) throw DimensionError("polynomials have different variable counts");
  }

  std::size_t nvars_ = 0;
  TermMap terms_;
};

using QPoly = Polynomial<Rational>;
using RPoly = Polynomial<double>;

/// One-way conversion from exact to floating-point coefficients.
inline RPoly to_float(const QPoly& p) {
  RPoly r(p.nvars());
  for (const auto& [e, c] : p.terms()) r.add_term(e, static_cast<double>(c));
  return r;
}

template <class C>
Polynomial<C> derivative(const Polynomial<C>& p, std::size_t j) {
  if (j >= p.nvars()) throw DimensionError("derivative: variable index out of range");
  Polynomial<C> r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    if (e[j] == 0) continue;
    Exponents d = e;
    d[j] -= 1;
    r.add_term(d, c * C(e[j]));
  }
  return r;
}

template <class C>
std::vector<Polynomial<C>> gradient(const Polynomial<C>& p) {
  std::vector<Polynomial<C>> g;
  g.reserve(p.nvars());
  for (std::size_t j = 0; j < p.nvars(); ++j) g.push_back(derivative(p, j));
  return g;
}

/// Gradient restricted to the first `count` variables.
template <class C>
std::vector<Polynomial<C>> gradient(const Polynomial<C>& p, std::size_t count) {
  std::vector<Polynomial<C>> g;
  g.reserve(count);
  for (std::size_t j = 0; j < count; ++j) g.push_back(derivative(p, j));
  return g;
}

/// Renames variables: old variable j becomes new variable target[j].
template <class C>
Polynomial<C> remap(const Polynomial<C>& p, std::size_t new_nvars,
                    std::span<const std::size_t> target) {
  if (target.size() != p.nvars()) throw DimensionError("remap: target map has wrong length");
  Polynomial<C> r(new_nvars);
  Exponents e(new_nvars);
  for (const auto& [old, c] : p.terms()) {
    std::fill(e.begin(), e.end(), 0u);
    for (std::size_t j = 0; j < old.size(); ++j) {
      if (old[j] == 0) continue;
      if (target[j] >= new_nvars) throw DimensionError("remap: target index out of range");
      e[target[j]] += old[j];
    }
    r.add_term(e, c);
  }
  return r;
}

/// Embeds p into a space with `extra` additional trailing variables.
template <class C>
Polynomial<C> extend(const Polynomial<C>& p, std::size_t extra) {
  std::vector<std::size_t> target(p.nvars());
  std::iota(target.begin(), target.end(), std::size_t{0});
  return remap(p, p.nvars() + extra, target);
}

/// Replaces variable j by the constant v. The variable count is unchanged.
template <class C>
Polynomial<C> substitute(const Polynomial<C>& p, std::size_t j, const C& v) {
  if (j >= p.nvars()) throw DimensionError("substitute: variable index out of range");
  Polynomial<C> r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Exponents d = e;
    d[j] = 0;
    r.add_term(d, c * ipow(v, e[j]));
  }
  return r;
}

/// Replaces variable j by the polynomial q (same variable count as p).
template <class C>
Polynomial<C> compose(const Polynomial<C>& p, std::size_t j, const Polynomial<C>& q) {
  if (j >= p.nvars() || q.nvars() != p.nvars())
    throw DimensionError("compose: incompatible operands");
  Polynomial<C> r(p.nvars());
  for (const auto& [e, c] : p.terms()) {
    Exponents d = e;
    d[j] = 0;
    r += Polynomial<C>::monomial(c, d) * q.pow(e[j]);
  }
  return r;
}

/// Drops the listed variables, which must not occur in p.
template <class C>
Polynomial<C> drop_variables(const Polynomial<C>& p, std::span<const std::size_t> drop) {
  std::vector<std::size_t> target(p.nvars());
  std::size_t next = 0;
  const auto dropped = [&](std::size_t j) {
    return std::find(drop.begin(), drop.end(), j) != drop.end();
  };
  for (std::size_t j = 0; j < p.nvars(); ++j) target[j] = dropped(j) ? p.nvars() : next++;
  Polynomial<C> r(next);
  Exponents e(next);
  for (const auto& [old, c] : p.terms()) {
    for (std::size_t j = 0; j < old.size(); ++j) {
      if (target[j] == p.nvars()) {
        if (old[j]) throw DimensionError("drop_variables: variable still occurs");
      } else {
        e[target[j]] = old[j];
      }
    }
    r.add_term(e, c);
  }
  return r;
}

/// Top-degree homogeneous part.
template <class C>
Polynomial<C> leading_form(const Polynomial<C>& p) {
  Polynomial<C> r(p.nvars());
  const Degree d = p.degree();
  if (!d) return r;
  for (const auto& [e, c] : p.terms())
    if (total_degree(e) == *d) r.add_term(e, c);
  return r;
}

/// Homogenizes p with a new variable inserted at position `pos`; every term is
/// multiplied by newvar^(deg p - deg term).
template <class C>
Polynomial<C> homogenize(const Polynomial<C>& p, std::size_t pos = 0) {
  if (pos > p.nvars()) throw DimensionError("homogenize: insertion index out of range");
  Polynomial<C> r(p.nvars() + 1);
  const Degree d = p.degree();
  if (!d) return r;
  Exponents e(p.nvars() + 1);
  for (const auto& [old, c] : p.terms()) {
    for (std::size_t j = 0, k = 0; j <= p.nvars(); ++j) e[j] = (j == pos) ? 0u : old[k++];
    e[pos] = *d - total_degree(old);
    r.add_term(e, c);
  }
  return r;
}

/// Bi-homogenizes p with respect to two disjoint variable blocks.
///
/// The result lives in the variables (x0, xblock..., u0, ublock..., rest...)
/// where `rest` are the variables in neither block (kept as coefficients,
/// e.g. parameters). Each term gets x0^(dx - its x-degree) and
/// u0^(du - its u-degree), dx and du being the block degrees of p.
template <class C>
Polynomial<C> bihomogenize(const Polynomial<C>& p, std::span<const std::size_t> xblock,
                           std::span<const std::size_t> ublock) {
  std::vector<int> role(p.nvars(), 0);
  for (std::size_t v : xblock) {
    if (v >= p.nvars()) throw DimensionError("bihomogenize: x-block index out of range");
    if (role[v]) throw std::invalid_argument("bihomogenize: overlapping blocks");
    role[v] = 1;
  }
  for (std::size_t v : ublock) {
    if (v >= p.nvars()) throw DimensionError("bihomogenize: u-block index out of range");
    if (role[v]) throw std::invalid_argument("bihomogenize: overlapping blocks");
    role[v] = 2;
  }
  const std::size_t nx = xblock.size(), nu = ublock.size();
  const std::size_t nrest = p.nvars() - nx - nu;
  const std::size_t out_n = nx + nu + 2 + nrest;
  std::vector<std::size_t> target(p.nvars());
  for (std::size_t i = 0; i < nx; ++i) target[xblock[i]] = 1 + i;
  for (std::size_t i = 0; i < nu; ++i) target[ublock[i]] = nx + 2 + i;
  for (std::size_t j = 0, k = 0; j < p.nvars(); ++j)
    if (role[j] == 0) target[j] = nx + nu + 2 + k++;

  Polynomial<C> r(out_n);
  if (p.is_zero()) return r;
  const unsigned dx = *p.degree_in(xblock);
  const unsigned du = *p.degree_in(ublock);
  Exponents e(out_n);
  for (const auto& [old, c] : p.terms()) {
    std::fill(e.begin(), e.end(), 0u);
    unsigned ex = 0, eu = 0;
    for (std::size_t j = 0; j < old.size(); ++j) {
      e[target[j]] = old[j];
      if (role[j] == 1) ex += old[j];
      if (role[j] == 2) eu += old[j];
    }
    e[0] = dx - ex;
    e[nx + 1] = du - eu;
    r.add_term(e, c);
  }
  return r;
}

/// Degree of p in the given block of variables (0 for the zero polynomial).
template <class C>
unsigned block_degree(const Polynomial<C>& p, std::span<const std::size_t> block) {
  return p.degree_in(block).value_or(0u);
}

// ---------------------------------------------------------------------------
// Printing

inline std::string format_coeff(const Rational& c) {
  std::ostringstream os;
  os << boost::multiprecision::numerator(c);
  if (boost::multiprecision::denominator(c) != 1) os << '/' << boost::multiprecision::denominator(c);
  return os.str();
}

inline std::string format_coeff(double c) {
  std::ostringstream os;
  os.precision(17);
  os << c;
  return os.str();
}

/// Short human-readable rendering of a number for messages.
inline std::string format_number(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

inline std::vector<std::string> default_varnames(std::size_t n) {
  std::vector<std::string> names;
  for (std::size_t j = 1; j <= n; ++j) names.push_back("x" + std::to_string(j));
  return names;
}

/// Canonical text form: terms in decreasing graded lex order, "c*x1^2*x2".
template <class C>
std::string to_string(const Polynomial<C>& p, const std::vector<std::string>& names) {
  if (names.size() != p.nvars()) throw DimensionError("to_string: wrong number of names");
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = p.terms().rbegin(); it != p.terms().rend(); ++it) {
    const auto& [e, c] = *it;
    const bool negative = c < C(0);
    const C mag = negative ? C(-c) : c;
    if (first)
      out += negative ? "-" : "";
    else
      out += negative ? " - " : " + ";
    first = false;

    std::string mono;
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (!e[j]) continue;
      if (!mono.empty()) mono += '*';
      mono += names[j];
      if (e[j] > 1) mono += '^' + std::to_string(e[j]);
    }
    if (mono.empty())
      out += format_coeff(mag);
    else if (mag == C(1))
      out += mono;
    else
      out += format_coeff(mag) + "*" + mono;
  }
  return out;
}

template <class C>
std::string to_string(const Polynomial<C>& p) {
  return to_string(p, default_varnames(p.nvars()));
}

}  // namespace bpl
