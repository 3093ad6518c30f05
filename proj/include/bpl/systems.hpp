#pragma once

// Exact construction of the algebraic systems attached to a polynomial
// optimization problem: barrier first-order conditions, the cleared critical
// variety V_mu, KKT systems on perturbed varieties, and their projective
// (bi-homogenized) counterparts.

#include <numeric>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/parser.hpp"
#include "bpl/polynomial.hpp"
#include "bpl/problem.hpp"

namespace bpl {

/// Equations in named unknowns followed by named parameters. Every equation
/// has nvars() = varnames.size() + paramnames.size() variables.
struct PolySystem {
  std::vector<QPoly> equations;
  std::vector<std::string> varnames;
  std::vector<std::string> paramnames;

  std::size_t nunknowns() const { return varnames.size(); }
  std::size_t nparams() const { return paramnames.size(); }
  std::size_t nvars() const { return varnames.size() + paramnames.size(); }

  std::vector<std::string> allnames() const {
    std::vector<std::string> all = varnames;
    all.insert(all.end(), paramnames.begin(), paramnames.end());
    return all;
  }

  std::size_t param_index(const std::string& name) const {
    for (std::size_t i = 0; i < paramnames.size(); ++i)
      if (paramnames[i] == name) return varnames.size() + i;
    throw std::out_of_range("no parameter named '" + name + "'");
  }

  /// Symbolic Jacobian with respect to the unknowns.
  std::vector<std::vector<QPoly>> jacobian() const {
    std::vector<std::vector<QPoly>> J;
    for (const QPoly& e : equations) J.push_back(gradient(e, nunknowns()));
    return J;
  }

  /// Substitutes exact values for every parameter.
  PolySystem specialize(const std::vector<Rational>& values) const {
    if (values.size() != nparams()) throw DimensionError("specialize: wrong number of values");
    PolySystem s = *this;
    for (QPoly& e : s.equations)
      for (std::size_t i = 0; i < values.size(); ++i) e = substitute(e, nunknowns() + i, values[i]);
    return s;
  }

  void check() const {
    for (const QPoly& e : equations)
      if (e.nvars() != nvars()) throw DimensionError("system equation has wrong variable count");
  }
};

/// Printed equations as a JSON list (the system dump format).
inline nlohmann::json dump_system(const PolySystem& s) {
  nlohmann::json j = nlohmann::json::array();
  const auto names = s.allnames();
  for (const QPoly& e : s.equations) j.push_back(to_string(e, names));
  return j;
}

inline PolySystem read_system_dump(const nlohmann::json& j, std::vector<std::string> varnames,
                                   std::vector<std::string> paramnames) {
  PolySystem s{{}, std::move(varnames), std::move(paramnames)};
  const auto names = s.allnames();
  for (const auto& e : j) s.equations.push_back(parse_poly(e.get<std::string>(), names));
  return s;
}

// ---------------------------------------------------------------------------
// Barrier first-order conditions

/// numerator / denominator, both over (x, mu).
struct RationalTerm {
  QPoly numerator;
  QPoly denominator;
};

/// j-th condition  df/dx_j - mu * sum_i (dg_i/dx_j) / g_i, kept as a sum of
/// fractions whose denominators are single constraints.
struct BarrierCondition {
  std::vector<RationalTerm> terms;
};

struct BarrierSystem {
  std::vector<BarrierCondition> conditions;
  std::vector<std::string> varnames;  // x1..xn, then "mu"

  /// Values of the rational conditions at (x, mu). Undefined on S_=.
  std::vector<double> evaluate(const std::vector<double>& x, double mu) const {
    std::vector<double> point = x;
    point.push_back(mu);
    std::vector<double> out;
    for (const auto& c : conditions) {
      double v = 0.0;
      for (const auto& t : c.terms) {
        const RPoly num = to_float(t.numerator), den = to_float(t.denominator);
        v += num.evaluate(point) / den.evaluate(point);
      }
      out.push_back(v);
    }
    return out;
  }

  /// All fractions of condition j over the common denominator prod g_i.
  RationalTerm combined(std::size_t j) const {
    const auto& terms = conditions.at(j).terms;
    const std::size_t nv = terms.front().numerator.nvars();
    QPoly common = QPoly::constant(nv, Rational(1));
    std::vector<const QPoly*> seen;
    for (const auto& t : terms) {
      if (t.denominator.is_constant()) continue;
      bool dup = false;
      for (const QPoly* s : seen) dup = dup || (*s == t.denominator);
      if (!dup) {
        seen.push_back(&t.denominator);
        common = common * t.denominator;
      }
    }
    QPoly num(nv);
    for (const auto& t : terms) {
      QPoly cofactor = QPoly::constant(nv, Rational(1));
      bool skipped = t.denominator.is_constant();
      for (const QPoly* s : seen) {
        if (!skipped && *s == t.denominator) {
          skipped = true;
          continue;
        }
        cofactor = cofactor * *s;
      }
      QPoly scaled = t.numerator * cofactor;
      if (t.denominator.is_constant()) scaled *= Rational(1) / t.denominator.constant_term();
      num += scaled;
    }
    return {num, common};
  }
};

inline std::vector<std::string> with_mu(std::vector<std::string> names) {
  names.push_back("mu");
  return names;
}

inline BarrierSystem build_barrier_system(const POProblem& prob) {
  if (prob.gs.empty()) throw ValidationError("barrier system needs at least one constraint");
  const std::size_t n = prob.nvars();
  const QPoly mu = QPoly::variable(n + 1, n);
  BarrierSystem sys;
  sys.varnames = with_mu(prob.varnames);
  const QPoly one = QPoly::constant(n + 1, Rational(1));
  for (std::size_t j = 0; j < n; ++j) {
    BarrierCondition c;
    c.terms.push_back({extend(derivative(prob.f, j), 1), one});
    for (const QPoly& g : prob.gs) {
      const QPoly dg = extend(derivative(g, j), 1);
      c.terms.push_back({-(mu * dg), extend(g, 1)});
    }
    sys.conditions.push_back(std::move(c));
  }
  return sys;
}

/// Cleared system  (df/dx_j) prod g_i - mu sum_k (dg_k/dx_j) prod_{i != k} g_i
/// in unknowns x with parameter mu.
inline PolySystem build_cleared_system(const POProblem& prob) {
  if (prob.gs.empty()) throw ValidationError("cleared system needs at least one constraint");
  const std::size_t n = prob.nvars(), r = prob.gs.size();
  std::vector<QPoly> g;
  for (const QPoly& gi : prob.gs) g.push_back(extend(gi, 1));
  const QPoly mu = QPoly::variable(n + 1, n);
  const QPoly one = QPoly::constant(n + 1, Rational(1));

  // prefix/suffix products give prod_{i != k} g_i without division
  std::vector<QPoly> prefix(r + 1, one), suffix(r + 1, one);
  for (std::size_t i = 0; i < r; ++i) prefix[i + 1] = prefix[i] * g[i];
  for (std::size_t i = r; i-- > 0;) suffix[i] = suffix[i + 1] * g[i];

  PolySystem sys{{}, prob.varnames, {"mu"}};
  for (std::size_t j = 0; j < n; ++j) {
    QPoly row = extend(derivative(prob.f, j), 1) * prefix[r];
    for (std::size_t k = 0; k < r; ++k)
      row -= mu * derivative(g[k], j) * prefix[k] * suffix[k + 1];
    sys.equations.push_back(std::move(row));
  }
  return sys;
}

// ---------------------------------------------------------------------------
// KKT systems on  V_xi = zero(P_1 - xi_1, ..., P_s - xi_s)

inline std::vector<std::string> indexed_names(const std::string& stem, std::size_t from,
                                              std::size_t count) {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < count; ++i) names.push_back(stem + std::to_string(from + i));
  return names;
}

/// Unknowns (x1..xn, u1..us), parameters xi1..xis. Rows: the n stationarity
/// equations  dF/dx_j - sum_i u_i dP_i/dx_j  followed by  P_i - xi_i.
inline PolySystem build_kkt_system(const QPoly& F, const std::vector<QPoly>& Ps,
                                   std::vector<std::string> varnames = {}) {
  const std::size_t n = F.nvars(), s = Ps.size();
  for (const QPoly& P : Ps)
    if (P.nvars() != n) throw DimensionError("build_kkt_system: constraint variable count");
  if (varnames.empty()) varnames = default_varnames(n);
  const std::size_t total = n + 2 * s;
  std::vector<std::size_t> embed(n);
  std::iota(embed.begin(), embed.end(), std::size_t{0});

  PolySystem sys;
  sys.varnames = varnames;
  for (const auto& u : indexed_names("u", 1, s)) sys.varnames.push_back(u);
  sys.paramnames = s == 1 ? std::vector<std::string>{"xi"} : indexed_names("xi", 1, s);

  for (std::size_t j = 0; j < n; ++j) {
    QPoly row = remap(derivative(F, j), total, embed);
    for (std::size_t i = 0; i < s; ++i)
      row -= QPoly::variable(total, n + i) * remap(derivative(Ps[i], j), total, embed);
    sys.equations.push_back(std::move(row));
  }
  for (std::size_t i = 0; i < s; ++i)
    sys.equations.push_back(remap(Ps[i], total, embed) - QPoly::variable(total, n + s + i));
  return sys;
}

/// Bi-homogeneous system in (x0..xn ; u0..us) with block sizes recorded.
struct ProjectiveSystem {
  PolySystem system;
  std::size_t nx = 0;  // x-block size including x0
  std::size_t nu = 0;  // u-block size including u0

  std::vector<std::size_t> xblock() const {
    std::vector<std::size_t> b(nx);
    std::iota(b.begin(), b.end(), std::size_t{0});
    return b;
  }
  std::vector<std::size_t> ublock() const {
    std::vector<std::size_t> b(nu);
    std::iota(b.begin(), b.end(), nx);
    return b;
  }
};

namespace detail {

inline std::vector<std::string> projective_names(const std::vector<std::string>& xnames,
                                                 std::size_t nmult) {
  std::vector<std::string> names{"x0"};
  names.insert(names.end(), xnames.begin(), xnames.end());
  for (const auto& u : indexed_names("u", 0, nmult + 1)) names.push_back(u);
  return names;
}

/// Stationarity rows  (dF/dx_j - sum_i u_i dP_i/dx_j)^H  in the projective
/// layout (x0, x, u0, u, params...) with `nparams` trailing parameters.
inline std::vector<QPoly> projective_stationarity(const QPoly& F, const std::vector<QPoly>& Ps,
                                                  std::size_t nparams) {
  const std::size_t n = F.nvars(), s = Ps.size();
  const std::size_t affine_total = n + s;
  std::vector<std::size_t> embed(n);
  std::iota(embed.begin(), embed.end(), std::size_t{0});
  std::vector<std::size_t> xb(n), ub(s);
  std::iota(xb.begin(), xb.end(), std::size_t{0});
  std::iota(ub.begin(), ub.end(), n);

  std::vector<QPoly> rows;
  for (std::size_t j = 0; j < n; ++j) {
    QPoly row = remap(derivative(F, j), affine_total, embed);
    for (std::size_t i = 0; i < s; ++i)
      row -= QPoly::variable(affine_total, n + i) * remap(derivative(Ps[i], j), affine_total, embed);
    rows.push_back(extend(bihomogenize(row, xb, ub), nparams));
  }
  return rows;
}

/// Embeds a polynomial in x1..xn into the projective layout as P^H(x0..xn).
inline QPoly projective_embed_h(const QPoly& P, std::size_t s, std::size_t nparams) {
  const std::size_t n = P.nvars();
  const QPoly h = homogenize(P, 0);
  std::vector<std::size_t> target(n + 1);
  std::iota(target.begin(), target.end(), std::size_t{0});
  return remap(h, (n + 1) + (s + 1) + nparams, target);
}

}  // namespace detail

/// Projective KKT system: stationarity rows bi-homogenized in (X; U) plus
/// P_i^H - c_i x0^deg(P_i). Parameters are c (s = 1) or c1..cs.
inline ProjectiveSystem build_projective_kkt(const QPoly& F, const std::vector<QPoly>& Ps,
                                             std::vector<std::string> varnames = {}) {
  const std::size_t n = F.nvars(), s = Ps.size();
  if (varnames.empty()) varnames = default_varnames(n);
  ProjectiveSystem ps;
  ps.nx = n + 1;
  ps.nu = s + 1;
  ps.system.varnames = detail::projective_names(varnames, s);
  ps.system.paramnames = s == 1 ? std::vector<std::string>{"c"} : indexed_names("c", 1, s);
  const std::size_t total = ps.nx + ps.nu + s;
  ps.system.equations = detail::projective_stationarity(F, Ps, s);
  for (std::size_t i = 0; i < s; ++i) {
    const unsigned d = Ps[i].degree().value_or(0u);
    QPoly row = detail::projective_embed_h(Ps[i], s, s);
    row -= QPoly::variable(total, ps.nx + ps.nu + i) * QPoly::variable(total, 0, d);
    ps.system.equations.push_back(std::move(row));
  }
  ps.system.check();
  return ps;
}

/// Homogenized primal-dual central path system with parameter mu:
/// u0 F_j - sum_i u_i G_ij = 0 and u_i g_i^H - mu u0 x0^alpha_i = 0.
/// At mu = 0 these are the projective KKT conditions of the problem.
inline ProjectiveSystem build_projective_central(const POProblem& prob) {
  if (prob.gs.empty()) throw ValidationError("projective central system needs constraints");
  const std::size_t n = prob.nvars(), r = prob.gs.size();
  ProjectiveSystem ps;
  ps.nx = n + 1;
  ps.nu = r + 1;
  ps.system.varnames = detail::projective_names(prob.varnames, r);
  ps.system.paramnames = {"mu"};
  const std::size_t total = ps.nx + ps.nu + 1;
  const std::size_t mu = total - 1, u0 = ps.nx;
  ps.system.equations = detail::projective_stationarity(prob.f, prob.gs, 1);
  for (std::size_t i = 0; i < r; ++i) {
    const unsigned alpha = prob.gs[i].degree().value_or(0u);
    QPoly row = QPoly::variable(total, u0 + 1 + i) * detail::projective_embed_h(prob.gs[i], r, 1);
    row -= QPoly::variable(total, mu) * QPoly::variable(total, u0) * QPoly::variable(total, 0, alpha);
    ps.system.equations.push_back(std::move(row));
  }
  ps.system.check();
  return ps;
}

}  // namespace bpl
