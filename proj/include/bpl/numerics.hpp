#pragma once

// Dense numeric substrate: compiled float systems with symbolic Jacobians,
// damped Newton, rank estimation, least squares, and Sturm root isolation.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "bpl/polynomial.hpp"
#include "bpl/systems.hpp"

namespace bpl {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline Vec to_vec(const std::vector<double>& v) {
  return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size()));
}
inline std::vector<double> to_std(const Vec& v) { return {v.data(), v.data() + v.size()}; }

inline double inf_norm(const Vec& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

// ---------------------------------------------------------------------------
// Compiled systems

/// Float evaluation of a PolySystem with the parameters fixed, Jacobian rows
/// taken from exact symbolic gradients.
class CompiledSystem {
 public:
  CompiledSystem() = default;

  explicit CompiledSystem(const PolySystem& sys, std::vector<double> params = {})
      : nunknowns_(sys.nunknowns()), params_(std::move(params)) {
    sys.check();
    if (params_.size() != sys.nparams()) params_.resize(sys.nparams(), 0.0);
    for (const QPoly& e : sys.equations) {
      eqs_.push_back(to_float(e));
      std::vector<RPoly> row;
      for (std::size_t j = 0; j < nunknowns_; ++j) row.push_back(to_float(derivative(e, j)));
      jac_.push_back(std::move(row));

    }
  }

  std::size_t nequations() const { return eqs_.size(); }
  std::size_t nunknowns() const { return nunknowns_; }
  const std::vector<double>& params() const { return params_; }
  void set_params(std::vector<double> p) {
    if (p.size() != params_.size()) throw DimensionError("set_params: wrong parameter count");
    params_ = std::move(p);
  }

  Vec residual(const Vec& x) const {
    const auto pt = point(x);
    Vec r(static_cast<Eigen::Index>(eqs_.size()));
    for (std::size_t i = 0; i < eqs_.size(); ++i) r[static_cast<Eigen::Index>(i)] = eqs_[i].evaluate(pt);
    return r;
  }

  Mat jacobian(const Vec& x) const {
    const auto pt = point(x);
    Mat J(static_cast<Eigen::Index>(eqs_.size()), static_cast<Eigen::Index>(nunknowns_));
    for (std::size_t i = 0; i < eqs_.size(); ++i)
      for (std::size_t j = 0; j < nunknowns_; ++j)
        J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jac_[i][j].evaluate(pt);
    return J;
  }

  /// Entry-wise term-magnitude bounds of the Jacobian at x.
  Mat jacobian_magnitudes(const Vec& x) const {
    const auto pt = point(x);
    Mat M(static_cast<Eigen::Index>(eqs_.size()), static_cast<Eigen::Index>(nunknowns_));
    for (std::size_t i = 0; i < eqs_.size(); ++i)
      for (std::size_t j = 0; j < nunknowns_; ++j)
        M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = jac_[i][j].magnitude(pt);
    return M;
  }

  /// Per-row sums of |term| at x, the natural scale of each equation.
  Vec row_magnitudes(const Vec& x) const {
    const auto pt = point(x);
    Vec m(static_cast<Eigen::Index>(eqs_.size()));
    for (std::size_t i = 0; i < eqs_.size(); ++i)
      m[static_cast<Eigen::Index>(i)] = eqs_[i].magnitude(pt);
    return m;
  }

 private:
  std::vector<double> point(const Vec& x) const {
    if (static_cast<std::size_t>(x.size()) != nunknowns_)
      throw DimensionError("compiled system: point has wrong dimension");
    std::vector<double> pt(x.data(), x.data() + x.size());
    pt.insert(pt.end(), params_.begin(), params_.end());
    return pt;
  }

  std::size_t nunknowns_ = 0;
  std::vector<double> params_;
  std::vector<RPoly> eqs_;
  std::vector<std::vector<RPoly>> jac_;
};

/// Residual/Jacobian pair consumed by the solvers.
struct NumericSystem {
  std::function<Vec(const Vec&)> residual;
  std::function<Mat(const Vec&)> jacobian;
};

inline NumericSystem as_numeric(const CompiledSystem& cs) {
  return {[&cs](const Vec& x) { return cs.residual(x); }, [&cs](const Vec& x) { return cs.jacobian(x); }};
}

// ---------------------------------------------------------------------------
// Linear algebra

inline double condition_number(const Mat& J) {
  if (J.size() == 0) return 1.0;
  Eigen::JacobiSVD<Mat> svd(J);
  const auto& s = svd.singularValues();
  const double smax = s(0), smin = s(s.size() - 1);
  if (smax == 0.0) return std::numeric_limits<double>::infinity();
  if (J.rows() < J.cols() || smin == 0.0) return std::numeric_limits<double>::infinity();
  return smax / smin;
}

struct RankEstimate {
  int rank = 0;
  double threshold = 0.0;
  double smallest_retained = 0.0;  // |R_kk| of the last retained pivot
};

/// Numerical rank by column-pivoted Householder QR. Pivots with
/// |R_kk| <= max(rel * |R_00|, abs_floor) are treated as zero.
inline RankEstimate rank_estimate(const Mat& M, double rel_threshold = 1e-8, double abs_floor = 0.0) {
  RankEstimate out;
  if (M.rows() == 0 || M.cols() == 0) return out;
  Eigen::ColPivHouseholderQR<Mat> qr(M);
  const Mat R = qr.matrixQR().triangularView<Eigen::Upper>();
  const Eigen::Index k = std::min(M.rows(), M.cols());
  const double top = std::abs(R(0, 0));
  out.threshold = std::max(rel_threshold * top, abs_floor);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double d = std::abs(R(i, i));
    if (d > out.threshold && d > 0.0) {
      ++out.rank;
      out.smallest_retained = d;
    } else {
      break;
    }
  }
  return out;
}

struct LstsqResult {
  Vec x;
  double residual = 0.0;  // ||A x - b||_2
};

/// Minimum-norm least-squares solution.
inline LstsqResult lstsq(const Mat& A, const Vec& b) {
  if (A.rows() != b.size()) throw DimensionError("lstsq: row count mismatch");
  LstsqResult out;
  if (A.rows() == 0 || A.cols() == 0) {
    out.x = Vec::Zero(A.cols());
    out.residual = b.norm();
    return out;
  }
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(A);
  out.x = cod.solve(b);
  out.residual = (A * out.x - b).norm();
  return out;
}

// ---------------------------------------------------------------------------
// Newton

struct NewtonConfig {
  double tol_residual = 1e-10;
  double tol_step = 1e-12;
  int max_iters = 100;
  double damping = 0.5;
  double min_damping = 1e-8;
  double step_floor = 1.0;  // steps are small when <= tol_step * max(step_floor, |x|)
};

enum class NewtonStatus { Converged, NoConvergence, SingularJacobian };

inline const char* to_string(NewtonStatus s) {
  switch (s) {
    case NewtonStatus::Converged: return "Converged";
    case NewtonStatus::NoConvergence: return "NoConvergence";
    case NewtonStatus::SingularJacobian: return "SingularJacobian";
  }
  return "?";
}

struct NewtonResult {
  NewtonStatus status = NewtonStatus::NoConvergence;
  Vec x;
  double residual = std::numeric_limits<double>::infinity();
  int iterations = 0;
  double jac_condition = std::numeric_limits<double>::infinity();
  std::vector<double> residual_history;
  std::vector<double> step_history;
  bool converged() const { return status == NewtonStatus::Converged; }
};

/// Damped Newton with minimum-norm least-squares steps (so overdetermined and
/// rank-deficient systems are accepted) and backtracking on the residual
/// infinity norm.
inline NewtonResult newton_solve(const NumericSystem& sys, const Vec& x0, const NewtonConfig& cfg = {}) {
  NewtonResult res;
  Vec x = x0;
  Vec r = sys.residual(x);
  double rn = inf_norm(r);
  res.residual_history.push_back(rn);
  auto finish = [&](NewtonStatus st) {
    res.status = st;
    res.x = x;
    res.residual = rn;
    res.jac_condition = condition_number(sys.jacobian(x));
    return res;
  };
  if (!std::isfinite(rn)) return finish(NewtonStatus::NoConvergence);

  for (int it = 0; it < cfg.max_iters; ++it) {
    res.iterations = it + 1;
    const Mat J = sys.jacobian(x);
    Vec dx = J.size() ? Vec(Eigen::CompleteOrthogonalDecomposition<Mat>(J).solve(-r)) : Vec::Zero(x.size());
    if (!dx.allFinite()) return finish(NewtonStatus::SingularJacobian);
    const double dxn = dx.norm();
    const double small_step = cfg.tol_step * std::max(cfg.step_floor, x.norm());
    if (rn <= cfg.tol_residual && dxn <= small_step) return finish(NewtonStatus::Converged);

    bool accepted = false;
    double lambda = 1.0;
    Vec xn;
    Vec rnew;
    double rnn = 0.0;
    while (lambda >= cfg.min_damping) {
      xn = x + lambda * dx;
      rnew = sys.residual(xn);
      rnn = inf_norm(rnew);
      if (std::isfinite(rnn) &&
          (rnn <= (1.0 - 1e-4 * lambda) * rn || (rn <= cfg.tol_residual && rnn <= cfg.tol_residual))) {
        accepted = true;
        break;
      }
      lambda *= cfg.damping;
    }
    if (!accepted) {
      if (rn <= cfg.tol_residual) return finish(NewtonStatus::Converged);
      if (dxn <= small_step) return finish(NewtonStatus::NoConvergence);
      return finish(NewtonStatus::SingularJacobian);
    }
    const double prev = rn;
    x = xn;
    r = rnew;
    rn = rnn;
    res.step_history.push_back(lambda * dxn);
    res.residual_history.push_back(rn);
    if (prev <= cfg.tol_residual && rn >= 0.9 * prev) return finish(NewtonStatus::Converged);
  }
  return finish(rn <= cfg.tol_residual ? NewtonStatus::Converged : NewtonStatus::NoConvergence);
}

inline NewtonResult newton_solve(const CompiledSystem& cs, const Vec& x0, const NewtonConfig& cfg = {}) {
  return newton_solve(as_numeric(cs), x0, cfg);
}

/// Natural scale of each equation at x: the larger of the term-magnitude sum
/// and |J_i|_inf |x|_inf, or 1 when both vanish.
inline Vec row_scales(const CompiledSystem& cs, const Vec& x) {
  Vec s = cs.row_magnitudes(x);
  const Mat J = cs.jacobian(x);
  const double xn = inf_norm(x);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    const double jn = J.cols() ? J.row(i).lpNorm<Eigen::Infinity>() * xn : 0.0;
    s[i] = std::max(s[i], jn);
    if (!(s[i] > 0.0) || !std::isfinite(s[i])) s[i] = 1.0;
  }
  return s;
}

/// Max over rows of |r_i(x)| / scale_i(x).
inline double relative_residual(const CompiledSystem& cs, const Vec& x) {
  const Vec r = cs.residual(x);
  const Vec s = row_scales(cs, x);
  return inf_norm(r.cwiseQuotient(s));
}

/// Newton on the system with rows divided by their scales, so tolerances are
/// relative to the size of each equation's terms. Scales are frozen during a
/// run and refreshed (up to `restarts` times) until the relative residual at
/// the solution also meets the tolerance.
inline NewtonResult scaled_newton(const CompiledSystem& cs, const Vec& x0, const NewtonConfig& cfg = {},
                                  int restarts = 5) {
  NewtonResult nr;
  Vec start = x0;
  for (int k = 0; k <= restarts; ++k) {
    const Vec inv = row_scales(cs, start).cwiseInverse();
    NumericSystem sys{[&](const Vec& x) { return Vec(cs.residual(x).cwiseProduct(inv)); },
                      [&](const Vec& x) { return Mat(inv.asDiagonal() * cs.jacobian(x)); }};
    nr = newton_solve(sys, start, cfg);
    if (!nr.converged() || !nr.x.allFinite()) return nr;
    const double rel = relative_residual(cs, nr.x);
    if (rel <= cfg.tol_residual) {
      nr.residual = rel;
      return nr;
    }
    start = nr.x;
  }
  nr.status = NewtonStatus::NoConvergence;
  nr.residual = relative_residual(cs, nr.x);
  return nr;
}

/// Jacobian with entries at rounding level of their term magnitudes set to
/// zero and each row divided by its largest entry magnitude.
inline Mat normalized_jacobian(const CompiledSystem& cs, const Vec& x, double noise = 1e-10) {
  Mat J = cs.jacobian(x);
  const Mat M = cs.jacobian_magnitudes(x);
  for (Eigen::Index i = 0; i < J.rows(); ++i) {
    double scale = 0.0;
    for (Eigen::Index j = 0; j < J.cols(); ++j) {
      if (std::abs(J(i, j)) <= noise * M(i, j)) J(i, j) = 0.0;
      scale = std::max(scale, M(i, j));
    }
    if (scale > 0.0) J.row(i) /= scale;
  }
  return J;
}

// ---------------------------------------------------------------------------
// Sturm sequences over exact rationals

/// Dense univariate polynomial, coefficient of x^k at index k.
using UPoly = std::vector<Rational>;

namespace sturm_detail {

inline void trim(UPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline UPoly rem(UPoly a, const UPoly& b) {
  trim(a);
  const std::size_t db = b.size() - 1;
  while (a.size() >= b.size()) {
    const Rational q = a.back() / b.back();
    const std::size_t shift = a.size() - 1 - db;
    for (std::size_t i = 0; i <= db; ++i) a[shift + i] -= q * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

inline UPoly quot(UPoly a, const UPoly& b) {
  trim(a);
  if (a.size() < b.size()) return {};
  const std::size_t db = b.size() - 1;
  UPoly q(a.size() - db, Rational(0));
  while (a.size() >= b.size()) {
    const Rational c = a.back() / b.back();
    const std::size_t shift = a.size() - 1 - db;
    q[shift] = c;
    for (std::size_t i = 0; i <= db; ++i) a[shift + i] -= c * b[i];
    a.pop_back();
  }
  return q;
}

inline UPoly deriv(const UPoly& p) {
  UPoly d;
  for (std::size_t k = 1; k < p.size(); ++k) d.push_back(p[k] * Rational(static_cast<long>(k)));
  trim(d);
  return d;
}

inline UPoly gcd(UPoly a, UPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    UPoly r = rem(a, b);
    a = std::move(b);
    b = std::move(r);
  }
  return a;
}

inline Rational eval(const UPoly& p, const Rational& x) {
  Rational v = 0;
  for (std::size_t k = p.size(); k-- > 0;) v = v * x + p[k];
  return v;
}

inline int sign(const Rational& v) { return v > 0 ? 1 : (v < 0 ? -1 : 0); }

}  // namespace sturm_detail

/// Converts a one-variable polynomial to dense form.
inline UPoly to_upoly(const QPoly& p) {
  if (p.nvars() != 1) throw DimensionError("to_upoly: polynomial must be univariate");
  UPoly out;
  for (const auto& [e, c] : p.terms()) {
    if (out.size() <= e[0]) out.resize(e[0] + 1, Rational(0));
    out[e[0]] = c;
  }
  return out;
}

class SturmSequence {
 public:
  /// Builds the chain of the square-free part of p.
  explicit SturmSequence(UPoly p) {
    using namespace sturm_detail;
    trim(p);
    if (p.empty()) throw std::invalid_argument("sturm: polynomial is identically zero");
    const UPoly g = gcd(p, deriv(p));
    square_free_ = g.size() > 1 ? quot(p, g) : p;
    chain_.push_back(square_free_);
    chain_.push_back(deriv(square_free_));
    while (!chain_.back().empty()) {
      UPoly r = rem(chain_[chain_.size() - 2], chain_.back());
      for (auto& c : r) c = -c;
      if (r.empty()) break;
      chain_.push_back(std::move(r));
    }
    if (chain_.back().empty()) chain_.pop_back();
  }

  int variations(const Rational& x) const {
    int v = 0, last = 0;
    for (const UPoly& q : chain_) {
      const int s = sturm_detail::sign(sturm_detail::eval(q, x));
      if (s == 0) continue;
      if (last != 0 && s != last) ++v;
      last = s;
    }
    return v;
  }

  /// Number of distinct real roots in (a, b].
  int count(const Rational& a, const Rational& b) const { return variations(a) - variations(b); }

  const UPoly& square_free() const { return square_free_; }
  Rational value(const Rational& x) const { return sturm_detail::eval(square_free_, x); }

 private:
  UPoly square_free_;
  std::vector<UPoly> chain_;
};

struct RootInterval {
  Rational lo, hi;  // the root lies in [lo, hi]
  double approx() const {
    return static_cast<double>(lo) / 2.0 + static_cast<double>(hi) / 2.0;
  }
};

/// Isolates every distinct real root of p in [a, b] into disjoint intervals
/// of width at most `width`.
inline std::vector<RootInterval> sturm_roots(const UPoly& p, const Rational& a, const Rational& b,
                                             const Rational& width = Rational(1, 1000000000000LL)) {
  const SturmSequence s(p);
  std::vector<RootInterval> out;
  if (s.value(a) == 0) out.push_back({a, a});
  struct Job {
    Rational lo, hi;
    int n;
  };
  std::vector<Job> stack{{a, b, s.count(a, b)}};
  std::vector<RootInterval> found;
  while (!stack.empty()) {
    Job j = stack.back();
    stack.pop_back();
    if (j.n == 0) continue;
    if (j.n == 1 && j.hi - j.lo <= width) {
      found.push_back({j.lo, j.hi});
      continue;
    }
    const Rational mid = (j.lo + j.hi) / 2;
    if (j.n == 1 && s.value(mid) == 0) {
      found.push_back({mid, mid});
      continue;
    }
    const int left = s.count(j.lo, mid);
    stack.push_back({mid, j.hi, j.n - left});
    stack.push_back({j.lo, mid, left});
  }
  std::sort(found.begin(), found.end(), [](const RootInterval& x, const RootInterval& y) { return x.lo < y.lo; });
  out.insert(out.end(), found.begin(), found.end());
  return out;
}

inline std::vector<RootInterval> sturm_roots(const QPoly& p, double a, double b) {
  return sturm_roots(to_upoly(p), Rational(a), Rational(b));
}

}  // namespace bpl
