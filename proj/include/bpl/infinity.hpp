#pragma once

// Real zeros at infinity of a polynomial family: common real zeros of the
// leading forms on the unit sphere, decided by subdivision of the cube faces
// y_a = 1 with interval exclusion and Newton-polished witnesses. Each level of
// depth bisects every free coordinate of a box.

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/numerics.hpp"
#include "bpl/polynomial.hpp"

namespace bpl {

struct Interval {
  double lo = 0.0, hi = 0.0;

  bool contains_zero() const { return lo <= 0.0 && hi >= 0.0; }
  double width() const { return hi - lo; }

  friend Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
  friend Interval operator*(Interval a, Interval b) {
    const double p[] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    return {*std::min_element(p, p + 4), *std::max_element(p, p + 4)};
  }
  friend Interval operator*(double c, Interval a) { return c >= 0 ? Interval{c * a.lo, c * a.hi} : Interval{c * a.hi, c * a.lo}; }
};

/// x^k with the even-power rule, so x^2 over [-1, 1] is [0, 1].
inline Interval ipow(Interval x, unsigned k) {
  if (k == 0) return {1.0, 1.0};
  const double a = std::pow(x.lo, static_cast<double>(k)), b = std::pow(x.hi, static_cast<double>(k));
  if (k % 2 == 1) return {a, b};
  if (x.lo >= 0.0) return {a, b};
  if (x.hi <= 0.0) return {b, a};
  return {0.0, std::max(a, b)};
}

/// Naive interval evaluation: the sum of per-term interval products.
inline Interval interval_eval(const RPoly& p, const std::vector<Interval>& box) {
  Interval acc{0.0, 0.0};
  for (const auto& [e, c] : p.terms()) {
    Interval t{1.0, 1.0};
    for (std::size_t j = 0; j < e.size(); ++j)
      if (e[j]) t = t * ipow(box[j], e[j]);
    acc = acc + c * t;
  }
  return acc;
}

/// Interval enclosure from the expansion of p about the box center, evaluated
/// over the symmetric radii. Tighter than interval_eval on small boxes.
inline Interval centered_eval(const RPoly& p, const std::vector<Interval>& box) {
  const std::size_t n = box.size();
  std::vector<double> mid(n);
  std::vector<Interval> radii(n);
  for (std::size_t j = 0; j < n; ++j) {
    mid[j] = 0.5 * (box[j].lo + box[j].hi);
    const double r = 0.5 * box[j].width();
    radii[j] = {-r, r};
  }
  // c x^e = c prod_j sum_{b_j <= e_j} C(e_j, b_j) mid_j^{e_j - b_j} h_j^{b_j}
  std::map<Exponents, double> shifted;
  for (const auto& [e, c] : p.terms()) {
    Exponents b(n, 0u);
    while (true) {
      double coef = c;
      for (std::size_t j = 0; j < n; ++j) {
        double binom = 1.0;
        for (unsigned k = 0; k < b[j]; ++k) binom = binom * (e[j] - k) / (k + 1);
        coef *= binom * std::pow(mid[j], static_cast<double>(e[j] - b[j]));
      }
      if (coef != 0.0) shifted[b] += coef;
      std::size_t j = 0;
      while (j < n && b[j] == e[j]) b[j++] = 0;
      if (j == n) break;
      ++b[j];
    }
  }
  Interval acc{0.0, 0.0};
  for (const auto& [b, c] : shifted) {
    Interval t{1.0, 1.0};
    for (std::size_t j = 0; j < n; ++j)
      if (b[j]) t = t * ipow(radii[j], b[j]);
    acc = acc + c * t;
  }
  return acc;
}

/// True when some enclosure of p over the box excludes zero.
inline bool excludes_zero(const RPoly& p, const std::vector<Interval>& box) {
  return !interval_eval(p, box).contains_zero() || !centered_eval(p, box).contains_zero();
}

enum class InfinityVerdict { EmptyAtInfinity, NonemptyAtInfinity, Undecided };

inline const char* to_string(InfinityVerdict v) {
  switch (v) {
    case InfinityVerdict::EmptyAtInfinity: return "EmptyAtInfinity";
    case InfinityVerdict::NonemptyAtInfinity: return "NonemptyAtInfinity";
    case InfinityVerdict::Undecided: return "Undecided";
  }
  return "?";
}

struct InfinityCertificate {
  InfinityVerdict verdict = InfinityVerdict::Undecided;
  std::vector<std::vector<double>> witnesses;  // unit directions
  int depth = 0;                               // deepest subdivision level used
  double tol = 0.0;
  std::size_t boxes = 0;
  std::size_t undecided_boxes = 0;
};

struct InfinityOptions {
  int max_depth = 24;
  double tol = 1e-9;
  std::size_t max_boxes = 200000;
  std::size_t max_witnesses = 8;
};

inline double max_abs_form(const std::vector<RPoly>& forms, const std::vector<double>& y) {
  double m = 0.0;
  for (const RPoly& f : forms) m = std::max(m, std::abs(f.evaluate(y)));
  return m;
}

inline InfinityCertificate certify_infinity(const std::vector<QPoly>& Ps, const InfinityOptions& opt = {}) {
  if (Ps.empty()) throw std::invalid_argument("certify_infinity: empty family");
  const std::size_t n = Ps.front().nvars();
  if (n == 0) throw std::invalid_argument("certify_infinity: no variables");
  std::vector<RPoly> forms;
  std::vector<QPoly> qforms;
  for (const QPoly& P : Ps) {
    if (P.nvars() != n) throw DimensionError("certify_infinity: variable count mismatch");
    if (P.is_zero()) continue;
    qforms.push_back(leading_form(P));
    forms.push_back(to_float(qforms.back()));
  }
  InfinityCertificate cert;
  cert.tol = opt.tol;
  if (forms.empty()) {
    // every member vanishes identically: all directions are zeros at infinity
    std::vector<double> e(n, 0.0);
    e[0] = 1.0;
    cert.witnesses.push_back(e);
    cert.verdict = InfinityVerdict::NonemptyAtInfinity;
    return cert;
  }

  struct Box {
    std::size_t face;
    std::vector<Interval> iv;  // all n coordinates, iv[face] = [1, 1]
    int depth;
  };
  std::deque<Box> queue;
  for (std::size_t a = 0; a < n; ++a) {
    std::vector<Interval> iv(n, Interval{-1.0, 1.0});
    iv[a] = {1.0, 1.0};
    queue.push_back({a, iv, 0});
  }

  // face-restricted systems for the Newton polish
  std::vector<CompiledSystem> face_sys;
  for (std::size_t a = 0; a < n; ++a) {
    PolySystem s{{}, default_varnames(n - 1), {}};
    const std::size_t drop[] = {a};
    for (const QPoly& L : qforms) s.equations.push_back(drop_variables(substitute(L, a, Rational(1)), drop));
    face_sys.emplace_back(s);
  }
  const NewtonConfig ncfg{opt.tol * 1e-2, 1e-13, 40, 0.5, 1e-8, 1.0};

  auto to_face = [&](const std::vector<double>& y, std::size_t a) -> std::optional<std::vector<double>> {
    if (std::abs(y[a]) < 1e-300) return std::nullopt;
    std::vector<double> z(n);
    for (std::size_t j = 0; j < n; ++j) z[j] = y[j] / y[a];
    return z;
  };
  auto in_box = [&](const Box& b, const std::vector<double>& z, double pad) {
    for (std::size_t j = 0; j < n; ++j)
      if (j != b.face && (z[j] < b.iv[j].lo - pad || z[j] > b.iv[j].hi + pad)) return false;
    return true;
  };
  auto holds_witness = [&](const Box& b) {
    for (const auto& w : cert.witnesses)
      for (double sgn : {1.0, -1.0}) {
        std::vector<double> y = w;
        for (double& v : y) v *= sgn;
        if (y[b.face] <= 0.0) continue;
        if (auto z = to_face(y, b.face); z && in_box(b, *z, 1e-12)) return true;
      }
    return false;
  };
  auto try_polish = [&](const Box& b) {
    Vec start(static_cast<Eigen::Index>(n - 1));
    for (std::size_t j = 0, k = 0; j < n; ++j)
      if (j != b.face) start[static_cast<Eigen::Index>(k++)] = 0.5 * (b.iv[j].lo + b.iv[j].hi);
    const NewtonResult nr = newton_solve(face_sys[b.face], start, ncfg);
    if (!nr.converged() || !nr.x.allFinite()) return;
    std::vector<double> y(n);
    for (std::size_t j = 0, k = 0; j < n; ++j) y[j] = (j == b.face) ? 1.0 : nr.x[static_cast<Eigen::Index>(k++)];
    double width = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      if (j != b.face) width = std::max(width, b.iv[j].width());
    if (!in_box(b, y, width)) return;
    const double norm = to_vec(y).norm();
    for (double& v : y) v /= norm;
    const auto big = std::max_element(y.begin(), y.end(), [](double p, double q) { return std::abs(p) < std::abs(q); });
    if (*big < 0.0)
      for (double& v : y) v = -v;
    if (max_abs_form(forms, y) > opt.tol) return;
    for (const auto& w : cert.witnesses)
      if ((to_vec(w) - to_vec(y)).lpNorm<Eigen::Infinity>() <= 1e-6) return;
    cert.witnesses.push_back(y);
  };

  while (!queue.empty()) {
    if (cert.witnesses.size() >= opt.max_witnesses) break;
    if (cert.boxes >= opt.max_boxes) {
      cert.undecided_boxes += queue.size();
      break;
    }
    Box b = std::move(queue.front());
    queue.pop_front();
    ++cert.boxes;
    cert.depth = std::max(cert.depth, b.depth);
    bool excluded = false;
    for (const RPoly& f : forms)
      if (excludes_zero(f, b.iv)) {
        excluded = true;
        break;
      }
    if (excluded) continue;
    if (holds_witness(b)) continue;
    try_polish(b);
    if (holds_witness(b)) continue;
    if (b.depth >= opt.max_depth || n == 1) {
      ++cert.undecided_boxes;
      continue;
    }
    std::vector<Box> children{b};
    for (std::size_t j = 0; j < n; ++j) {
      if (j == b.face) continue;
      const double mid = 0.5 * (b.iv[j].lo + b.iv[j].hi);
      std::vector<Box> next;
      for (Box c : children) {
        Box hi = c;
        c.iv[j].hi = mid;
        hi.iv[j].lo = mid;
        next.push_back(std::move(c));
        next.push_back(std::move(hi));
      }
      children = std::move(next);
    }
    for (Box& c : children) {
      c.depth = b.depth + 1;
      queue.push_back(std::move(c));
    }
  }
  if (!cert.witnesses.empty())
    cert.verdict = InfinityVerdict::NonemptyAtInfinity;
  else if (cert.undecided_boxes > 0)
    cert.verdict = InfinityVerdict::Undecided;
  else
    cert.verdict = InfinityVerdict::EmptyAtInfinity;
  return cert;
}

inline nlohmann::json infinity_json(const InfinityCertificate& c) {
  nlohmann::json j{{"verdict", to_string(c.verdict)}, {"depth", c.depth}, {"tol", c.tol}, {"boxes", c.boxes}};
  if (!c.witnesses.empty()) {
    j["witness"] = c.witnesses.front();
    j["witnesses"] = c.witnesses;
  }
  return j;
}

}  // namespace bpl
