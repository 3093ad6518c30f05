#pragma once

// Numerical Puiseux asymptotics of a traced path: per-coordinate exponents of
// |x_i(mu) - xbar_i| from log-log regression, a reparametrization power rho
// from rational reconstruction, and a finite-difference smoothness check of
// t -> x(t^rho) at t = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/pathtrace.hpp"

namespace bpl {

class InsufficientSamples : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoFiniteExponent : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct FitConfig {
  std::size_t min_samples = 12;  // usable samples required in the trace
  std::size_t min_window = 6;    // points in the regression window
  double window_decades = 1.0;   // the window spans at least this many decades of mu
  double r2_min = 0.999;
  double floor_abs = 0.0;        // extra absolute deviation floor
};

struct PowerFit {
  double r = 0.0;
  double stderr_ = 0.0;
  double r2 = 0.0;
  std::size_t npoints = 0;
  double mu_lo = 0.0, mu_hi = 0.0;
  bool r2_ok = false;
};

struct CoordExponent {
  std::size_t coord = 0;
  bool exact = false;  // deviation below the floor throughout: exponent infinity
  PowerFit fit;
};

struct ExponentFit {
  std::vector<CoordExponent> coords;
  std::optional<PowerFit> overall;  // for |x(mu) - xbar|
  std::vector<double> floors;
};

/// Least-squares slope of log|d| against log mu over the deepest window.
/// `mus` and `devs` hold only usable points, sorted by increasing mu.
inline PowerFit fit_window(const std::vector<double>& mus, const std::vector<double>& devs, const FitConfig& cfg) {
  const std::size_t total = mus.size();
  std::size_t k = std::min(total, cfg.min_window);
  while (k < total && mus[k] <= mus.front() * std::pow(10.0, cfg.window_decades)) ++k;
  PowerFit pf;
  pf.npoints = k;
  pf.mu_lo = mus.front();
  pf.mu_hi = mus[k - 1];
  std::vector<double> t(k), y(k);
  for (std::size_t i = 0; i < k; ++i) {
    t[i] = std::log(mus[i]);
    y[i] = std::log(std::abs(devs[i]));
  }
  const double tm = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(k);
  const double ym = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(k);
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    stt += (t[i] - tm) * (t[i] - tm);
    sty += (t[i] - tm) * (y[i] - ym);
    syy += (y[i] - ym) * (y[i] - ym);
  }
  pf.r = stt > 0.0 ? sty / stt : 0.0;
  double ssr = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double e = y[i] - ym - pf.r * (t[i] - tm);
    ssr += e * e;
  }
  pf.r2 = syy > 0.0 ? 1.0 - ssr / syy : 1.0;
  pf.stderr_ = (k > 2 && stt > 0.0) ? std::sqrt(ssr / static_cast<double>(k - 2) / stt) : 0.0;
  pf.r2_ok = pf.r2 >= cfg.r2_min;
  return pf;
}

/// Fits exponents r_i with |x_i(mu) - xbar_i| ~ C mu^{r_i}. Deviations below
/// 10 * max(floor_abs, 8 eps max(1, |xbar_i|)) are not used; a coordinate
/// with fewer than min_window usable points is reported exact.
inline ExponentFit fit_exponents(const PathTrace& tr, const std::vector<double>& xbar, const FitConfig& cfg = {}) {
  const std::size_t n = xbar.size();
  std::vector<const PathSample*> s;
  for (const auto& smp : tr.samples) s.push_back(&smp);
  std::sort(s.begin(), s.end(), [](const PathSample* a, const PathSample* b) { return a->mu < b->mu; });
  if (s.size() < cfg.min_samples)
    throw InsufficientSamples("fit_exponents: trace has " + std::to_string(s.size()) + " samples, need " +
                              std::to_string(cfg.min_samples));
  constexpr double eps = std::numeric_limits<double>::epsilon();
  ExponentFit out;
  double overall_floor = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double floor = 10.0 * std::max(cfg.floor_abs, 8.0 * eps * std::max(1.0, std::abs(xbar[i])));
    out.floors.push_back(floor);
    overall_floor = std::max(overall_floor, floor);
    std::vector<double> mus, devs;
    for (const PathSample* p : s) {
      const double d = p->x.at(i) - xbar[i];
      if (std::abs(d) > floor) {
        mus.push_back(p->mu);
        devs.push_back(d);
      }
    }
    CoordExponent ce;
    ce.coord = i;
    if (mus.size() < cfg.min_window)
      ce.exact = true;
    else
      ce.fit = fit_window(mus, devs, cfg);
    out.coords.push_back(ce);
  }
  std::vector<double> mus, devs;
  for (const PathSample* p : s) {
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) d += (p->x[i] - xbar[i]) * (p->x[i] - xbar[i]);
    d = std::sqrt(d);
    if (d > overall_floor) {
      mus.push_back(p->mu);
      devs.push_back(d);
    }
  }
  if (mus.size() >= cfg.min_window) out.overall = fit_window(mus, devs, cfg);
  return out;
}

// ---------------------------------------------------------------------------
// Reparametrization

struct RationalApprox {
  long p = 0;
  long q = 1;
};

/// First continued-fraction convergent p/q (q <= max_den) within tol of x,
/// or the last convergent under the cap when none is.
inline RationalApprox rational_reconstruct(double x, long max_den, double tol) {
  long h0 = 1, h1 = 0, k0 = 0, k1 = 1;  // h_{-1}, h_{-2}, k_{-1}, k_{-2}
  double v = x;
  RationalApprox best{static_cast<long>(std::llround(x)), 1};
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(v);
    const long ai = static_cast<long>(a);
    const long h = ai * h0 + h1, k = ai * k0 + k1;
    if (k > max_den) break;
    best = {h, k};
    if (std::abs(x - static_cast<double>(h) / static_cast<double>(k)) <= tol) break;
    h1 = h0;
    h0 = h;
    k1 = k0;
    k0 = k;
    const double frac = v - a;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  return best;
}

struct ReparamTerm {
  std::size_t coord = 0;
  double r = 0.0;
  RationalApprox approx;
};

struct ReparamProposal {
  int rho = 1;
  int gamma = 1;  // reported equal to rho
  std::vector<ReparamTerm> rationale;
};

inline ReparamProposal propose_rho(const ExponentFit& fit, long max_den = 16) {
  ReparamProposal out;
  long l = 1;
  for (const auto& c : fit.coords) {
    if (c.exact) continue;
    const double tol = std::max(2.0 * c.fit.stderr_, 5e-3);
    const RationalApprox ra = rational_reconstruct(c.fit.r, max_den, tol);
    out.rationale.push_back({c.coord, c.fit.r, ra});
    l = std::lcm(l, ra.q);
  }
  if (out.rationale.empty()) throw NoFiniteExponent("propose_rho: every coordinate is exact");
  out.rho = static_cast<int>(l);
  out.gamma = out.rho;
  return out;
}

// ---------------------------------------------------------------------------
// Smoothness after reparametrization

struct OrderDiagnostic {
  int order = 0;
  bool passed = false;
  std::vector<std::vector<double>> estimates;  // per coordinate, deepest usable estimates
  double worst_change = 0.0;                   // max successive change / tolerance
};

struct SmoothnessReport {
  int rho = 1;
  std::vector<OrderDiagnostic> orders;
  int orders_passed = 0;  // consecutive passing orders starting at 1
};

namespace detail {

/// Divided difference f[t_0..t_m] = sum w_k f_k with the magnitude sum |w_k f_k|
/// that bounds its sensitivity to relative rounding of the values.
inline std::pair<double, double> divided_difference(const std::vector<double>& t, const std::vector<double>& f) {
  double value = 0.0, amp = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    double w = 1.0;
    for (std::size_t l = 0; l < t.size(); ++l)
      if (l != k) w /= (t[k] - t[l]);
    value += w * f[k];
    amp += std::abs(w * f[k]);
  }
  return {value, amp};
}

}  // namespace detail

/// Estimates d^m/dt^m x(t^rho) at t = 0 from divided differences on the nodes
/// (0, t_j, ..., t_{j+m-1}) with x(0) = xbar, and requires the deepest four
/// usable estimates to agree within 1% of the largest estimate plus noise.
inline SmoothnessReport check_smooth_after_reparam(const PathTrace& tr, const std::vector<double>& xbar, int rho,
                                                   int max_order = 2) {
  if (rho < 1) throw std::invalid_argument("rho must be at least 1");
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<const PathSample*> s;
  for (const auto& smp : tr.samples) s.push_back(&smp);
  std::sort(s.begin(), s.end(), [](const PathSample* a, const PathSample* b) { return a->mu > b->mu; });
  SmoothnessReport rep;
  rep.rho = rho;
  bool chain = true;
  for (int m = 1; m <= max_order; ++m) {
    OrderDiagnostic od;
    od.order = m;
    od.passed = true;
    double factorial = 1.0;
    for (int i = 2; i <= m; ++i) factorial *= i;
    for (std::size_t c = 0; c < xbar.size(); ++c) {
      const double abs_floor = 1e-8 * std::max(1.0, std::abs(xbar[c]));
      std::vector<double> est, noise;
      for (std::size_t j = 0; j + static_cast<std::size_t>(m) <= s.size(); ++j) {
        std::vector<double> t{0.0}, f{xbar[c]};
        for (int l = 0; l < m; ++l) {
          t.push_back(std::pow(s[j + l]->mu, 1.0 / rho));
          f.push_back(s[j + l]->x[c]);
        }
        const auto [dd, amp] = detail::divided_difference(t, f);
        const double e = factorial * dd;
        const double nz = factorial * amp * 8.0 * eps;
        if (std::isfinite(e) && nz <= 1e-2 * std::max(std::abs(e), abs_floor)) {
          est.push_back(e);
          noise.push_back(nz);
        }
      }
      std::vector<double> deepest;
      bool ok = est.size() >= 2;
      if (ok) {
        double S = 0.0;
        for (double e : est) S = std::max(S, std::abs(e));
        const std::size_t from = est.size() > 4 ? est.size() - 4 : 0;
        for (std::size_t j = from; j < est.size(); ++j) deepest.push_back(est[j]);
        for (std::size_t j = from + 1; j < est.size(); ++j) {
          const double tol = 0.01 * S + 2.0 * (noise[j] + noise[j - 1]);
          const double change = std::abs(est[j] - est[j - 1]);
          od.worst_change = std::max(od.worst_change, tol > 0.0 ? change / tol : (change > 0.0 ? INFINITY : 0.0));
          if (change > tol) ok = false;
        }
      }
      od.estimates.push_back(deepest);
      od.passed = od.passed && ok;
    }
    chain = chain && od.passed;
    if (chain) rep.orders_passed = m;
    rep.orders.push_back(std::move(od));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json asymptotics_json(const ExponentFit& fit, const std::optional<ReparamProposal>& rho,
                                       const std::optional<SmoothnessReport>& smooth) {
  nlohmann::json ex = nlohmann::json::array();
  for (const auto& c : fit.coords) {
    if (c.exact)
      ex.push_back("exact");
    else
      ex.push_back({{"coord", c.coord + 1},
                    {"r", c.fit.r},
                    {"stderr", c.fit.stderr_},
                    {"r2", c.fit.r2},
                    {"window", {c.fit.mu_lo, c.fit.mu_hi}}});
  }
  nlohmann::json j{{"exponents", ex}};
  j["overall"] = fit.overall ? nlohmann::json{{"r", fit.overall->r}, {"stderr", fit.overall->stderr_}}
                             : nlohmann::json(nullptr);
  j["rho"] = rho ? nlohmann::json(rho->rho) : nlohmann::json(nullptr);
  j["gamma"] = rho ? nlohmann::json(rho->gamma) : nlohmann::json(nullptr);
  j["smooth_orders_passed"] = smooth ? nlohmann::json(smooth->orders_passed) : nlohmann::json(nullptr);
  return j;
}

}  // namespace bpl
