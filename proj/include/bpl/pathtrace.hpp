#pragma once

// Continuation of critical paths x(mu) on the cleared system as mu decreases
// geometrically, pathology detection, the multiplier-based existence test on
// perturbed varieties, and seed search.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/log.hpp"
#include "bpl/numerics.hpp"
#include "bpl/problem.hpp"
#include "bpl/systems.hpp"

namespace bpl {

class InfeasibleSeed : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct TraceConfig {
  double mu0 = 0.1;
  double theta = 0.5;
  int steps = 40;                  // samples at mu0 * theta^k, k = 0..steps-1
  int max_refinements = 20;        // sub-step halvings of log(mu) per step
  int max_mu0_halvings = 20;       // retries of the first solve at mu0 / 2^h
  double limit_tol = 1e-8;         // Cauchy tolerance of the last three samples
  double limit_mu = 1e-10;         // the last sample must lie below this mu
  double divergence_bound = 1e8;   // |x|_inf beyond this is divergence
  double rank_rel = 1e-8;          // isolation rank threshold
  NewtonConfig newton{1e-10, 1e-15, 100, 0.5, 1e-8, 0.0};  // iterate to the rounding floor
};

/// Applies the per-problem option overrides.
inline TraceConfig trace_config_for(const POProblem& p, TraceConfig cfg = {}) {
  if (p.options.mu0) cfg.mu0 = *p.options.mu0;
  if (p.options.theta) cfg.theta = *p.options.theta;
  if (p.options.steps) cfg.steps = *p.options.steps;
  if (p.options.tol) cfg.limit_tol = *p.options.tol;
  return cfg;
}

struct PathSample {
  double mu = 0.0;
  std::vector<double> x;
  double residual = 0.0;       // relative residual of the cleared system
  double jac_condition = 0.0;  // condition of the normalized Jacobian
  std::vector<double> gvals;
};

enum class TraceStatus { Converged, Diverged, LostIsolation, NoSolution, LeftInterior, Unfinished };

inline const char* to_string(TraceStatus s) {
  switch (s) {
    case TraceStatus::Converged: return "Converged";
    case TraceStatus::Diverged: return "Diverged";
    case TraceStatus::LostIsolation: return "LostIsolation";
    case TraceStatus::NoSolution: return "NoSolution";
    case TraceStatus::LeftInterior: return "LeftInterior";
    case TraceStatus::Unfinished: return "Unfinished";
  }
  return "?";
}

struct PathTrace {
  std::vector<std::string> varnames;
  std::vector<PathSample> samples;  // strictly decreasing mu
  TraceStatus status = TraceStatus::Unfinished;
  std::optional<std::vector<double>> limit;  // set on Converged, estimate on Unfinished
  std::string message;
  double mu0_requested = 0.0;
  double mu0_used = 0.0;
  int mu0_halvings = 0;
  double theta = 0.0;
  int steps = 0;
  int refinements = 0;  // total sub-step halvings used
};

struct IsolationCheck {
  bool isolated = false;
  int rank = 0;
  double jac_condition = 0.0;
};

namespace detail {

inline std::vector<RPoly> float_polys(const std::vector<QPoly>& ps) {
  std::vector<RPoly> out;
  for (const QPoly& p : ps) out.push_back(to_float(p));
  return out;
}

inline std::vector<double> eval_all(const std::vector<RPoly>& ps, const std::vector<double>& x) {
  std::vector<double> out;
  for (const RPoly& p : ps) out.push_back(p.evaluate(x));
  return out;
}

/// Per-coordinate Aitken delta-squared extrapolation from the deepest triple
/// of samples whose differences are resolved above rounding level; the last
/// value is kept for coordinates that never move or do not contract.
inline std::vector<double> extrapolate_limit(const std::vector<PathSample>& s) {
  std::vector<double> out = s.back().x;
  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (std::size_t k = s.size() - 1; k >= 2; --k) {
      const double a = s[k - 2].x[i], b = s[k - 1].x[i], c = s[k].x[i];
      const double d1 = b - a, d2 = c - b;
      const double noise = 1e3 * 8.0 * eps * std::max({std::abs(a), std::abs(b), std::abs(c)});
      if (std::abs(d2) <= noise || std::abs(d1) <= noise) continue;
      if (d1 * d2 > 0.0 && std::abs(d2) < std::abs(d1)) {
        const double corr = d2 * d2 / (d2 - d1);
        if (std::isfinite(corr)) out[i] = c - corr;
      }
      break;
    }
  }
  return out;
}

}  // namespace detail

/// Cleared system of a problem compiled once, evaluated at any mu.
class ClearedEvaluator {
 public:
  explicit ClearedEvaluator(const POProblem& prob)
      : system_(build_cleared_system(prob)), cs_(system_, {0.0}), g_(detail::float_polys(prob.gs)) {}

  const PolySystem& system() const { return system_; }
  CompiledSystem& compiled_at(double mu) {
    cs_.set_params({mu});
    return cs_;
  }
  std::vector<double> gvals(const std::vector<double>& x) const { return detail::eval_all(g_, x); }
  bool interior(const std::vector<double>& x) const {
    for (double g : gvals(x))
      if (!(g > 0.0)) return false;
    return true;
  }

 private:
  PolySystem system_;
  CompiledSystem cs_;
  std::vector<RPoly> g_;
};

/// Isolation test: full numerical rank of the normalized cleared Jacobian at
/// (mu, x).
inline IsolationCheck check_isolated(ClearedEvaluator& ev, double mu, const std::vector<double>& x,
                                     double rel = 1e-8) {
  const CompiledSystem& cs = ev.compiled_at(mu);
  const Mat J = normalized_jacobian(cs, to_vec(x));
  const RankEstimate re = rank_estimate(J, rel);
  return {re.rank == static_cast<int>(x.size()), re.rank, condition_number(J)};
}

inline IsolationCheck check_isolated(const POProblem& prob, double mu, const std::vector<double>& x,
                                     double rel = 1e-8) {
  ClearedEvaluator ev(prob);
  return check_isolated(ev, mu, x, rel);
}

namespace detail {

enum class SolveFailure { None, Newton, Exterior, Divergent };

struct SolveOutcome {
  SolveFailure failure = SolveFailure::None;
  PathSample sample;
  std::string note;
};

inline SolveOutcome solve_at(ClearedEvaluator& ev, const TraceConfig& cfg, double mu,
                             const std::vector<double>& start) {
  SolveOutcome out;
  const CompiledSystem& cs = ev.compiled_at(mu);
  const NewtonResult nr = scaled_newton(cs, to_vec(start), cfg.newton);
  const std::vector<double> x = to_std(nr.x);
  if (!nr.x.allFinite() || inf_norm(nr.x) > cfg.divergence_bound) {
    out.failure = SolveFailure::Divergent;
    out.note = "iterate exceeded the divergence bound";
    return out;
  }
  if (!nr.converged()) {
    out.failure = SolveFailure::Newton;
    out.note = std::string("Newton: ") + to_string(nr.status);
    return out;
  }
  out.sample.mu = mu;
  out.sample.x = x;
  out.sample.gvals = ev.gvals(x);
  if (!ev.interior(x)) {
    out.failure = SolveFailure::Exterior;
    out.note = "solution outside the strict interior";
    return out;
  }
  out.sample.residual = relative_residual(cs, nr.x);
  return out;
}

inline TraceStatus status_of(SolveFailure f) {
  switch (f) {
    case SolveFailure::Exterior: return TraceStatus::LeftInterior;
    case SolveFailure::Divergent: return TraceStatus::Diverged;
    default: return TraceStatus::NoSolution;
  }
}

}  // namespace detail

/// Traces the critical path through the seed x0 with mu_k = mu0 * theta^k.
inline PathTrace trace_path(const POProblem& prob, const std::vector<double>& x0, const TraceConfig& cfg = {}) {
  if (x0.size() != prob.nvars()) throw DimensionError("trace_path: seed has wrong dimension");
  if (!(cfg.mu0 > 0.0)) throw std::invalid_argument("trace_path: mu0 must be positive");
  if (!(cfg.theta > 0.0 && cfg.theta < 1.0)) throw std::invalid_argument("trace_path: theta must lie in (0,1)");
  if (cfg.steps < 1) throw std::invalid_argument("trace_path: steps must be positive");
  ClearedEvaluator ev(prob);
  if (!ev.interior(x0)) throw InfeasibleSeed("trace_path: seed is not strictly feasible");

  PathTrace tr;
  tr.varnames = prob.varnames;
  tr.mu0_requested = cfg.mu0;
  tr.theta = cfg.theta;
  tr.steps = cfg.steps;

  auto record = [&](PathSample s) -> bool {
    const IsolationCheck iso = check_isolated(ev, s.mu, s.x, cfg.rank_rel);
    s.jac_condition = iso.jac_condition;
    tr.samples.push_back(std::move(s));
    if (!iso.isolated) {
      tr.status = TraceStatus::LostIsolation;
      tr.message = "cleared Jacobian has rank " + std::to_string(iso.rank) + " < " +
                   std::to_string(prob.nvars()) + " at mu = " + format_number(tr.samples.back().mu);
      return false;
    }
    return true;
  };

  // first solve, halving mu0 until an interior solution near x0 is found
  double mu = cfg.mu0;
  detail::SolveOutcome first;
  for (int h = 0; h <= cfg.max_mu0_halvings; ++h, mu *= 0.5) {
    first = detail::solve_at(ev, cfg, mu, x0);
    if (first.failure == detail::SolveFailure::None) {
      tr.mu0_halvings = h;
      break;
    }
  }
  if (first.failure != detail::SolveFailure::None) {
    tr.status = TraceStatus::NoSolution;
    tr.message = "no interior solution of the cleared system near the seed for mu in [" +
                 format_number(cfg.mu0 / std::pow(2.0, cfg.max_mu0_halvings)) + ", " +
                 format_number(cfg.mu0) + "] (" + first.note + ")";
    return tr;
  }
  if (tr.mu0_halvings > 0)
    log::warn("mu0 halved ", tr.mu0_halvings, " time(s) to ", mu, " before the first solve succeeded");
  tr.mu0_used = mu;
  if (!record(first.sample)) return tr;

  for (int k = 1; k < cfg.steps; ++k) {
    const double target = tr.mu0_used * std::pow(cfg.theta, k);
    double mu_c = tr.samples.back().mu;
    std::vector<double> xc = tr.samples.back().x;
    double frac = 1.0;  // fraction of the remaining log-step attempted
    int halvings = 0;
    detail::SolveOutcome last;
    while (mu_c > target) {
      const double mu_try = (frac >= 1.0) ? target : mu_c * std::pow(target / mu_c, frac);
      last = detail::solve_at(ev, cfg, mu_try, xc);
      if (last.failure == detail::SolveFailure::None) {
        mu_c = mu_try;
        xc = last.sample.x;
        frac = std::min(1.0, 2.0 * frac);
        continue;
      }
      if (++halvings > cfg.max_refinements) break;
      ++tr.refinements;
      frac *= 0.5;
    }
    if (mu_c > target) {
      tr.status = detail::status_of(last.failure);
      tr.message = "continuation failed between mu = " + format_number(tr.samples.back().mu) +
                   " and mu = " + format_number(target) + " (" + last.note + ")";
      break;
    }
    if (!record(last.sample)) return tr;
  }

  if (tr.status == TraceStatus::Unfinished && tr.message.empty()) {
    const auto& s = tr.samples;
    if (s.size() >= 3) {
      const auto& a = s[s.size() - 3].x;
      const auto& b = s[s.size() - 2].x;
      const auto& c = s.back().x;
      double d = 0.0;
      for (std::size_t i = 0; i < c.size(); ++i)
        d = std::max({d, std::abs(c[i] - b[i]), std::abs(b[i] - a[i])});
      tr.limit = detail::extrapolate_limit(s);
      if (d <= cfg.limit_tol && s.back().mu < cfg.limit_mu) {
        tr.status = TraceStatus::Converged;
      } else {
        // persistent growth of |x| over the last five samples
        bool growing = s.size() >= 5;
        for (std::size_t i = s.size() - std::min<std::size_t>(s.size(), 5) + 1; growing && i < s.size(); ++i)
          growing = to_vec(s[i].x).norm() > to_vec(s[i - 1].x).norm();
        if (growing && to_vec(s.back().x).norm() >= 2.0 * to_vec(s[s.size() - 5].x).norm()) {
          tr.status = TraceStatus::Diverged;
          tr.limit.reset();
          tr.message = "|x| grows geometrically as mu decreases";
        } else {
          tr.message = "limit criterion not met: last steps differ by " + format_number(d) +
                       " at mu = " + format_number(s.back().mu);
        }
      }
    } else {
      tr.message = "fewer than three samples";
    }
  }
  if (tr.status == TraceStatus::Converged) tr.message = "limit reached";
  return tr;
}

// ---------------------------------------------------------------------------
// Existence via the multiplier branch of the KKT system on V_xi

enum class ExistenceVerdict { PathExists, NoPositiveRoot, Inconclusive };

inline const char* to_string(ExistenceVerdict v) {
  switch (v) {
    case ExistenceVerdict::PathExists: return "PathExists";
    case ExistenceVerdict::NoPositiveRoot: return "NoPositiveRoot";
    case ExistenceVerdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

struct ExistenceCheck {
  std::vector<double> xi_grid;
  std::vector<std::vector<double>> points;  // (x, u) along the grid
  std::vector<double> u;
  std::vector<double> xi_u;
  std::vector<int> sign_profile;  // sign of xi * u(xi)
  ExistenceVerdict verdict = ExistenceVerdict::Inconclusive;
  std::string message;
};

inline std::vector<double> default_xi_grid(int count = 30, double xi0 = 0.1, double ratio = 0.5) {
  std::vector<double> g;
  for (int k = 0; k < count; ++k) g.push_back(xi0 * std::pow(ratio, k));
  return g;
}

namespace detail {

/// First converged Newton start on a regular grid over [-2,2]^dim.
inline std::optional<Vec> grid_start(const CompiledSystem& cs, const NewtonConfig& cfg, int per_dim = 5) {
  const std::size_t dim = cs.nunknowns();
  std::vector<int> idx(dim, 0);
  for (;;) {
    Vec x(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i) x[static_cast<Eigen::Index>(i)] = -2.0 + 4.0 * (idx[i] + 0.5) / per_dim;
    const NewtonResult nr = scaled_newton(cs, x, cfg);
    if (nr.converged() && nr.x.allFinite()) return nr.x;
    std::size_t i = 0;
    while (i < dim && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == dim) return std::nullopt;
  }
}

}  // namespace detail

/// Continues the KKT branch of F on V_xi = {P = xi} along a decreasing grid
/// and inspects the sign of xi * u(xi).
inline ExistenceCheck check_existence_via_multiplier(const QPoly& F, const QPoly& P,
                                                     std::vector<double> xi_grid = default_xi_grid(),
                                                     std::optional<std::vector<double>> guess = std::nullopt) {
  ExistenceCheck out;
  for (std::size_t i = 1; i < xi_grid.size(); ++i)
    if (!(xi_grid[i] < xi_grid[i - 1] && xi_grid[i] > 0.0))
      throw std::invalid_argument("existence check: xi grid must decrease strictly towards 0");
  out.xi_grid = xi_grid;
  const PolySystem kkt = build_kkt_system(F, {P});
  CompiledSystem cs(kkt, {xi_grid.empty() ? 0.0 : xi_grid.front()});
  const std::size_t n = F.nvars();
  NewtonConfig ncfg{1e-10, 1e-12, 100, 0.5, 1e-8, 0.0};

  std::optional<Vec> x;
  if (guess) {
    if (guess->size() != n + 1) throw DimensionError("existence check: guess must hold (x, u)");
    x = to_vec(*guess);
  }
  for (std::size_t k = 0; k < xi_grid.size(); ++k) {
    cs.set_params({xi_grid[k]});
    if (!x) x = detail::grid_start(cs, ncfg);
    std::optional<NewtonResult> nr;
    if (x) nr = scaled_newton(cs, *x, ncfg);
    if (!nr || !nr->converged()) {
      out.verdict = ExistenceVerdict::Inconclusive;
      out.message = "KKT branch lost at xi = " + format_number(xi_grid[k]);
      return out;
    }
    x = nr->x;
    out.points.push_back(to_std(*x));
    const double u = (*x)[static_cast<Eigen::Index>(n)];
    out.u.push_back(u);
    out.xi_u.push_back(xi_grid[k] * u);
    out.sign_profile.push_back(xi_grid[k] * u > 0.0 ? 1 : (xi_grid[k] * u < 0.0 ? -1 : 0));
  }
  const bool all_pos = std::all_of(out.sign_profile.begin(), out.sign_profile.end(), [](int s) { return s > 0; });
  const bool all_nonpos = std::all_of(out.sign_profile.begin(), out.sign_profile.end(), [](int s) { return s <= 0; });
  const bool shrinking = out.xi_u.size() >= 2 && std::abs(out.xi_u.back()) < std::abs(out.xi_u.front());
  if (!out.xi_u.empty() && all_pos && shrinking) {
    out.verdict = ExistenceVerdict::PathExists;
    out.message = "xi*u(xi) is positive and decreases towards 0 along the grid";
  } else if (!out.xi_u.empty() && all_nonpos) {
    out.verdict = ExistenceVerdict::NoPositiveRoot;
    out.message = "xi*u(xi) <= 0 along the grid";
  } else {
    out.verdict = ExistenceVerdict::Inconclusive;
    out.message = "xi*u(xi) changes sign or does not decrease";
  }
  return out;
}

/// A real solution (x, u) of the KKT system on V_xi.
struct KKTSolution {
  std::vector<double> x;
  std::vector<double> u;
  double residual = 0.0;  // relative residual
};

/// Distinct real KKT solutions reached by scaled Newton from a regular grid of
/// starts over [lo, hi]^(n+s).
inline std::vector<KKTSolution> solve_kkt(const QPoly& F, const std::vector<QPoly>& Ps, const std::vector<double>& xi,
                                          int per_dim = 5, double lo = -2.0, double hi = 2.0,
                                          double merge_tol = 1e-8) {
  if (xi.size() != Ps.size()) throw DimensionError("solve_kkt: one xi value per constraint is required");
  const PolySystem kkt = build_kkt_system(F, Ps);
  const CompiledSystem cs(kkt, xi);
  const std::size_t n = F.nvars(), dim = cs.nunknowns();
  const NewtonConfig ncfg{1e-12, 1e-14, 100, 0.5, 1e-8, 0.0};
  std::vector<KKTSolution> out;
  std::vector<int> idx(dim, 0);
  for (;;) {
    Vec x0(static_cast<Eigen::Index>(dim));
    for (std::size_t i = 0; i < dim; ++i)
      x0[static_cast<Eigen::Index>(i)] = per_dim == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[i] / (per_dim - 1);
    const NewtonResult nr = scaled_newton(cs, x0, ncfg);
    if (nr.converged() && nr.x.allFinite()) {
      const bool seen = std::any_of(out.begin(), out.end(), [&](const KKTSolution& s) {
        Vec v(static_cast<Eigen::Index>(dim));
        for (std::size_t i = 0; i < n; ++i) v[static_cast<Eigen::Index>(i)] = s.x[i];
        for (std::size_t i = 0; i < s.u.size(); ++i) v[static_cast<Eigen::Index>(n + i)] = s.u[i];
        return (v - nr.x).lpNorm<Eigen::Infinity>() <= merge_tol * std::max(1.0, inf_norm(v));
      });
      if (!seen) {
        KKTSolution s;
        for (std::size_t i = 0; i < dim; ++i) (i < n ? s.x : s.u).push_back(nr.x[static_cast<Eigen::Index>(i)]);
        s.residual = relative_residual(cs, nr.x);
        out.push_back(std::move(s));
      }
    }
    std::size_t i = 0;
    while (i < dim && ++idx[i] == per_dim) idx[i++] = 0;
    if (i == dim) break;
  }
  std::sort(out.begin(), out.end(), [](const KKTSolution& a, const KKTSolution& b) {
    return std::lexicographical_compare(a.x.begin(), a.x.end(), b.x.begin(), b.x.end());
  });
  return out;
}

// ---------------------------------------------------------------------------
// Seed search

struct Seed {
  std::vector<double> point;     // best-ranked grid point of the basin
  std::vector<double> solution;  // cleared-system solution at mu0
  double residual = 0.0;         // relative cleared residual of the grid point at mu0
  int members = 0;               // grid points converging to this solution
};

/// Expands [lo, hi] to every coordinate or accepts per-coordinate pairs.
inline std::vector<std::pair<double, double>> expand_box(const std::vector<double>& box, std::size_t n) {
  std::vector<std::pair<double, double>> out;
  if (box.size() == 2) {
    out.assign(n, {box[0], box[1]});
  } else if (box.size() == 2 * n) {
    for (std::size_t i = 0; i < n; ++i) out.push_back({box[2 * i], box[2 * i + 1]});
  } else {
    throw std::invalid_argument("box must hold 2 or 2n numbers");
  }
  for (const auto& [lo, hi] : out)
    if (!(lo <= hi)) throw std::invalid_argument("box bounds must satisfy lo <= hi");
  return out;
}

inline std::vector<Seed> seed_search(const POProblem& prob, const std::vector<double>& box, int grid_per_dim = 16,
                                     double mu0 = 0.1, double merge_tol = 1e-6) {
  const std::size_t n = prob.nvars();
  const auto bounds = expand_box(box, n);
  ClearedEvaluator ev(prob);
  const CompiledSystem& cs = ev.compiled_at(mu0);

  struct Candidate {
    std::vector<double> x;
    double residual;
  };
  std::vector<Candidate> cands;
  std::vector<int> idx(n, 0);
  const int m = std::max(grid_per_dim, 1);
  for (;;) {
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto [lo, hi] = bounds[i];
      x[i] = m == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * idx[i] / (m - 1);
    }
    if (ev.interior(x)) cands.push_back({x, relative_residual(cs, to_vec(x))});
    std::size_t i = 0;
    while (i < n && ++idx[i] == m) idx[i++] = 0;
    if (i == n) break;
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [](const Candidate& a, const Candidate& b) { return a.residual < b.residual; });

  TraceConfig cfg;
  std::vector<Seed> seeds;
  for (const Candidate& c : cands) {
    const detail::SolveOutcome s = detail::solve_at(ev, cfg, mu0, c.x);
    if (s.failure != detail::SolveFailure::None) continue;
    auto same = std::find_if(seeds.begin(), seeds.end(), [&](const Seed& sd) {
      return (to_vec(sd.solution) - to_vec(s.sample.x)).lpNorm<Eigen::Infinity>() <= merge_tol;
    });
    if (same != seeds.end()) {
      ++same->members;
      continue;
    }
    seeds.push_back({c.x, s.sample.x, c.residual, 1});
  }
  return seeds;
}

// ---------------------------------------------------------------------------
// CSV export

inline std::string trace_csv(const PathTrace& tr) {
  std::ostringstream os;
  os.precision(17);
  os << "mu";
  for (const auto& v : tr.varnames) os << ',' << v;
  os << ",residual,jac_condition";
  const std::size_t r = tr.samples.empty() ? 0 : tr.samples.front().gvals.size();
  for (std::size_t i = 0; i < r; ++i) os << ",g" << (i + 1);
  os << '\n';
  for (const auto& s : tr.samples) {
    os << s.mu;
    for (double v : s.x) os << ',' << v;
    os << ',' << s.residual << ',' << s.jac_condition;
    for (double g : s.gvals) os << ',' << g;
    os << '\n';
  }
  return os.str();
}

/// Reads a CSV produced by trace_csv; the number of constraint columns is
/// taken from the g1..gr header entries.
inline PathTrace read_trace_csv(std::istream& in) {
  PathTrace tr;
  std::string line;
  if (!std::getline(in, line)) throw IoError("trace CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(cell);
  }
  const auto res = std::find(header.begin(), header.end(), "residual");
  if (header.empty() || header.front() != "mu" || res == header.end() || res + 1 == header.end() ||
      *(res + 1) != "jac_condition")
    throw ValidationError("trace CSV header must read mu,<vars>,residual,jac_condition,g1..gr");
  const std::size_t n = static_cast<std::size_t>(res - header.begin()) - 1;
  tr.varnames.assign(header.begin() + 1, res);
  const std::size_t r = header.size() - n - 3;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    if (v.size() != header.size()) throw ValidationError("trace CSV row has wrong column count");
    PathSample s;
    s.mu = v[0];
    s.x.assign(v.begin() + 1, v.begin() + 1 + static_cast<long>(n));
    s.residual = v[n + 1];
    s.jac_condition = v[n + 2];
    s.gvals.assign(v.begin() + static_cast<long>(n + 3), v.begin() + static_cast<long>(n + 3 + r));
    tr.samples.push_back(std::move(s));
  }
  return tr;
}

// ---------------------------------------------------------------------------
// JSON summaries

inline nlohmann::json trace_summary_json(const PathTrace& tr) {
  nlohmann::json j;
  j["status"] = to_string(tr.status);
  j["message"] = tr.message;
  j["samples"] = tr.samples.size();
  j["mu0_requested"] = tr.mu0_requested;
  j["mu0_used"] = tr.mu0_used;
  j["mu0_halvings"] = tr.mu0_halvings;
  j["mu0_auto_halved"] = tr.mu0_halvings > 0;
  j["theta"] = tr.theta;
  j["steps"] = tr.steps;
  j["refinements"] = tr.refinements;
  j["limit"] = tr.limit ? nlohmann::json(*tr.limit) : nlohmann::json(nullptr);
  if (!tr.samples.empty()) {
    j["last_mu"] = tr.samples.back().mu;
    j["last_x"] = tr.samples.back().x;
  }
  return j;
}

inline nlohmann::json existence_json(const ExistenceCheck& e) {
  return {{"verdict", to_string(e.verdict)}, {"message", e.message}, {"xi", e.xi_grid},
          {"u", e.u},                         {"xi_u", e.xi_u},         {"sign_profile", e.sign_profile}};
}

}  // namespace bpl
