#pragma once

// Classification of the limit of a traced path: stratum criticality with
// multiplier signs for regular boundary points, projective KKT limits for
// singular ones, and divergence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/pathtrace.hpp"
#include "bpl/strata.hpp"
#include "bpl/systems.hpp"

namespace bpl {

class UnstableNormalization : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Classification {
  StratumCritical,
  StratumCriticalPositiveMultipliers,
  NotStratumCritical,
  SingularBoundary,
  Unbounded,
  NotOnBoundary
};

inline const char* to_string(Classification c) {
  switch (c) {
    case Classification::StratumCritical: return "StratumCritical";
    case Classification::StratumCriticalPositiveMultipliers: return "StratumCriticalPositiveMultipliers";
    case Classification::NotStratumCritical: return "NotStratumCritical";
    case Classification::SingularBoundary: return "SingularBoundary";
    case Classification::Unbounded: return "Unbounded";
    case Classification::NotOnBoundary: return "NotOnBoundary";
  }
  return "?";
}

/// ((x0 : ... : xn), (u0 : ... : ur)) normalized so that the coordinate of
/// largest magnitude equals 1.
struct ProjectivePoint {
  std::vector<double> x;
  std::vector<double> u;
  double residual = 0.0;  // projective KKT residual at the point
  bool strictly_complementary = false;  // u_i != 0 for every constraint
};

struct ClassifyConfig {
  double stratum_tol = 1e-6;
  double critical_tol = 1e-6;
  double positive_tol = 1e-8;
  double complementarity_tol = 1e-6;
  double stability_tol = 1e-6;
  std::size_t stability_window = 5;
};

struct LimitReport {
  Classification classification = Classification::NotOnBoundary;
  std::optional<std::vector<double>> xbar;
  std::vector<std::size_t> active;
  int active_rank = 0;
  std::string general_position = "n/a";  // regular, singular, or n/a
  std::vector<double> multipliers;        // one per constraint, inactive 0
  std::vector<int> multiplier_signs;
  double stationarity_residual = 0.0;
  std::optional<bool> strict_complementarity;  // affine flag
  std::optional<ProjectivePoint> projective;
  std::optional<double> grad_f_norm;  // reported for interior limits
  std::string note;
};

/// Projective KKT residual of ((x0..xn),(u0..ur)): the homogenized central
/// path system at mu = 0.
inline double projective_kkt_residual(const POProblem& prob, const std::vector<double>& X,
                                      const std::vector<double>& U) {
  const ProjectiveSystem ps = build_projective_central(prob);
  std::vector<double> pt = X;
  pt.insert(pt.end(), U.begin(), U.end());
  pt.push_back(0.0);
  double r = 0.0;
  for (const QPoly& e : ps.system.equations) r = std::max(r, std::abs(to_float(e).evaluate(pt)));
  return r;
}

/// Membership and regularity of a point of a bi-homogeneous system: the point
/// is non-singular when the Jacobian in all of (X; U) has full row rank.
struct ProjectivePointCheck {
  double residual = 0.0;
  int rank = 0;
  int equations = 0;
  bool nonsingular = false;
};

inline ProjectivePointCheck check_projective_point(const ProjectiveSystem& ps, const std::vector<double>& X,
                                                   const std::vector<double>& U,
                                                   const std::vector<double>& params, double rel = 1e-8) {
  if (X.size() != ps.nx || U.size() != ps.nu) throw DimensionError("check_projective_point: block size mismatch");
  const CompiledSystem cs(ps.system, params);
  std::vector<double> pt = X;
  pt.insert(pt.end(), U.begin(), U.end());
  const Vec v = to_vec(pt);
  ProjectivePointCheck out;
  out.residual = inf_norm(cs.residual(v));
  out.rank = rank_estimate(cs.jacobian(v), rel).rank;
  out.equations = static_cast<int>(cs.nequations());
  out.nonsingular = out.rank == out.equations;
  return out;
}

namespace detail {

inline std::vector<double> normalize_max_abs(std::vector<double> v) {
  double m = 0.0;
  for (double x : v)
    if (std::abs(x) > std::abs(m)) m = x;
  if (m != 0.0)
    for (double& x : v) x /= m;
  return v;
}

}  // namespace detail

/// Limits of (1, x(mu)) and (1, u(mu)), u_i = mu / g_i(x(mu)), each divided by
/// its coordinate of largest magnitude. Only samples where every g_i is
/// resolved above its cancellation error are used; the deepest `window` of
/// them must agree within `tol`.
inline ProjectivePoint extract_projective_limit(const POProblem& prob, const PathTrace& tr, double tol = 1e-6,
                                                std::size_t window = 5, double complementarity_tol = 1e-6) {
  constexpr double eps = std::numeric_limits<double>::epsilon();
  std::vector<RPoly> gf;
  for (const QPoly& g : prob.gs) gf.push_back(to_float(g));
  std::vector<const PathSample*> usable;
  for (const PathSample& s : tr.samples) {
    bool ok = true;
    for (std::size_t i = 0; ok && i < gf.size(); ++i) {
      const double gi = gf[i].evaluate(s.x);
      ok = std::abs(gi) > 1e6 * eps * std::max(gf[i].magnitude(s.x), 1e-300);
    }
    if (ok) usable.push_back(&s);
  }
  std::sort(usable.begin(), usable.end(), [](const PathSample* a, const PathSample* b) { return a->mu > b->mu; });
  if (usable.size() < window)
    throw UnstableNormalization("too few numerically resolved samples for a projective limit");
  std::vector<std::vector<double>> xs, us;
  for (std::size_t k = usable.size() - window; k < usable.size(); ++k) {
    const PathSample& s = *usable[k];
    std::vector<double> X{1.0}, U{1.0};
    X.insert(X.end(), s.x.begin(), s.x.end());
    for (const RPoly& g : gf) U.push_back(s.mu / g.evaluate(s.x));
    xs.push_back(detail::normalize_max_abs(X));
    us.push_back(detail::normalize_max_abs(U));
  }
  double spread = 0.0;
  for (std::size_t k = 1; k < xs.size(); ++k) {
    spread = std::max(spread, (to_vec(xs[k]) - to_vec(xs[k - 1])).lpNorm<Eigen::Infinity>());
    spread = std::max(spread, (to_vec(us[k]) - to_vec(us[k - 1])).lpNorm<Eigen::Infinity>());
  }
  if (spread > tol)
    throw UnstableNormalization("normalized primal/dual pair varies by " + format_number(spread) +
                                " over the last samples");
  ProjectivePoint pp{xs.back(), us.back(), 0.0, true};
  pp.residual = projective_kkt_residual(prob, pp.x, pp.u);
  for (std::size_t i = 1; i < pp.u.size(); ++i)
    if (std::abs(pp.u[i]) <= complementarity_tol) pp.strictly_complementary = false;
  return pp;
}

inline LimitReport classify_limit(const POProblem& prob, const PathTrace& tr, const ClassifyConfig& cfg = {}) {
  LimitReport rep;
  auto attach_projective = [&] {
    try {
      rep.projective = extract_projective_limit(prob, tr, cfg.stability_tol, cfg.stability_window,
                                                cfg.complementarity_tol);
    } catch (const UnstableNormalization& e) {
      rep.note += std::string(rep.note.empty() ? "" : "; ") + e.what();
    }
  };
  if (tr.status == TraceStatus::Diverged) {
    rep.classification = Classification::Unbounded;
    attach_projective();
    return rep;
  }
  if (tr.status != TraceStatus::Converged || !tr.limit)
    throw std::invalid_argument(std::string("classify_limit: trace status is ") + to_string(tr.status));

  const std::vector<double>& x = *tr.limit;
  rep.xbar = x;
  rep.multipliers.assign(prob.gs.size(), 0.0);
  Stratum st;
  try {
    st = locate_stratum(prob.gs, x, cfg.stratum_tol);
  } catch (const NotOnBoundary&) {
    rep.classification = Classification::NotOnBoundary;
    double gn = 0.0;
    for (const QPoly& d : gradient(prob.f)) gn = std::max(gn, std::abs(to_float(d).evaluate(x)));
    rep.grad_f_norm = gn;
    rep.note = gn <= cfg.critical_tol ? "interior limit with vanishing objective gradient"
                                      : "interior limit with nonzero objective gradient";
    return rep;
  }
  rep.active = st.active;
  const RankEstimate re = rank_estimate(active_gradients(prob.gs, st.active, x), 1e-8, kGradientRankFloor);
  rep.active_rank = re.rank;
  attach_projective();
  if (re.rank < static_cast<int>(st.active.size())) {
    rep.general_position = "singular";
    rep.classification = Classification::SingularBoundary;
    return rep;
  }
  rep.general_position = "regular";
  const StratumCriticality sc = critical_on_stratum(prob.f, prob.gs, st, x, cfg.critical_tol);
  rep.multipliers = sc.multipliers;
  rep.stationarity_residual = sc.stationarity_residual;
  bool positive = true;
  for (std::size_t i : st.active) positive = positive && sc.multipliers[i] > cfg.positive_tol;
  if (!sc.is_critical)
    rep.classification = Classification::NotStratumCritical;
  else
    rep.classification =
        positive ? Classification::StratumCriticalPositiveMultipliers : Classification::StratumCritical;
  double sc_min = INFINITY;
  for (std::size_t i = 0; i < prob.gs.size(); ++i)
    sc_min = std::min(sc_min, to_float(prob.gs[i]).evaluate(x) + rep.multipliers[i]);
  rep.strict_complementarity = sc_min > cfg.complementarity_tol;
  for (double u : rep.multipliers) rep.multiplier_signs.push_back(u > cfg.positive_tol ? 1 : (u < -cfg.positive_tol ? -1 : 0));
  return rep;
}

inline nlohmann::json projective_json(const ProjectivePoint& p) {
  return {{"x", p.x}, {"u", p.u}, {"residual", p.residual}, {"strictly_complementary", p.strictly_complementary}};
}

inline nlohmann::json limit_report_json(const LimitReport& r) {
  nlohmann::json j;
  j["classification"] = to_string(r.classification);
  j["xbar"] = r.xbar ? nlohmann::json(*r.xbar) : nlohmann::json(nullptr);
  j["active"] = one_based(r.active);
  j["active_rank"] = r.active_rank;
  j["general_position"] = r.general_position;
  j["multipliers"] = r.multipliers;
  j["multiplier_signs"] = r.multiplier_signs;
  j["stationarity_residual"] = r.stationarity_residual;
  j["strict_complementarity"] =
      r.strict_complementarity ? nlohmann::json(*r.strict_complementarity) : nlohmann::json(nullptr);
  j["projective"] = r.projective ? projective_json(*r.projective) : nlohmann::json(nullptr);
  if (r.grad_f_norm) j["grad_f_norm"] = *r.grad_f_norm;
  j["note"] = r.note;
  return j;
}

}  // namespace bpl
