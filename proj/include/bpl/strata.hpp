#pragma once

// Canonical stratification of S_= for constraint families in general
// position: strata indexed by active sets, membership, general-position
// verification at discovered zeros, and critical points on strata.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/numerics.hpp"
#include "bpl/polynomial.hpp"

namespace bpl {

class NotOnBoundary : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RankDeficientActiveSet : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Absolute floor below which active-gradient pivots count as zero.
inline constexpr double kGradientRankFloor = 1e-6;

struct Stratum {
  std::vector<std::size_t> active;                  // 0-based constraint indices
  int dim = 0;                                      // n - |I|
  std::vector<std::vector<std::size_t>> exclusions;  // strict supersets of `active`

  /// |g_i(x)| <= tol on the active set and > tol elsewhere.
  bool contains(const std::vector<RPoly>& gs, const std::vector<double>& x, double tol = 1e-6) const {
    for (std::size_t i = 0; i < gs.size(); ++i) {
      const bool act = std::find(active.begin(), active.end(), i) != active.end();
      const double v = std::abs(gs[i].evaluate(x));
      if (act != (v <= tol)) return false;
    }
    return true;
  }
};

/// One stratum per nonempty active set, ordered by size then lexicographically.
inline std::vector<Stratum> enumerate_strata(const std::vector<QPoly>& gs) {
  const std::size_t r = gs.size();
  if (r == 0) return {};
  if (r > 12) throw std::invalid_argument("enumerate_strata: at most 12 constraints are supported");
  const int n = static_cast<int>(gs.front().nvars());
  std::vector<std::vector<std::size_t>> sets;
  for (unsigned mask = 1; mask < (1u << r); ++mask) {
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < r; ++i)
      if (mask & (1u << i)) s.push_back(i);
    sets.push_back(std::move(s));
  }
  std::sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  std::vector<Stratum> out;
  for (const auto& s : sets) {
    Stratum st{s, n - static_cast<int>(s.size()), {}};
    for (const auto& t : sets)
      if (t.size() > s.size() && std::includes(t.begin(), t.end(), s.begin(), s.end())) st.exclusions.push_back(t);
    out.push_back(std::move(st));
  }
  return out;
}

/// Deepest stratum containing x: every constraint with |g_i(x)| <= tol.
inline Stratum locate_stratum(const std::vector<QPoly>& gs, const std::vector<double>& x, double tol = 1e-6) {
  Stratum st;
  for (std::size_t i = 0; i < gs.size(); ++i)
    if (std::abs(to_float(gs[i]).evaluate(x)) <= tol) st.active.push_back(i);
  if (st.active.empty()) throw NotOnBoundary("point is not within tolerance of any constraint's zero set");
  const int n = gs.empty() ? 0 : static_cast<int>(gs.front().nvars());
  st.dim = n - static_cast<int>(st.active.size());
  for (const auto& s : enumerate_strata(gs))
    if (s.active == st.active) st.exclusions = s.exclusions;
  return st;
}

/// Gradients of the listed constraints at x as the columns of an n x |I| matrix.
inline Mat active_gradients(const std::vector<QPoly>& gs, const std::vector<std::size_t>& active,
                            const std::vector<double>& x) {
  Mat A(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(active.size()));
  for (std::size_t c = 0; c < active.size(); ++c) {
    const auto grad = gradient(gs.at(active[c]));
    for (std::size_t j = 0; j < x.size(); ++j)
      A(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(c)) = to_float(grad[j]).evaluate(x);
  }
  return A;
}

struct StratumCriticality {
  bool is_critical = false;
  std::vector<double> multipliers;  // one per constraint, inactive entries 0
  double stationarity_residual = 0.0;
  bool point_stratum = false;
};

/// Solves grad g_I^T u = grad f in the least-squares sense; critical iff the
/// residual is at most tol, or the stratum is a point.
inline StratumCriticality critical_on_stratum(const QPoly& f, const std::vector<QPoly>& gs, const Stratum& st,
                                              const std::vector<double>& x, double tol = 1e-6) {
  const Mat A = active_gradients(gs, st.active, x);
  const RankEstimate re = rank_estimate(A, 1e-8, kGradientRankFloor);
  if (re.rank < static_cast<int>(st.active.size()))
    throw RankDeficientActiveSet("active constraint gradients have rank " + std::to_string(re.rank) + " < " +
                                 std::to_string(st.active.size()));
  Vec gf(static_cast<Eigen::Index>(x.size()));
  const auto grad = gradient(f);
  for (std::size_t j = 0; j < x.size(); ++j) gf[static_cast<Eigen::Index>(j)] = to_float(grad[j]).evaluate(x);
  const LstsqResult ls = lstsq(A, gf);
  StratumCriticality out;
  out.multipliers.assign(gs.size(), 0.0);
  for (std::size_t c = 0; c < st.active.size(); ++c) out.multipliers[st.active[c]] = ls.x[static_cast<Eigen::Index>(c)];
  out.stationarity_residual = ls.residual;
  out.point_stratum = st.active.size() >= x.size();
  out.is_critical = out.point_stratum || ls.residual <= tol;
  return out;
}

// ---------------------------------------------------------------------------
// General position

enum class SubsetVerdict { Regular, Singular, Unchecked };

inline const char* to_string(SubsetVerdict v) {
  switch (v) {
    case SubsetVerdict::Regular: return "Regular";
    case SubsetVerdict::Singular: return "Singular";
    case SubsetVerdict::Unchecked: return "Unchecked";
  }
  return "?";
}

struct ZeroRecord {
  std::vector<double> point;
  int rank = 0;
  bool regular = false;
};

struct SubsetReport {
  std::vector<std::size_t> active;
  std::vector<ZeroRecord> zeros;
  SubsetVerdict verdict = SubsetVerdict::Unchecked;
  std::optional<std::vector<double>> witness;  // a singular zero
};

struct GeneralPositionReport {
  std::vector<SubsetReport> subsets;
  bool in_general_position = true;  // no singular zero among those discovered
  std::string scope = "verified at discovered zeros only; subsets without discovered zeros are Unchecked";
};

struct GeneralPositionOptions {
  std::vector<double> box{-2.0, 2.0};  // [lo, hi] or per-coordinate pairs
  int grid_per_dim = 6;
  double merge_tol = 1e-6;
  std::size_t max_zeros = 64;
};

namespace detail {

inline std::vector<Vec> box_grid(const std::vector<double>& box, std::size_t n, int m) {
  std::vector<std::pair<double, double>> b;
  if (box.size() == 2)
    b.assign(n, {box[0], box[1]});
  else if (box.size() == 2 * n)
    for (std::size_t i = 0; i < n; ++i) b.push_back({box[2 * i], box[2 * i + 1]});
  else
    throw std::invalid_argument("box must hold 2 or 2n numbers");
  std::vector<Vec> pts;
  std::vector<int> idx(n, 0);
  for (;;) {
    Vec x(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
      x[static_cast<Eigen::Index>(i)] = b[i].first + (b[i].second - b[i].first) * (idx[i] + 0.5) / m;
    pts.push_back(x);
    std::size_t i = 0;
    while (i < n && ++idx[i] == m) idx[i++] = 0;
    if (i == n) break;
  }
  return pts;
}

inline void add_unique(std::vector<Vec>& pts, const Vec& p, double tol) {
  for (const Vec& q : pts)
    if ((q - p).lpNorm<Eigen::Infinity>() <= tol) return;
  pts.push_back(p);
}

}  // namespace detail

/// Zeros of {g_i = 0 : i in I} found by Gauss-Newton from grid seeds, plus
/// singular zeros found from {g_I = 0, J_I^T lambda = 0, |lambda|^2 = 1}.
inline std::vector<Vec> find_subset_zeros(const std::vector<QPoly>& gs, const std::vector<std::size_t>& active,
                                          const GeneralPositionOptions& opt = {}) {
  const std::size_t n = gs.front().nvars(), k = active.size();
  const NewtonConfig cfg{1e-12, 1e-14, 100, 0.5, 1e-8, 1.0};
  std::vector<Vec> zeros;
  const auto seeds = detail::box_grid(opt.box, n, opt.grid_per_dim);

  PolySystem plain{{}, default_varnames(n), {}};
  for (std::size_t i : active) plain.equations.push_back(gs[i]);
  const CompiledSystem cp(plain);
  for (const Vec& s : seeds) {
    const NewtonResult nr = scaled_newton(cp, s, cfg);
    if (nr.converged() && nr.x.allFinite()) detail::add_unique(zeros, nr.x, opt.merge_tol);
    if (zeros.size() >= opt.max_zeros) return zeros;
  }

  // augmented system in (x, lambda)
  PolySystem aug{{}, default_varnames(n + k), {}};
  std::vector<std::size_t> embed(n);
  std::iota(embed.begin(), embed.end(), std::size_t{0});
  for (std::size_t i : active) aug.equations.push_back(remap(gs[i], n + k, embed));
  for (std::size_t j = 0; j < n; ++j) {
    QPoly row(n + k);
    for (std::size_t c = 0; c < k; ++c)
      row += QPoly::variable(n + k, n + c) * remap(derivative(gs[active[c]], j), n + k, embed);
    aug.equations.push_back(row);
  }
  QPoly norm = QPoly::constant(n + k, Rational(-1));
  for (std::size_t c = 0; c < k; ++c) norm += QPoly::variable(n + k, n + c, 2);
  aug.equations.push_back(norm);
  const CompiledSystem ca(aug);
  std::vector<Vec> lambdas;
  for (std::size_t c = 0; c < k; ++c) lambdas.push_back(Vec::Unit(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)));
  if (k > 1) lambdas.push_back(Vec::Constant(static_cast<Eigen::Index>(k), 1.0 / std::sqrt(double(k))));
  for (const Vec& s : seeds) {
    for (const Vec& l : lambdas) {
      Vec z(static_cast<Eigen::Index>(n + k));
      z << s, l;
      const NewtonResult nr = scaled_newton(ca, z, cfg);
      if (nr.converged() && nr.x.allFinite()) detail::add_unique(zeros, nr.x.head(static_cast<Eigen::Index>(n)), opt.merge_tol);
      if (zeros.size() >= opt.max_zeros) return zeros;
    }
  }
  return zeros;
}

inline GeneralPositionReport check_general_position(const std::vector<QPoly>& gs,
                                                    const GeneralPositionOptions& opt = {}) {
  GeneralPositionReport rep;
  for (const Stratum& st : enumerate_strata(gs)) {
    SubsetReport sr;
    sr.active = st.active;
    for (const Vec& z : find_subset_zeros(gs, st.active, opt)) {
      const std::vector<double> p = to_std(z);
      const RankEstimate re = rank_estimate(active_gradients(gs, st.active, p), 1e-8, kGradientRankFloor);
      ZeroRecord zr{p, re.rank, re.rank == static_cast<int>(st.active.size())};
      if (!zr.regular && !sr.witness) sr.witness = p;
      sr.zeros.push_back(std::move(zr));
    }
    if (sr.zeros.empty())
      sr.verdict = SubsetVerdict::Unchecked;
    else
      sr.verdict = sr.witness ? SubsetVerdict::Singular : SubsetVerdict::Regular;
    if (sr.verdict == SubsetVerdict::Singular) rep.in_general_position = false;
    rep.subsets.push_back(std::move(sr));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json one_based(const std::vector<std::size_t>& idx) {
  nlohmann::json j = nlohmann::json::array();
  for (std::size_t i : idx) j.push_back(i + 1);
  return j;
}

inline nlohmann::json stratum_json(const Stratum& st, const std::vector<std::vector<double>>& witnesses = {}) {
  return {{"active", one_based(st.active)}, {"dim", st.dim}, {"witness_points", witnesses}};
}

inline nlohmann::json general_position_json(const GeneralPositionReport& rep) {
  nlohmann::json subsets = nlohmann::json::array();
  for (const auto& s : rep.subsets) {
    nlohmann::json zs = nlohmann::json::array();
    for (const auto& z : s.zeros) zs.push_back({{"point", z.point}, {"rank", z.rank}, {"regular", z.regular}});
    nlohmann::json j{{"active", one_based(s.active)}, {"verdict", to_string(s.verdict)}, {"zeros", zs}};
    if (s.witness) j["witness"] = *s.witness;
    subsets.push_back(std::move(j));
  }
  return {{"in_general_position", rep.in_general_position}, {"scope", rep.scope}, {"subsets", subsets}};
}

}  // namespace bpl
