// Unit tests for path tracing, strata, asymptotics, points at infinity and
// limit classification. Expected values come from closed-form paths, hand
// gradients, or synthetic data with known exponents.

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "bpl/bpl.hpp"

using namespace bpl;

namespace {

const std::vector<std::string> X2{"x1", "x2"};

QPoly P(const std::string& s, const std::vector<std::string>& v = X2) { return parse_poly(s, v); }

/// Catalog traces from the catalog seed, computed once per process.
const PathTrace& catalog_trace(const std::string& id) {
  static std::map<std::string, PathTrace> cache;
  auto it = cache.find(id);
  if (it == cache.end()) {
    const POProblem p = *catalog_problem(id);
    it = cache.emplace(id, trace_path(p, *p.options.seed)).first;
  }
  return it->second;
}

/// A synthetic trace x_i(mu) = coords[i](mu) on mu = 0.1 * 0.5^k.
template <class F>
PathTrace synthetic_trace(std::size_t n, F&& coords, int steps = 40) {
  PathTrace tr;
  tr.varnames = default_varnames(n);
  for (int k = 0; k < steps; ++k) {
    PathSample s;
    s.mu = 0.1 * std::pow(0.5, k);
    s.x = coords(s.mu);
    tr.samples.push_back(s);
  }
  tr.status = TraceStatus::Converged;
  return tr;
}

POProblem one_var(const std::string& f, const std::string& g) {
  POProblem p;
  p.name = "one-var";
  p.varnames = {"x"};
  p.f = parse_poly(f, p.varnames);
  p.gs = {parse_poly(g, p.varnames)};
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// pathtrace

TEST(Pathtrace, CuspFollowsClosedForm) {
  const PathTrace& tr = catalog_trace("cusp");
  ASSERT_EQ(tr.status, TraceStatus::Converged) << tr.message;
  EXPECT_EQ(tr.samples.size(), 40u);
  for (const PathSample& s : tr.samples) {
    EXPECT_LE(std::abs(s.x[0] - 3.0 * s.mu), 1e-8) << s.mu;
    EXPECT_LE(std::abs(s.x[1]), 1e-10) << s.mu;
  }
  ASSERT_TRUE(tr.limit.has_value());
  EXPECT_LE(std::abs((*tr.limit)[0]), 1e-8);
  EXPECT_LE(std::abs((*tr.limit)[1]), 1e-8);
}

TEST(Pathtrace, NoCentralPathSolvesCubic) {
  const PathTrace& tr = catalog_trace("no-central-path");
  ASSERT_EQ(tr.status, TraceStatus::Converged) << tr.message;
  EXPECT_NEAR((*tr.limit)[0], 1.0, 1e-8);
  EXPECT_NEAR((*tr.limit)[1], 0.0, 1e-8);
  for (const PathSample& s : tr.samples) {
    const double x = s.x[0], mu = s.mu;
    EXPECT_LE(std::abs(x * x * x - 3.0 * mu * x * x - x + mu), 1e-10) << mu;
    EXPECT_LE(std::abs(s.x[1]), 1e-10);
  }
}

TEST(Pathtrace, NonExistenceHasNoSolution) {
  const PathTrace& tr = catalog_trace("non-existence");
  EXPECT_EQ(tr.status, TraceStatus::NoSolution);
  EXPECT_TRUE(tr.samples.empty());
  EXPECT_FALSE(tr.message.empty());
}

TEST(Pathtrace, InfeasibleSeedRejected) {
  EXPECT_THROW(trace_path(*catalog_problem("cusp"), {-1.0, 0.0}), InfeasibleSeed);
}

TEST(Pathtrace, GValuesStayPositive) {
  for (const char* id : {"cusp", "no-central-path", "figure-eight", "non-analytic"}) {
    const PathTrace& tr = catalog_trace(id);
    for (const PathSample& s : tr.samples)
      for (double g : s.gvals) EXPECT_GT(g, 0.0) << id << " mu=" << s.mu;
    for (std::size_t k = 1; k < tr.samples.size(); ++k) EXPECT_LT(tr.samples[k].mu, tr.samples[k - 1].mu);
  }
}

TEST(Pathtrace, ScheduleIndependence) {
  for (const char* id : {"cusp", "no-central-path", "figure-eight"}) {
    const POProblem p = *catalog_problem(id);
    TraceConfig sq;
    sq.theta = 0.25;
    sq.steps = 20;
    const PathTrace a = catalog_trace(id), b = trace_path(p, *p.options.seed, sq);
    ASSERT_EQ(b.status, TraceStatus::Converged) << id << ": " << b.message;
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR((*a.limit)[i], (*b.limit)[i], 1e-8) << id;
  }
}

TEST(Pathtrace, CheckIsolated) {
  const IsolationCheck cusp = check_isolated(*catalog_problem("cusp"), 0.1, {0.3, 0.0});
  EXPECT_TRUE(cusp.isolated);
  EXPECT_EQ(cusp.rank, 2);
  EXPECT_TRUE(std::isfinite(cusp.jac_condition));
  const IsolationCheck morse = check_isolated(*catalog_problem("morse-non-compact"), 0.1, {std::sqrt(1.1), 0.0});
  EXPECT_FALSE(morse.isolated);
  EXPECT_EQ(morse.rank, 1);
  EXPECT_TRUE(check_isolated(one_var("x", "x"), 0.1, {0.1}).isolated);
}

TEST(Pathtrace, OneVariablePath) {
  // f = x, g = x: x(mu) = mu
  const PathTrace tr = trace_path(one_var("x", "x"), {1.0});
  ASSERT_EQ(tr.status, TraceStatus::Converged);
  for (const PathSample& s : tr.samples) EXPECT_NEAR(s.x[0], s.mu, 1e-12 * std::max(1.0, s.mu));
}

TEST(Pathtrace, MorseLosesIsolation) {
  const POProblem p = *catalog_problem("morse-non-compact");
  EXPECT_EQ(trace_path(p, *p.options.seed).status, TraceStatus::LostIsolation);
}

TEST(Pathtrace, ExistenceViaMultiplier) {
  const ExistenceCheck none = check_existence_via_multiplier(P("x1^2 - x2^2"), P("x2"));
  EXPECT_EQ(none.verdict, ExistenceVerdict::NoPositiveRoot);
  for (std::size_t k = 0; k < none.u.size(); ++k) EXPECT_NEAR(none.u[k], -2.0 * none.xi_grid[k], 1e-9);

  const ExistenceCheck cusp = check_existence_via_multiplier(P("x1"), P("x1^3 - x2^2"));
  ASSERT_EQ(cusp.verdict, ExistenceVerdict::PathExists) << cusp.message;
  for (std::size_t k = 0; k < cusp.xi_grid.size(); ++k) {
    const double xi = cusp.xi_grid[k];
    EXPECT_NEAR(cusp.u[k], 1.0 / (3.0 * std::cbrt(xi * xi)), 1e-8 * cusp.u[k]);
    // mu = xi u maps to x = (3 mu, 0)
    EXPECT_NEAR(cusp.points[k][0], 3.0 * cusp.xi_u[k], 1e-9);
    EXPECT_NEAR(cusp.points[k][1], 0.0, 1e-9);
  }

  const ExistenceCheck lin = check_existence_via_multiplier(P("x1"), P("x1"));
  EXPECT_EQ(lin.verdict, ExistenceVerdict::PathExists);
  for (double u : lin.u) EXPECT_NEAR(u, 1.0, 1e-12);
}

TEST(Pathtrace, SeedSearch) {
  const POProblem f8 = *catalog_problem("figure-eight");
  const auto seeds = seed_search(f8, {-1.5, 1.5});
  ASSERT_GE(seeds.size(), 2u);
  std::vector<std::vector<double>> limits;
  for (const Seed& s : seeds) {
    const PathTrace tr = trace_path(f8, s.point);
    if (tr.status == TraceStatus::Converged) limits.push_back(*tr.limit);
  }
  auto found = [&](double a, double b) {
    return std::any_of(limits.begin(), limits.end(),
                       [&](const auto& l) { return std::abs(l[0] - a) < 1e-4 && std::abs(l[1] - b) < 1e-4; });
  };
  EXPECT_TRUE(found(-1.0, 0.0));
  EXPECT_TRUE(found(0.0, 0.0));

  EXPECT_TRUE(seed_search(*catalog_problem("cusp"), {-2.0, -1.0, -1.0, 1.0}).empty());
  EXPECT_EQ(seed_search(*catalog_problem("no-central-path"), {0.0, 3.0, -1.0, 1.0}).size(), 1u);
}

TEST(Pathtrace, CsvRoundTrip) {
  const PathTrace& tr = catalog_trace("no-central-path");
  std::istringstream in(trace_csv(tr));
  const PathTrace back = read_trace_csv(in);
  EXPECT_EQ(back.varnames, tr.varnames);
  ASSERT_EQ(back.samples.size(), tr.samples.size());
  for (std::size_t k = 0; k < tr.samples.size(); ++k) {
    EXPECT_EQ(back.samples[k].mu, tr.samples[k].mu);
    EXPECT_EQ(back.samples[k].x, tr.samples[k].x);
    EXPECT_EQ(back.samples[k].gvals, tr.samples[k].gvals);
    EXPECT_EQ(back.samples[k].residual, tr.samples[k].residual);
  }
  std::istringstream bad("x,y\n1,2\n");
  EXPECT_THROW(read_trace_csv(bad), ValidationError);
}

TEST(Pathtrace, SummaryJson) {
  const nlohmann::json j = nlohmann::json::parse(trace_summary_json(catalog_trace("cusp")).dump());
  EXPECT_EQ(j["status"], "Converged");
  EXPECT_EQ(j["samples"], 40);
  EXPECT_EQ(j["mu0_auto_halved"], false);
  EXPECT_EQ(j["limit"].size(), 2u);
}

// ---------------------------------------------------------------------------
// strata

TEST(Strata, Enumerate) {
  const auto ncp = enumerate_strata(catalog_problem("no-central-path")->gs);
  ASSERT_EQ(ncp.size(), 3u);
  EXPECT_EQ(ncp[0].active, (std::vector<std::size_t>{0}));
  EXPECT_EQ(ncp[1].active, (std::vector<std::size_t>{1}));
  EXPECT_EQ(ncp[2].active, (std::vector<std::size_t>{0, 1}));
  EXPECT_EQ(ncp[0].dim, 1);
  EXPECT_EQ(ncp[2].dim, 0);
  EXPECT_EQ(ncp[0].exclusions.size(), 1u);
  EXPECT_TRUE(ncp[2].exclusions.empty());

  const auto single = enumerate_strata({P("x1")});
  ASSERT_EQ(single.size(), 1u);
  EXPECT_EQ(single[0].dim, 1);

  // axes minus the origin, and the origin
  const auto axes = enumerate_strata({P("x1"), P("x2")});
  const std::vector<RPoly> g{to_float(P("x1")), to_float(P("x2"))};
  EXPECT_TRUE(axes[0].contains(g, {0.0, 1.0}));
  EXPECT_FALSE(axes[0].contains(g, {0.0, 0.0}));
  EXPECT_TRUE(axes[2].contains(g, {0.0, 0.0}));
}

TEST(Strata, GeneralPosition) {
  const GeneralPositionReport ncp = check_general_position(catalog_problem("no-central-path")->gs);
  EXPECT_TRUE(ncp.in_general_position);
  const SubsetReport& z1 = ncp.subsets.back();
  ASSERT_EQ(z1.zeros.size(), 2u);  // (0, -1) and (0, 1)
  std::vector<double> ys;
  for (const ZeroRecord& z : z1.zeros) {
    EXPECT_NEAR(z.point[0], 0.0, 1e-10);
    ys.push_back(z.point[1]);
  }
  std::sort(ys.begin(), ys.end());
  EXPECT_NEAR(ys[0], -1.0, 1e-10);
  EXPECT_NEAR(ys[1], 1.0, 1e-10);

  const GeneralPositionReport f8 = check_general_position(catalog_problem("figure-eight")->gs);
  EXPECT_FALSE(f8.in_general_position);
  ASSERT_TRUE(f8.subsets[0].witness.has_value());
  EXPECT_NEAR((*f8.subsets[0].witness)[0], 0.0, 1e-6);
  EXPECT_NEAR((*f8.subsets[0].witness)[1], 0.0, 1e-6);

  const GeneralPositionReport dup = check_general_position({P("x1"), P("x1")});
  EXPECT_FALSE(dup.in_general_position);
  EXPECT_EQ(dup.subsets.back().verdict, SubsetVerdict::Singular);
}

TEST(Strata, Locate) {
  const auto gs = catalog_problem("no-central-path")->gs;
  EXPECT_EQ(locate_stratum(gs, {1.0, 0.0}).active, (std::vector<std::size_t>{0}));
  EXPECT_EQ(locate_stratum(gs, {0.0, 1.0}).active, (std::vector<std::size_t>{0, 1}));
  EXPECT_THROW(locate_stratum(gs, {2.0, 2.0}), NotOnBoundary);
}

TEST(Strata, CriticalOnStratum) {
  const auto gs = catalog_problem("no-central-path")->gs;
  const Stratum z0 = locate_stratum(gs, {1.0, 0.0});
  const StratumCriticality c = critical_on_stratum(P("x1"), gs, z0, {1.0, 0.0});
  EXPECT_TRUE(c.is_critical);
  EXPECT_NEAR(c.multipliers[0], 0.5, 1e-15);
  EXPECT_EQ(c.multipliers[1], 0.0);
  EXPECT_NEAR(c.stationarity_residual, 0.0, 1e-15);

  const Stratum z1 = locate_stratum(gs, {0.0, 1.0});
  EXPECT_TRUE(critical_on_stratum(P("x1"), gs, z1, {0.0, 1.0}).is_critical);

  const StratumCriticality nc = critical_on_stratum(P("x2"), gs, z0, {1.0, 0.0});
  EXPECT_FALSE(nc.is_critical);
  EXPECT_NEAR(nc.stationarity_residual, 1.0, 1e-15);

  // the singular point of the figure eight has a rank-deficient active set
  const auto f8 = catalog_problem("figure-eight")->gs;
  EXPECT_THROW(critical_on_stratum(P("x1"), f8, locate_stratum(f8, {0.0, 0.0}), {0.0, 0.0}), RankDeficientActiveSet);
}

TEST(Strata, CriticalityInvariantUnderObjectiveScaling) {
  const auto gs = catalog_problem("no-central-path")->gs;
  const Stratum z0 = locate_stratum(gs, {1.0, 0.0});
  for (double lam : {0.25, 3.0, 1e3}) {
    QPoly f = P("x1 + x2^2");
    f *= Rational(lam);
    const StratumCriticality c = critical_on_stratum(f, gs, z0, {1.0, 0.0});
    EXPECT_TRUE(c.is_critical);
    EXPECT_NEAR(c.multipliers[0], 0.5 * lam, 1e-12 * lam);
  }
}

// ---------------------------------------------------------------------------
// asymptotics

TEST(Asymptotics, CuspExponents) {
  const ExponentFit fit = fit_exponents(catalog_trace("cusp"), {0.0, 0.0});
  ASSERT_FALSE(fit.coords[0].exact);
  EXPECT_NEAR(fit.coords[0].fit.r, 1.0, 0.01);
  EXPECT_TRUE(fit.coords[1].exact);
  EXPECT_EQ(propose_rho(fit).rho, 1);
}

TEST(Asymptotics, NoCentralPathExponent) {
  const ExponentFit fit = fit_exponents(catalog_trace("no-central-path"), {1.0, 0.0});
  EXPECT_NEAR(fit.coords[0].fit.r, 1.0, 0.01);
}

TEST(Asymptotics, NonAnalyticCatalogPath) {
  // The path of inf x1 on {x1^3 >= x2^2, x2 >= 0} has x1 ~ c mu and x2 ~ c' mu^{3/2};
  // these are the exponents of the cleared system, so rho = 2.
  const PathTrace& tr = catalog_trace("non-analytic");
  ASSERT_EQ(tr.status, TraceStatus::Converged);
  const ExponentFit fit = fit_exponents(tr, {0.0, 0.0});
  EXPECT_NEAR(fit.coords[0].fit.r, 1.0, 0.02);
  EXPECT_NEAR(fit.coords[1].fit.r, 1.5, 0.03);
  EXPECT_EQ(propose_rho(fit).rho, 2);
}

TEST(Asymptotics, SyntheticExponents) {
  for (auto [p, q] : std::vector<std::pair<int, int>>{{1, 2}, {1, 3}, {2, 3}, {3, 4}, {1, 1}}) {
    const double r = static_cast<double>(p) / q;
    const PathTrace tr = synthetic_trace(1, [&](double mu) { return std::vector<double>{2.5 * std::pow(mu, r)}; });
    const ExponentFit fit = fit_exponents(tr, {0.0});
    EXPECT_NEAR(fit.coords[0].fit.r, r, 1e-3) << p << "/" << q;
    EXPECT_EQ(propose_rho(fit).rho % q, 0) << p << "/" << q;
  }
}

TEST(Asymptotics, ProposeRho) {
  const PathTrace na = synthetic_trace(2, [](double mu) {
    return std::vector<double>{std::sqrt(mu) * (1.0 + mu), std::pow(mu, 0.75) * (2.0 - mu)};
  });
  const ExponentFit f = fit_exponents(na, {0.0, 0.0});
  EXPECT_NEAR(f.coords[0].fit.r, 0.5, 0.02);
  EXPECT_NEAR(f.coords[1].fit.r, 0.75, 0.03);
  const ReparamProposal rp = propose_rho(f);
  EXPECT_EQ(rp.rho, 4);
  EXPECT_EQ(rp.gamma, 4);
  // multiplier branch of F = x1 on x1^3 - x2^2 = xi: x1 = xi^{1/3}
  const PathTrace br = synthetic_trace(1, [](double xi) { return std::vector<double>{std::cbrt(xi)}; });
  EXPECT_EQ(propose_rho(fit_exponents(br, {0.0})).rho, 3);
}

TEST(Asymptotics, ScalingInvariance) {
  PathTrace tr = catalog_trace("no-central-path");
  const ExponentFit a = fit_exponents(tr, {1.0, 0.0});
  for (PathSample& s : tr.samples)
    for (double& v : s.x) v *= 2.0;
  const ExponentFit b = fit_exponents(tr, {2.0, 0.0});
  EXPECT_NEAR(a.coords[0].fit.r, b.coords[0].fit.r, 1e-9);
}

TEST(Asymptotics, TooFewSamples) {
  const PathTrace tr = synthetic_trace(1, [](double mu) { return std::vector<double>{mu}; }, 5);
  EXPECT_THROW(fit_exponents(tr, {0.0}), InsufficientSamples);
}

TEST(Asymptotics, SmoothnessAfterReparam) {
  const PathTrace na = synthetic_trace(2, [](double mu) {
    return std::vector<double>{std::sqrt(mu) * (1.0 + mu), std::pow(mu, 0.75) * (2.0 - mu)};
  });
  const SmoothnessReport good = check_smooth_after_reparam(na, {0.0, 0.0}, 4);
  EXPECT_EQ(good.orders_passed, 2);
  const SmoothnessReport bad = check_smooth_after_reparam(na, {0.0, 0.0}, 1);
  ASSERT_FALSE(bad.orders.empty());
  EXPECT_FALSE(bad.orders[0].passed);

  EXPECT_EQ(check_smooth_after_reparam(catalog_trace("cusp"), {0.0, 0.0}, 1).orders_passed, 2);
  const PathTrace flat = synthetic_trace(2, [](double) { return std::vector<double>{0.5, -1.0}; });
  EXPECT_EQ(check_smooth_after_reparam(flat, {0.5, -1.0}, 1).orders_passed, 2);
  EXPECT_THROW(check_smooth_after_reparam(flat, {0.5, -1.0}, 0), std::invalid_argument);
}

// ---------------------------------------------------------------------------
// infinity

TEST(Infinity, Examples) {
  const InfinityCertificate rem = certify_infinity(catalog_family("remark-unbounded")->polys);
  EXPECT_EQ(rem.verdict, InfinityVerdict::NonemptyAtInfinity);
  auto has_axis = [](const InfinityCertificate& c, std::size_t j) {
    return std::any_of(c.witnesses.begin(), c.witnesses.end(),
                       [&](const auto& w) { return std::abs(std::abs(w[j]) - 1.0) < 1e-6; });
  };
  EXPECT_TRUE(has_axis(rem, 0));
  EXPECT_TRUE(has_axis(rem, 1));
  EXPECT_EQ(certify_infinity({P("x1^2 + x2^2 - 1")}).verdict, InfinityVerdict::EmptyAtInfinity);
  const InfinityCertificate hyp = certify_infinity({P("x1*x2 - 1")});
  EXPECT_EQ(hyp.verdict, InfinityVerdict::NonemptyAtInfinity);
  EXPECT_TRUE(has_axis(hyp, 0));
  EXPECT_TRUE(has_axis(hyp, 1));
}

TEST(Infinity, SosInstancesEmptyByDepthTen) {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<int> coef(-3, 3), nv(2, 4), half(1, 2);
  for (int it = 0; it < 30; ++it) {
    const std::size_t n = static_cast<std::size_t>(nv(rng));
    // sum of the x_j^2 plus squares of random linear forms, raised to a power
    QPoly q(n);
    for (std::size_t j = 0; j < n; ++j) q += QPoly::variable(n, j, 2);
    for (int k = 0; k < 2; ++k) {
      QPoly l(n);
      for (std::size_t j = 0; j < n; ++j) l += QPoly::variable(n, j) * QPoly::constant(n, Rational(coef(rng)));
      q += l * l;
    }
    const unsigned d = static_cast<unsigned>(half(rng));
    QPoly Pi = q.pow(d);
    for (std::size_t j = 0; j < n; ++j) Pi += QPoly::variable(n, j) * QPoly::constant(n, Rational(coef(rng)));
    InfinityOptions opt;
    opt.max_depth = 10;
    const InfinityCertificate c = certify_infinity({Pi}, opt);
    EXPECT_EQ(c.verdict, InfinityVerdict::EmptyAtInfinity) << to_string(Pi);
    EXPECT_LE(c.depth, 10);
  }
}

TEST(Infinity, PositiveScalingInvariance) {
  for (const std::string& id : {"remark-unbounded", "unit-circle", "hyperbola", "figure-eight"}) {
    std::vector<QPoly> ps = catalog_family(id)->polys;
    const InfinityVerdict v = certify_infinity(ps).verdict;
    for (QPoly& p : ps) p *= Rational(37, 5);
    EXPECT_EQ(certify_infinity(ps).verdict, v) << id;
  }
}

TEST(Infinity, WitnessesReverify) {
  for (const std::vector<QPoly>& ps : std::vector<std::vector<QPoly>>{
           catalog_family("remark-unbounded")->polys, {P("x1*x2 - 1")}, {P("x1^2 - x2^2 + x1"), P("x1^3 - x1*x2^2")}}) {
    const InfinityCertificate c = certify_infinity(ps);
    ASSERT_EQ(c.verdict, InfinityVerdict::NonemptyAtInfinity);
    for (const auto& w : c.witnesses) {
      EXPECT_NEAR(to_vec(w).norm(), 1.0, 1e-12);
      for (const QPoly& p : ps) EXPECT_LE(std::abs(to_float(leading_form(p)).evaluate(w)), 10.0 * c.tol);
    }
  }
}

// ---------------------------------------------------------------------------
// classify

TEST(Classify, NoCentralPath) {
  const LimitReport rep = classify_limit(*catalog_problem("no-central-path"), catalog_trace("no-central-path"));
  EXPECT_EQ(rep.classification, Classification::StratumCriticalPositiveMultipliers);
  EXPECT_EQ(rep.active, (std::vector<std::size_t>{0}));
  ASSERT_EQ(rep.multipliers.size(), 2u);
  EXPECT_NEAR(rep.multipliers[0], 0.5, 1e-6);
  EXPECT_EQ(rep.multipliers[1], 0.0);
  EXPECT_EQ(rep.strict_complementarity, std::optional<bool>(true));
  EXPECT_LE(rep.stationarity_residual, 1e-6);
}

TEST(Classify, FigureEightOrigin) {
  const POProblem p = *catalog_problem("figure-eight");
  const PathTrace tr = trace_path(p, {0.05, 0.0});
  ASSERT_EQ(tr.status, TraceStatus::Converged);
  const LimitReport rep = classify_limit(p, tr);
  EXPECT_EQ(rep.classification, Classification::SingularBoundary);
  EXPECT_EQ(rep.general_position, "singular");
  ASSERT_TRUE(rep.projective.has_value());
  // primal (1:0:0), dual (0:1)
  EXPECT_NEAR(rep.projective->x[0], 1.0, 1e-9);
  EXPECT_NEAR(rep.projective->u[1], 1.0, 1e-9);
  EXPECT_LE(std::abs(rep.projective->u[0]), 1e-3);

  const LimitReport left = classify_limit(p, catalog_trace("figure-eight"));
  EXPECT_NEAR((*left.xbar)[0], -1.0, 1e-6);
  EXPECT_EQ(left.classification, Classification::StratumCriticalPositiveMultipliers);
}

TEST(Classify, NonAnalyticIsSingular) {
  const LimitReport rep = classify_limit(*catalog_problem("non-analytic"), catalog_trace("non-analytic"));
  EXPECT_EQ(rep.classification, Classification::SingularBoundary);
  EXPECT_EQ(rep.active, (std::vector<std::size_t>{0, 1}));
  EXPECT_NEAR((*rep.xbar)[0], 0.0, 1e-6);
}

TEST(Classify, ProjectiveLimits) {
  const ProjectivePoint cusp = extract_projective_limit(*catalog_problem("cusp"), catalog_trace("cusp"));
  EXPECT_NEAR(cusp.x[0], 1.0, 1e-9);
  EXPECT_NEAR(cusp.x[1], 0.0, 1e-6);
  EXPECT_NEAR(cusp.x[2], 0.0, 1e-6);
  EXPECT_NEAR(cusp.u[0], 0.0, 1e-6);
  EXPECT_NEAR(cusp.u[1], 1.0, 1e-9);
  EXPECT_LE(cusp.residual, 1e-6);

  const ProjectivePoint ncp = extract_projective_limit(*catalog_problem("no-central-path"), catalog_trace("no-central-path"));
  const std::vector<double> wantx{1.0, 1.0, 0.0}, wantu{1.0, 0.5, 0.0};
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(ncp.x[i], wantx[i], 1e-6);
    EXPECT_NEAR(ncp.u[i], wantu[i], 1e-6);
  }
  EXPECT_LE(ncp.residual, 1e-6);
}

TEST(Classify, BoundedPathNormalization) {
  // interior limit of f = (x - 1/2)^2 on x >= 0: u = mu / x -> 0, max-abs scaling only
  const POProblem p = one_var("x^2 - x", "x");
  const PathTrace tr = trace_path(p, {1.0});
  ASSERT_EQ(tr.status, TraceStatus::Converged);
  const ProjectivePoint pp = extract_projective_limit(p, tr);
  EXPECT_NEAR(pp.x[0], 1.0, 1e-9);
  EXPECT_NEAR(pp.x[1], 0.5, 1e-6);
  EXPECT_NEAR(pp.u[0], 1.0, 1e-9);
  EXPECT_NEAR(pp.u[1], 0.0, 1e-6);
  EXPECT_EQ(classify_limit(p, tr).classification, Classification::NotOnBoundary);
}

TEST(Classify, ObjectiveScalingInvariance) {
  POProblem p = *catalog_problem("no-central-path");
  const LimitReport base = classify_limit(p, catalog_trace("no-central-path"));
  p.f *= Rational(3);
  const LimitReport scaled = classify_limit(p, trace_path(p, *p.options.seed));
  EXPECT_EQ(scaled.classification, base.classification);
  EXPECT_NEAR(scaled.multipliers[0], 3.0 * base.multipliers[0], 1e-6);
}

TEST(Classify, PerturbedSeedReconverges) {
  const POProblem p = *catalog_problem("no-central-path");
  const LimitReport base = classify_limit(p, catalog_trace("no-central-path"));
  ASSERT_EQ(base.classification, Classification::StratumCriticalPositiveMultipliers);
  for (const std::vector<double>& seed : {std::vector<double>{2.1, 0.05}, {1.8, -0.1}, {2.5, 0.3}}) {
    const PathTrace tr = trace_path(p, seed);
    ASSERT_EQ(tr.status, TraceStatus::Converged);
    for (std::size_t i = 0; i < 2; ++i) EXPECT_NEAR((*tr.limit)[i], (*base.xbar)[i], 1e-6);
  }
}

TEST(Classify, ReportJsonRoundTrip) {
  const LimitReport rep = classify_limit(*catalog_problem("cusp"), catalog_trace("cusp"));
  const nlohmann::json j = nlohmann::json::parse(limit_report_json(rep).dump());
  EXPECT_EQ(j["classification"], to_string(rep.classification));
}
