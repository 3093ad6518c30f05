#pragma once

// Command-line front end. Every command writes its report to `out`, progress
// and trace summaries to `err`, and returns the process exit code: 0 for a
// completed analysis (negative findings included), 2 for malformed input, 1
// for internal faults.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bpl/bpl.hpp"

namespace bpl::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitInput = 2;

struct RunConfig {
  std::string problem;
  std::optional<double> mu0, theta, tol;
  std::optional<int> steps;
  std::vector<double> box, seed, point;
  std::string out;
  std::string dump_system;
  long max_den = 16;
  int grid = 16;
  // bounded
  std::string system;
  std::vector<std::string> polys;
  int max_depth = 24;
  // kkt
  std::string F;
  std::vector<std::string> P;
  std::vector<double> xi;
  std::vector<std::string> vars;
};

namespace detail {

inline void write_text(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream f(path);
  if (!f) throw IoError("cannot write '" + path + "'");
  f << text;
}

inline void write_json(const std::string& path, const nlohmann::json& j, std::ostream& out) {
  write_text(path, j.dump(2) + "\n", out);
}

inline POProblem resolve_problem(const RunConfig& cfg) {
  if (cfg.problem.empty()) throw ValidationError("--problem is required");
  POProblem p = load_problem(cfg.problem);
  for (const auto& w : p.warnings) log::warn(p.name, ": ", w);
  return p;
}

inline TraceConfig trace_config(const POProblem& p, const RunConfig& cfg) {
  TraceConfig tc = trace_config_for(p);
  if (cfg.mu0) tc.mu0 = *cfg.mu0;
  if (cfg.theta) tc.theta = *cfg.theta;
  if (cfg.steps) tc.steps = *cfg.steps;
  if (cfg.tol) tc.limit_tol = *cfg.tol;
  if (!(tc.mu0 > 0.0)) throw ValidationError("--mu0 must be positive");
  if (!(tc.theta > 0.0 && tc.theta < 1.0)) throw ValidationError("--theta must lie in (0, 1)");
  if (tc.steps < 1) throw ValidationError("--steps must be positive");
  if (!(tc.limit_tol > 0.0)) throw ValidationError("--tol must be positive");
  return tc;
}

inline void maybe_dump(const RunConfig& cfg, const PolySystem& sys, std::ostream& out) {
  if (!cfg.dump_system.empty()) write_json(cfg.dump_system, dump_system(sys), out);
}

/// Exponent fit, reparametrization and smoothness for a converged trace;
/// failures of the individual stages are reported in place.
inline nlohmann::json asymptotics_section(const PathTrace& tr, long max_den) {
  try {
    const ExponentFit fit = fit_exponents(tr, *tr.limit);
    std::optional<ReparamProposal> rho;
    std::optional<SmoothnessReport> smooth;
    try {
      rho = propose_rho(fit, max_den);
      smooth = check_smooth_after_reparam(tr, *tr.limit, rho->rho);
    } catch (const std::exception& e) {
      nlohmann::json j = asymptotics_json(fit, std::nullopt, std::nullopt);
      j["error"] = e.what();
      return j;
    }
    return asymptotics_json(fit, rho, smooth);
  } catch (const std::exception& e) {
    return {{"error", e.what()}};
  }
}

inline nlohmann::json path_report(const POProblem& p, const PathTrace& tr, long max_den) {
  nlohmann::json j;
  j["trace"] = trace_summary_json(tr);
  if (tr.status == TraceStatus::Converged || tr.status == TraceStatus::Diverged) {
    try {
      j["limit"] = limit_report_json(classify_limit(p, tr));
    } catch (const std::exception& e) {
      j["limit"] = {{"error", e.what()}};
    }
  }
  if (tr.status == TraceStatus::Converged) j["asymptotics"] = asymptotics_section(tr, max_den);
  return j;
}

inline Family resolve_family(const RunConfig& cfg) {
  if (!cfg.polys.empty()) {
    Family fam{"command-line", cfg.vars.empty() ? infer_variables(cfg.polys) : cfg.vars, {}};
    for (const auto& e : cfg.polys) fam.polys.push_back(parse_poly(e, fam.varnames));
    return fam;
  }
  if (cfg.system.empty()) throw ValidationError("bounded needs --system or --P");
  if (auto f = catalog_family(cfg.system)) return *f;
  std::ifstream in(cfg.system);
  if (!in) throw IoError("'" + cfg.system + "' is neither a catalog family nor a readable file");
  nlohmann::json j;
  try {
    in >> j;
    Family fam{j.value("name", cfg.system), j.at("variables").get<std::vector<std::string>>(), {}};
    for (const auto& e : j.at("polys")) fam.polys.push_back(parse_poly(e.get<std::string>(), fam.varnames));
    return fam;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed family file: ") + e.what());
  }
}

}  // namespace detail

inline int cmd_trace(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const POProblem p = detail::resolve_problem(cfg);
  const TraceConfig tc = detail::trace_config(p, cfg);
  detail::maybe_dump(cfg, build_cleared_system(p), out);
  std::vector<double> seed = cfg.seed;
  if (seed.empty()) {
    if (!p.options.seed) throw ValidationError("problem has no default seed; pass --seed");
    seed = *p.options.seed;
  }
  const PathTrace tr = trace_path(p, seed, tc);
  detail::write_text(cfg.out, trace_csv(tr), out);
  err << trace_summary_json(tr).dump() << '\n';
  return kExitOk;
}

inline int cmd_analyze(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const POProblem p = detail::resolve_problem(cfg);
  const TraceConfig tc = detail::trace_config(p, cfg);
  detail::maybe_dump(cfg, build_cleared_system(p), out);
  std::vector<double> box = cfg.box;
  if (box.empty()) box = p.options.box.value_or(std::vector<double>{-2.0, 2.0});
  const std::vector<Seed> seeds = seed_search(p, box, cfg.grid, tc.mu0);

  nlohmann::json rep;
  rep["problem"] = problem_to_json(p);
  rep["box"] = box;
  rep["seeds"] = nlohmann::json::array();
  rep["paths"] = nlohmann::json::array();
  for (const Seed& s : seeds) {
    rep["seeds"].push_back({{"point", s.point}, {"solution", s.solution}, {"residual", s.residual}, {"members", s.members}});
    const PathTrace tr = trace_path(p, s.point, tc);
    err << trace_summary_json(tr).dump() << '\n';
    rep["paths"].push_back(detail::path_report(p, tr, cfg.max_den));
  }
  if (seeds.empty()) {
    rep["note"] = "no barrier critical point at mu0 was reached from the box grid";
    if (p.options.seed) {
      const PathTrace tr = trace_path(p, *p.options.seed, tc);
      err << trace_summary_json(tr).dump() << '\n';
      rep["paths"].push_back(detail::path_report(p, tr, cfg.max_den));
    }
  }
  detail::write_json(cfg.out, rep, out);
  return kExitOk;
}

inline int cmd_bounded(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const Family fam = detail::resolve_family(cfg);
  InfinityOptions opt;
  opt.max_depth = cfg.max_depth;
  if (cfg.tol) opt.tol = *cfg.tol;
  nlohmann::json j = infinity_json(certify_infinity(fam.polys, opt));
  j["family"] = fam.name;
  j["variables"] = fam.varnames;
  detail::write_json(cfg.out, j, out);
  return kExitOk;
}

inline int cmd_strata(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  const POProblem p = detail::resolve_problem(cfg);
  nlohmann::json j;
  j["strata"] = nlohmann::json::array();
  for (const Stratum& s : enumerate_strata(p.gs)) j["strata"].push_back(stratum_json(s));
  GeneralPositionOptions gopt;
  if (!cfg.box.empty()) gopt.box = cfg.box;
  else if (p.options.box) gopt.box = *p.options.box;
  j["general_position"] = general_position_json(check_general_position(p.gs, gopt));
  if (!cfg.point.empty()) {
    if (cfg.point.size() != p.nvars()) throw ValidationError("--point needs one value per variable");
    nlohmann::json pt{{"point", cfg.point}};
    try {
      const Stratum st = locate_stratum(p.gs, cfg.point);
      pt["stratum"] = stratum_json(st);
      try {
        const StratumCriticality sc = critical_on_stratum(p.f, p.gs, st, cfg.point);
        pt["critical"] = sc.is_critical;
        pt["multipliers"] = sc.multipliers;
        pt["stationarity_residual"] = sc.stationarity_residual;
        pt["point_stratum"] = sc.point_stratum;
      } catch (const RankDeficientActiveSet& e) {
        pt["critical"] = nullptr;
        pt["note"] = e.what();
      }
    } catch (const NotOnBoundary& e) {
      pt["stratum"] = nullptr;
      pt["note"] = e.what();
    }
    j["point"] = pt;
  }
  detail::write_json(cfg.out, j, out);
  return kExitOk;
}

inline int cmd_kkt(const RunConfig& cfg, std::ostream& out, std::ostream&) {
  if (cfg.F.empty() || cfg.P.empty()) throw ValidationError("kkt needs --F and at least one --P");
  std::vector<std::string> exprs{cfg.F};
  exprs.insert(exprs.end(), cfg.P.begin(), cfg.P.end());
  const std::vector<std::string> vars = cfg.vars.empty() ? infer_variables(exprs) : cfg.vars;
  const QPoly F = parse_poly(cfg.F, vars);
  std::vector<QPoly> Ps;
  for (const auto& e : cfg.P) Ps.push_back(parse_poly(e, vars));
  const std::vector<double> xi = cfg.xi.empty() ? std::vector<double>(Ps.size(), 0.0) : cfg.xi;
  if (xi.size() != Ps.size()) throw ValidationError("--xi needs one value per --P");
  const PolySystem sys = build_kkt_system(F, Ps, vars);
  detail::maybe_dump(cfg, sys, out);
  nlohmann::json j;
  j["variables"] = vars;
  j["xi"] = xi;
  j["system"] = dump_system(sys);
  j["solutions"] = nlohmann::json::array();
  for (const KKTSolution& s : solve_kkt(F, Ps, xi))
    j["solutions"].push_back({{"x", s.x}, {"u", s.u}, {"residual", s.residual}});
  detail::write_json(cfg.out, j, out);
  return kExitOk;
}

/// Parses argv and dispatches; usable in-process by tests.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Barrier-path analysis for polynomial optimization"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto numeric = [&](CLI::App* sc) {
    sc->add_option("--mu0", cfg.mu0, "initial barrier parameter");
    sc->add_option("--theta", cfg.theta, "geometric ratio of the mu schedule");
    sc->add_option("--steps", cfg.steps, "number of mu samples");
    sc->add_option("--tol", cfg.tol, "limit tolerance");
    sc->add_option("--dump-system", cfg.dump_system, "write the polynomial system as JSON ('-' for stdout)");
    sc->add_option("--out", cfg.out, "output path (default stdout)");
  };

  CLI::App* trace = app.add_subcommand("trace", "trace the barrier critical path and write CSV");
  trace->add_option("--problem", cfg.problem, "catalog id or problem JSON file")->required();
  trace->add_option("--seed", cfg.seed, "strictly feasible seed")->expected(1, -1);
  numeric(trace);

  CLI::App* analyze = app.add_subcommand("analyze", "seed search, tracing, classification and exponents");
  analyze->add_option("--problem", cfg.problem, "catalog id or problem JSON file")->required();
  analyze->add_option("--box", cfg.box, "seed box: lo hi or lo1 hi1 ... lon hin")->expected(2, -1);
  analyze->add_option("--grid", cfg.grid, "seed grid points per dimension");
  analyze->add_option("--max-den", cfg.max_den, "largest exponent denominator");
  numeric(analyze);

  CLI::App* bounded = app.add_subcommand("bounded", "certify real zeros at infinity of a family");
  bounded->add_option("--system", cfg.system, "catalog family id or family JSON file");
  bounded->add_option("--P", cfg.polys, "family member (repeatable)");
  bounded->add_option("--vars", cfg.vars, "variable names")->expected(1, -1);
  bounded->add_option("--max-depth", cfg.max_depth, "subdivision depth limit");
  bounded->add_option("--tol", cfg.tol, "witness tolerance");
  bounded->add_option("--out", cfg.out, "output path (default stdout)");

  CLI::App* strata = app.add_subcommand("strata", "strata, general position and point location");
  strata->add_option("--problem", cfg.problem, "catalog id or problem JSON file")->required();
  strata->add_option("--point", cfg.point, "point to locate")->expected(1, -1);
  strata->add_option("--box", cfg.box, "search box for the general position check")->expected(2, -1);
  strata->add_option("--out", cfg.out, "output path (default stdout)");

  CLI::App* kkt = app.add_subcommand("kkt", "solve the KKT system of F on P = xi");
  kkt->add_option("--F", cfg.F, "objective")->required();
  kkt->add_option("--P", cfg.P, "constraint polynomial (repeatable)")->required();
  kkt->add_option("--xi", cfg.xi, "perturbation values, one per P")->expected(1, -1);
  kkt->add_option("--vars", cfg.vars, "variable names")->expected(1, -1);
  kkt->add_option("--dump-system", cfg.dump_system, "write the KKT system as JSON ('-' for stdout)");
  kkt->add_option("--out", cfg.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (*trace) return cmd_trace(cfg, out, err);
    if (*analyze) return cmd_analyze(cfg, out, err);
    if (*bounded) return cmd_bounded(cfg, out, err);
    if (*strata) return cmd_strata(cfg, out, err);
    if (*kkt) return cmd_kkt(cfg, out, err);
  } catch (const ParseError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ValidationError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const IoError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::invalid_argument& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitInternal;
}

}  // namespace bpl::cli
