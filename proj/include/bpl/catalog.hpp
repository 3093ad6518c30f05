#pragma once

// Built-in fixtures keyed by stable ids: optimization problems, polynomial
// families for the infinity certificate, and (F, P) pairs for KKT systems.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bpl/parser.hpp"
#include "bpl/problem.hpp"

namespace bpl {

struct ProblemSpec {
  std::string id;
  std::string description;
  std::vector<std::string> variables;
  std::string objective;
  std::vector<std::string> constraints;
  ProblemOptions options;
};

struct FamilySpec {
  std::string id;
  std::string description;
  std::vector<std::string> variables;
  std::vector<std::string> polys;
};

struct KKTSpec {
  std::string id;
  std::string description;
  std::vector<std::string> variables;
  std::string objective;
  std::vector<std::string> constraints;  // P_1, ..., P_s
};

/// A family of polynomials over named variables.
struct Family {
  std::string name;
  std::vector<std::string> varnames;
  std::vector<QPoly> polys;
};

inline const std::vector<ProblemSpec>& problem_catalog() {
  static const std::vector<ProblemSpec> specs = [] {
    std::vector<ProblemSpec> v;
    auto add = [&](std::string id, std::string desc, std::string f, std::vector<std::string> g,
                   std::vector<double> seed, std::vector<double> box) {
      ProblemSpec s{std::move(id), std::move(desc), {"x1", "x2"}, std::move(f), std::move(g), {}};
      s.options.seed = std::move(seed);
      s.options.box = std::move(box);
      v.push_back(std::move(s));
    };
    add("cusp", "inf x1 s.t. x1^3 - x2^2 >= 0; unique central path (3 mu, 0)", "x1",
        {"x1^3 - x2^2"}, {1.0, 0.0}, {0.0, 2.0, -1.0, 1.0});
    add("no-central-path", "inf x1 s.t. x1^2 + x2^2 >= 1, x1 >= 0; critical path to (1,0)", "x1",
        {"x1^2 + x2^2 - 1", "x1"}, {2.0, 0.0}, {0.0, 3.0, -1.0, 1.0});
    add("non-existence", "inf x1*x2^2 over the nonnegative orthant; no barrier critical point",
        "x1*x2^2", {"x1", "x2"}, {1.0, 1.0}, {0.0, 2.0, 0.0, 2.0});
    add("morse-non-compact", "inf x1^2 + x2^2 s.t. x1^2 + x2^2 >= 1; circle of solutions",
        "x1^2 + x2^2", {"x1^2 + x2^2 - 1"}, {1.5, 0.0}, {-2.0, 2.0, -2.0, 2.0});
    add("figure-eight", "inf x1 over the solid figure eight; paths to (-1,0) and (0,0)", "x1",
        {"x1^2 - x1^4 - x2^4 - x2^2"}, {-0.9, 0.0}, {-1.5, 1.5, -1.5, 1.5});
    add("non-analytic", "inf x1 s.t. x1^3 - x2^2 >= 0, x2 >= 0; path to the cusp point", "x1",
        {"x1^3 - x2^2", "x2"}, {1.0, 0.5}, {0.0, 2.0, 0.0, 2.0});
    add("no-critical-path", "inf x1^2 - x2^2 s.t. x2 >= 0; Morse objective without a path",
        "x1^2 - x2^2", {"x2"}, {0.5, 1.0}, {-2.0, 2.0, 0.0, 2.0});
    return v;
  }();
  return specs;
}

inline const std::vector<FamilySpec>& family_catalog() {
  static const std::vector<FamilySpec> specs = {
      {"remark-unbounded", "empty variety with unbounded perturbations", {"x1", "x2"},
       {"x1^2 + x2^2 + (x1*x2 - 1)^2"}},
      {"unit-circle", "x1^2 + x2^2 - 1", {"x1", "x2"}, {"x1^2 + x2^2 - 1"}},
      {"hyperbola", "x1*x2 - 1", {"x1", "x2"}, {"x1*x2 - 1"}},
      {"figure-eight", "boundary of the solid figure eight", {"x1", "x2"},
       {"x1^2 - x1^4 - x2^4 - x2^2"}},
  };
  return specs;
}

inline const std::vector<KKTSpec>& kkt_catalog() {
  static const std::vector<KKTSpec> specs = {
      {"finitely-many", "F = x1 on x1^3 - x2^2 = xi", {"x1", "x2"}, "x1", {"x1^3 - x2^2"}},
      {"non-degenerate", "F = x1 + x2 on x1*x2 = xi", {"x1", "x2"}, "x1 + x2", {"x1*x2"}},
      {"non-morse-smooth", "F = x1^3 + x1*x2^2 on x2 - x1 = xi", {"x1", "x2"},
       "x1^3 + x1*x2^2", {"x2 - x1"}},
      {"morse-singular", "F = x1^2 - x2^2 on x1*x2 = xi", {"x1", "x2"}, "x1^2 - x2^2", {"x1*x2"}},
      {"no-critical-path", "F = x1^2 - x2^2 on x2 = xi", {"x1", "x2"}, "x1^2 - x2^2", {"x2"}},
  };
  return specs;
}

inline std::vector<std::string> catalog_problem_ids() {
  std::vector<std::string> ids;
  for (const auto& s : problem_catalog()) ids.push_back(s.id);
  return ids;
}

inline std::optional<POProblem> catalog_problem(const std::string& id) {
  for (const auto& s : problem_catalog()) {
    if (s.id != id) continue;
    POProblem p;
    p.name = s.id;
    p.varnames = s.variables;
    p.f = parse_poly(s.objective, p.varnames);
    for (const auto& g : s.constraints) p.gs.push_back(parse_constraint(g, p.varnames));
    p.options = s.options;
    p.provenance = "catalog:" + s.id;
    validate(p);
    return p;
  }
  return std::nullopt;
}

inline std::optional<Family> catalog_family(const std::string& id) {
  for (const auto& s : family_catalog()) {
    if (s.id != id) continue;
    Family fam{s.id, s.variables, {}};
    for (const auto& e : s.polys) fam.polys.push_back(parse_poly(e, fam.varnames));
    return fam;
  }
  return std::nullopt;
}

struct KKTFixture {
  std::string name;
  std::vector<std::string> varnames;
  QPoly F;
  std::vector<QPoly> Ps;
};

inline std::optional<KKTFixture> catalog_kkt(const std::string& id) {
  for (const auto& s : kkt_catalog()) {
    if (s.id != id) continue;
    KKTFixture k{s.id, s.variables, parse_poly(s.objective, s.variables), {}};
    for (const auto& e : s.constraints) k.Ps.push_back(parse_poly(e, k.varnames));
    return k;
  }
  return std::nullopt;
}

/// Resolves a problem source: a catalog id first, otherwise a file path.
inline POProblem load_problem(const std::string& source) {
  if (auto p = catalog_problem(source)) return *p;
  return load_problem_file(source);
}

}  // namespace bpl
