#pragma once

// Polynomial optimization problems  inf { f(x) : g_i(x) >= 0 }  and their
// JSON problem-file container.

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bpl/parser.hpp"
#include "bpl/polynomial.hpp"

namespace bpl {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Per-problem overrides of numeric defaults.
struct ProblemOptions {
  std::optional<double> mu0;
  std::optional<double> theta;
  std::optional<int> steps;
  std::optional<double> tol;
  std::optional<std::vector<double>> seed;
  std::optional<std::vector<double>> box;  // [lo, hi] or [lo1, hi1, ..., lon, hin]
};

struct POProblem {
  std::string name;
  std::vector<std::string> varnames;
  QPoly f;
  std::vector<QPoly> gs;  // each constraint reads g_i(x) >= 0
  ProblemOptions options;
  std::string provenance;
  std::vector<std::string> warnings;

  std::size_t nvars() const { return varnames.size(); }
  std::size_t nconstraints() const { return gs.size(); }
};

/// Checks the structural invariants and records (but does not reject) a
/// vanishing objective gradient.
inline void validate(POProblem& p) {
  if (p.varnames.empty()) throw ValidationError("problem '" + p.name + "' declares no variables");
  for (std::size_t i = 0; i < p.varnames.size(); ++i)
    for (std::size_t j = i + 1; j < p.varnames.size(); ++j)
      if (p.varnames[i] == p.varnames[j])
        throw ValidationError("duplicate variable '" + p.varnames[i] + "'");
  if (p.gs.empty()) throw ValidationError("problem '" + p.name + "' has no constraints (r = 0)");
  if (p.f.nvars() != p.nvars()) throw ValidationError("objective has wrong variable count");
  for (const QPoly& g : p.gs)
    if (g.nvars() != p.nvars()) throw ValidationError("constraint has wrong variable count");
  const auto grad = gradient(p.f);
  if (std::all_of(grad.begin(), grad.end(), [](const QPoly& d) { return d.is_zero(); }))
    p.warnings.push_back("objective gradient vanishes identically");
}

inline ProblemOptions parse_options(const nlohmann::json& j) {
  ProblemOptions o;
  if (!j.is_object()) throw ValidationError("'options' must be an object");
  if (j.contains("mu0")) o.mu0 = j.at("mu0").get<double>();
  if (j.contains("theta")) o.theta = j.at("theta").get<double>();
  if (j.contains("steps")) o.steps = j.at("steps").get<int>();
  if (j.contains("tol")) o.tol = j.at("tol").get<double>();
  if (j.contains("seed")) o.seed = j.at("seed").get<std::vector<double>>();
  if (j.contains("box")) o.box = j.at("box").get<std::vector<double>>();
  return o;
}

inline nlohmann::json options_to_json(const ProblemOptions& o) {
  nlohmann::json j = nlohmann::json::object();
  if (o.mu0) j["mu0"] = *o.mu0;
  if (o.theta) j["theta"] = *o.theta;
  if (o.steps) j["steps"] = *o.steps;
  if (o.tol) j["tol"] = *o.tol;
  if (o.seed) j["seed"] = *o.seed;
  if (o.box) j["box"] = *o.box;
  return j;
}

/// Builds a problem from the JSON container
/// {name, variables:[...], objective:"...", constraints:["...",...], options:{...}}.
inline POProblem problem_from_json(const nlohmann::json& j, const std::string& provenance) {
  POProblem p;
  try {
    if (!j.is_object()) throw ValidationError("problem file must hold a JSON object");
    p.name = j.value("name", std::string("unnamed"));
    p.varnames = j.at("variables").get<std::vector<std::string>>();
    p.f = parse_poly(j.at("objective").get<std::string>(), p.varnames);
    for (const auto& c : j.at("constraints")) p.gs.push_back(parse_constraint(c.get<std::string>(), p.varnames));
    if (j.contains("options")) p.options = parse_options(j.at("options"));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed problem container: ") + e.what());
  }
  p.provenance = provenance;
  validate(p);
  return p;
}

inline nlohmann::json problem_to_json(const POProblem& p) {
  nlohmann::json j;
  j["name"] = p.name;
  j["variables"] = p.varnames;
  j["objective"] = to_string(p.f, p.varnames);
  j["constraints"] = nlohmann::json::array();
  for (const QPoly& g : p.gs) j["constraints"].push_back(to_string(g, p.varnames) + " >= 0");
  j["options"] = options_to_json(p.options);
  return j;
}

/// Reads and validates a problem file.
inline POProblem load_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open problem file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError("problem file '" + path + "' is not valid JSON: " + e.what());
  }
  return problem_from_json(j, "file:" + path);
}

}  // namespace bpl
