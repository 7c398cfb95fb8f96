#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hjb/problem_model.hpp"
#include "hjb/scheme.hpp"
#include "hjb/verifier.hpp"

namespace hjb {

struct KnownConstant {
  double value;
  std::string provenance;  // how the value is known, e.g. "closed form: max over Sigma of H(x,0)"
};

/// Parameters the verifier needs for one entry's hypothesis checks.
struct VerifierSettings {
  int samples = 2000;
  double grad_range = 2.0;               // p-sampling radius
  std::optional<double> h10_c;           // c tested in (H10); defaults to known_c
  double h10_mu0 = 2.0;
  bool h10_K_from_nr = false;            // take K as the argmin set of the NR split
  double superlinear_L1 = 1.0;
  double superlinear_range = 2.0;
  double ellipticity_delta = 0.1;
};

struct CatalogEntry {
  std::string name;
  HJBProblem<double> problem;
  int dim;
  std::optional<KnownConstant> known_c;
  std::function<double(const Point<double>& x, double t)> exact_solution;  // empty when unknown
  std::map<std::string, Verdict> expected_checks;
  std::function<Field<double>(const TorusGrid<double>&)> default_u0;
  double grad_range_hint;  // lower bound for the scheme's gradient range
  int default_n;
  bool convergent;         // a convergence theorem applies
  std::optional<NRDecomposition> nr_split;
  VerifierSettings verifier;
  std::string description;
};

/// Entry names in catalog order.
std::vector<std::string> catalog_names();

/// Throws std::invalid_argument listing the available names when `name` is unknown.
CatalogEntry build(const std::string& name);

/// The rotating-wave problem on the unit torus with a caller-chosen diffusion amplitude a(x).
HJBProblem<double> counterexample_problem(CoefficientFn<double> a);

/// Scheme parameters for a run from u0: gradient range max(1.5 Lip(u0), grad_range_hint).
SchemeParams<double> default_scheme_params(const CatalogEntry& entry, const Field<double>& u0);

/// True when the entry's convergence argument goes through (H10); the M+ probe then uses v = 0
/// instead of the discounted corrector.
bool uses_h10_route(const CatalogEntry& entry);

/// Runs every check named in entry.expected_checks on an n^dim grid; reports come back in map order.
std::vector<CheckReport> run_expected_checks(const CatalogEntry& entry, int n, std::uint64_t seed = 42);

}  // namespace hjb
