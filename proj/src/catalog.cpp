#include "hjb/catalog.hpp"

#include <cmath>
#include <stdexcept>

namespace hjb {

namespace {

using Pt = Point<double>;
constexpr double kPi = 3.14159265358979323846;
constexpr double kTwoPi = 2 * kPi;

std::vector<std::vector<DiffusionColumn<double>>> isotropic(int dim, CoefficientFn<double> a) {
  std::vector<DiffusionColumn<double>> cols;
  for (int i = 0; i < dim; ++i) cols.push_back({a, LatticeDirection::axis(dim, i)});
  return {cols};
}

std::vector<std::vector<DiffusionColumn<double>>> single_column(CoefficientFn<double> a, LatticeDirection e) {
  return {{DiffusionColumn<double>{std::move(a), e}}};
}

HamiltonianFn<double> from_split(const NRDecomposition& split) {
  return [split](int th, const Pt& x, const Pt& p) { return split.F(th, x, p) - split.f(th, x); };
}

// Vanishes on the coordinate planes {x1 = 0} and {x2 = 0}; shared by the two degenerate-matrix entries.
double cube_boundary_bump(const Pt& x) {
  const double s1 = std::sin(kPi * x[0]), s2 = std::sin(kPi * x[1]);
  return 0.1 * s1 * s1 * s2 * s2;
}

CatalogEntry strict_cvx_hjb() {
  const int dim = 2;
  auto H = [](int, const Pt& x, const Pt& p) { return p.squaredNorm() + std::cos(kTwoPi * x[0]); };
  auto a = [](const Pt& x) {
    const double s = std::sin(kTwoPi * x[0]);
    return 0.1 * s * s;
  };
  NRDecomposition split{[](int, const Pt&, const Pt& p) { return p.squaredNorm(); },
                        [](int, const Pt& x) { return -std::cos(kTwoPi * x[0]); }};
  VerifierSettings vs;
  vs.superlinear_L1 = 3;
  vs.superlinear_range = 6;
  return CatalogEntry{
      "strict_cvx_hjb",
      HJBProblem<double>(dim, ControlSet(), H, isotropic(dim, a), 4.0),
      dim,
      std::nullopt,
      {},
      {{"convexity", Verdict::holds_on_samples},
       {"cvx_neuf", Verdict::holds_on_samples},
       {"inver_dege", Verdict::holds_on_samples},
       {"BSsuperlinear", Verdict::holds_on_samples}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return 0.1 * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]); });
      },
      2.0,
      64,
      true,
      split,
      vs,
      "|p|^2 + cos(2 pi x1), sigma = a(x) I with a = 0.1 sin^2(2 pi x1)"};
}

CatalogEntry unif_cvx() {
  const int dim = 2;
  auto H = [](int, const Pt& x, const Pt& p) {
    return 0.5 * p.squaredNorm() + 0.5 * (std::sin(kTwoPi * x[1]) * p[0] + std::sin(kTwoPi * x[0]) * p[1]);
  };
  auto a = [](const Pt& x) {
    const double s = std::sin(kPi * x[1]);
    return 0.1 * s * s;
  };
  VerifierSettings vs;
  vs.superlinear_L1 = 3;
  vs.superlinear_range = 6;
  return CatalogEntry{
      "unif_cvx",
      HJBProblem<double>(dim, ControlSet(), H, isotropic(dim, a), 3.0),
      dim,
      KnownConstant{0.0, "derived: constants solve the cell problem since H(x,0) = 0"},
      {},
      {{"convexity", Verdict::holds_on_samples},
       {"cvx_neuf", Verdict::holds_on_samples},
       {"inver_dege", Verdict::holds_on_samples},
       {"BSsuperlinear", Verdict::holds_on_samples}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return 0.5 * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]); });
      },
      2.0,
      64,
      true,
      std::nullopt,
      vs,
      "|p|^2/2 + <b(x),p>, b = 0.5 (sin 2 pi x2, sin 2 pi x1), sigma = a(x2) I"};
}

CatalogEntry nonconvex_bs() {
  const int dim = 2;
  // psi(x,p) F(x, p/|p|) - f(x) with psi = |p + h|^2 - |h|^2 and a direction-dependent F.
  auto H = [](int, const Pt& x, const Pt& p) {
    const double c1 = std::cos(kTwoPi * x[0]);
    const double h1 = 0.5 * std::sin(kTwoPi * x[0]);
    const double f = 1 - c1;
    const double r = p.norm();
    if (r == 0) return -f;
    const double psi = p.squaredNorm() + 2 * h1 * p[0];
    const double F = 1 + 0.8 * c1 * p[0] / r;
    return psi * F - f;
  };
  auto a = [](const Pt& x) {
    const double s = std::sin(kPi * x[0]);
    return 0.1 * s * s;
  };
  VerifierSettings vs;
  vs.h10_c = 0.0;
  vs.superlinear_L1 = 40;
  vs.superlinear_range = 80;
  return CatalogEntry{
      "nonconvex_bs",
      HJBProblem<double>(dim, ControlSet(), H, isotropic(dim, a), 10.0),
      dim,
      KnownConstant{0.0, "closed form: f = |h| = |sigma| = 0 at x1 = 0 and H(x,0) = -f <= 0"},
      {},
      {{"convexity", Verdict::violated},
       {"H10", Verdict::holds_on_samples},
       {"inver_dege", Verdict::holds_on_samples},
       {"BSsuperlinear", Verdict::holds_on_samples}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return 0.2 * std::cos(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
      },
      2.0,
      64,
      true,
      std::nullopt,
      vs,
      "(|p+h|^2 - |h|^2) F(x,p/|p|) - f, h = (0.5 sin 2 pi x1, 0), F = 1 + 0.8 cos(2 pi x1) xi1, f = 1 - cos 2 pi x1"};
}

CatalogEntry dege_matrix_a() {
  const int dim = 2;
  NRDecomposition split{[](int, const Pt&, const Pt& p) { return 0.5 * p.squaredNorm(); },
                        [](int, const Pt& x) { return -0.5 * (std::cos(kTwoPi * x[0]) + std::cos(kTwoPi * x[1])); }};
  return CatalogEntry{
      "dege_matrix_a",
      HJBProblem<double>(dim, ControlSet(), from_split(split),
                         single_column(cube_boundary_bump, LatticeDirection::diagonal()), 3.0),
      dim,
      std::nullopt,
      {},
      {{"convexity", Verdict::holds_on_samples},
       {"cvx_neuf", Verdict::holds_on_samples},
       {"inver_dege", Verdict::violated},
       {"kernel_condition", Verdict::holds_on_samples}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return 0.2 * std::sin(kTwoPi * x[0]) * std::sin(kTwoPi * x[1]); });
      },
      2.5,
      64,
      true,
      split,
      VerifierSettings{},
      "|p|^2/2 + (cos 2 pi x1 + cos 2 pi x2)/2, sigma = a(x) (1,1), a = 0.1 sin^2(pi x1) sin^2(pi x2)"};
}

CatalogEntry strict_on_sigma_1d() {
  const int dim = 1;
  auto a = [](const Pt& x) {
    const double c = std::max(0.0, std::cos(kTwoPi * x[0]));
    return c * c;
  };
  NRDecomposition split{[a](int, const Pt& x, const Pt& p) { return (1 - a(x)) * p.squaredNorm(); },
                        [](int, const Pt& x) {
                          // Flat minimum 1/4 on [3/8, 5/8], inside Sigma = [1/4, 3/4].
                          const double g = std::max(0.0, std::cos(kTwoPi * x[0]) + std::sqrt(0.5));
                          return 0.25 + 0.25 * g * g;
                        }};
  return CatalogEntry{
      "strict_on_sigma_1d",
      HJBProblem<double>(dim, ControlSet(), from_split(split), single_column(a, LatticeDirection::axis(1, 0)), 6.0),
      dim,
      KnownConstant{-0.25, "closed form: -min over Sigma of f, attained on [3/8, 5/8]"},
      {},
      {{"convexity", Verdict::holds_on_samples},
       {"cvx_neuf", Verdict::holds_on_samples},
       {"inver_dege", Verdict::holds_on_samples},
       {"hyp_nr", Verdict::holds_on_samples}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return 0.1 * std::sin(kTwoPi * x[0]); });
      },
      1.0,
      128,
      true,
      split,
      VerifierSettings{},
      "-a^2 u'' + (1 - a) |u'|^2 = f, a = max(0, cos 2 pi x)^2, f = 1/4 + max(0, cos 2 pi x + 1/sqrt 2)^2 / 4"};
}

CatalogEntry counterexample() {
  const int dim = 2;
  auto a = [](const Pt& x) {
    const double s = std::sin(kPi * x[0]);
    return s * s;
  };
  VerifierSettings vs;
  vs.h10_c = 0.0;
  vs.grad_range = 4.0;
  return CatalogEntry{
      "counterexample",
      counterexample_problem(a),
      dim,
      KnownConstant{0.0, "derived: v = 0 solves the cell problem since H(0) = 0"},
      [](const Pt& x, double t) { return std::sin(kTwoPi * (x[0] + x[1]) - t); },
      {{"convexity", Verdict::holds_on_samples},
       {"cvx_neuf", Verdict::violated},
       {"H10", Verdict::violated},
       {"inver_dege", Verdict::violated}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return std::sin(kTwoPi * (x[0] + x[1])); });
      },
      1.0,
      64,
      false,
      std::nullopt,
      vs,
      "travelling wave sin(2 pi (x1 + x2) - t), A = a^2/(4 pi^2) [[1,-1],[-1,1]], a = sin^2(pi x1)"};
}

CatalogEntry namah_roquejoffre() {
  const int dim = 2;
  NRDecomposition split{[](int, const Pt& x, const Pt& p) { return p.norm() * (1 + 0.2 * std::sin(kTwoPi * x[0])); },
                        [](int, const Pt& x) { return 2 - std::cos(kTwoPi * (x[0] - 0.5)); }};
  VerifierSettings vs;
  vs.h10_K_from_nr = true;
  return CatalogEntry{
      "namah_roquejoffre",
      HJBProblem<double>(dim, ControlSet(), from_split(split),
                         single_column(cube_boundary_bump, LatticeDirection::diagonal()), 1.2),
      dim,
      KnownConstant{-1.0, "closed form: -min over Sigma of f, attained at (1/2, 0)"},
      {},
      {{"convexity", Verdict::holds_on_samples},
       {"cvx_neuf", Verdict::violated},
       {"H10", Verdict::holds_on_samples},
       {"hyp_nr", Verdict::holds_on_samples},
       {"kernel_condition", Verdict::holds_on_samples}},
      [](const TorusGrid<double>& g) {
        return Field<double>::sample(g, [](const Pt& x) { return 0.3 * std::sin(kTwoPi * x[0]) * std::cos(kTwoPi * x[1]); });
      },
      3.0,
      64,
      true,
      split,
      vs,
      "|p| (1 + 0.2 sin 2 pi x1) - (2 - cos 2 pi (x1 - 1/2)), sigma as in dege_matrix_a"};
}

}  // namespace

HJBProblem<double> counterexample_problem(CoefficientFn<double> a) {
  if (!a) throw std::invalid_argument("counterexample_problem: missing coefficient");
  // Unit-torus rescaling of |q + (1,1)|/sqrt(2) - 1 with q = p / (2 pi).
  auto H = [](int, const Pt&, const Pt& p) {
    Pt q = p;
    q.array() += kTwoPi;
    return q.norm() / (kTwoPi * std::sqrt(2.0)) - 1;
  };
  auto coeff = [a = std::move(a)](const Pt& x) { return a(x) / kTwoPi; };
  return HJBProblem<double>(2, ControlSet(), H, single_column(coeff, LatticeDirection::antidiagonal()),
                            1 / (kTwoPi * std::sqrt(2.0)));
}

std::vector<std::string> catalog_names() {
  return {"strict_cvx_hjb",     "unif_cvx",       "nonconvex_bs",     "dege_matrix_a",
          "strict_on_sigma_1d", "counterexample", "namah_roquejoffre"};
}

CatalogEntry build(const std::string& name) {
  if (name == "strict_cvx_hjb") return strict_cvx_hjb();
  if (name == "unif_cvx") return unif_cvx();
  if (name == "nonconvex_bs") return nonconvex_bs();
  if (name == "dege_matrix_a") return dege_matrix_a();
  if (name == "strict_on_sigma_1d") return strict_on_sigma_1d();
  if (name == "counterexample") return counterexample();
  if (name == "namah_roquejoffre") return namah_roquejoffre();
  std::string list;
  for (const auto& n : catalog_names()) list += (list.empty() ? "" : ", ") + n;
  throw std::invalid_argument("unknown problem '" + name + "'; available: " + list);
}

SchemeParams<double> default_scheme_params(const CatalogEntry& entry, const Field<double>& u0) {
  return SchemeParams<double>::for_initial_datum(entry.problem, u0, entry.grad_range_hint);
}

bool uses_h10_route(const CatalogEntry& entry) {
  const auto it = entry.expected_checks.find("H10");
  return it != entry.expected_checks.end() && it->second == Verdict::holds_on_samples;
}

std::vector<CheckReport> run_expected_checks(const CatalogEntry& entry, int n, std::uint64_t seed) {
  const TorusGrid<double> grid(entry.dim, n);
  const auto mask = degeneracy_set(entry.problem, grid);
  const auto& vs = entry.verifier;
  const SamplingParams sampling{vs.grad_range, seed};

  std::optional<ConvexityReports> cvx;
  auto convexity = [&]() -> const ConvexityReports& {
    if (!cvx) cvx = check_convexity(entry.problem, mask, vs.samples, sampling);
    return *cvx;
  };

  std::vector<CheckReport> out;
  for (const auto& [name, expected] : entry.expected_checks) {
    (void)expected;
    if (name == "convexity") {
      out.push_back(convexity().plain);
    } else if (name == "cvx_neuf") {
      out.push_back(convexity().strict_on_sigma);
    } else if (name == "H10") {
      const double c = vs.h10_c ? *vs.h10_c : entry.known_c.value().value;
      std::optional<std::vector<char>> K;
      if (vs.h10_K_from_nr) K = nr_argmin_set(entry.problem, entry.nr_split.value(), mask);
      out.push_back(check_H10(entry.problem, H10Params(c, vs.h10_mu0, K), mask, vs.samples, sampling));
    } else if (name == "inver_dege") {
      out.push_back(check_uniform_ellipticity(entry.problem, mask, vs.ellipticity_delta));
    } else if (name == "BSsuperlinear") {
      out.push_back(check_superlinear(entry.problem, SuperlinearParams(vs.superlinear_L1, vs.superlinear_range), grid,
                                      vs.samples, seed));
    } else if (name == "hyp_nr") {
      out.push_back(check_nr_structure(entry.problem, entry.nr_split.value(), mask, vs.samples, sampling));
    } else if (name == "kernel_condition") {
      out.push_back(check_kernel_condition(entry.problem, mask, vs.samples, seed));
    } else {
      throw std::invalid_argument("run_expected_checks: no checker for '" + name + "'");
    }
  }
  return out;
}

}  // namespace hjb
