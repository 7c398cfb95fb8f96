#include <cmath>

#include <gtest/gtest.h>

#include "hjb/catalog.hpp"
#include "hjb/solver.hpp"
#include "test_problems.hpp"

namespace hjb {
namespace {

using testing::P;

HJBProblem<double> mechanical_1d() {
  // Continuum ergodic constant max_x cos(2 pi x) = 1.
  return testing::simple_problem(1, [](const P& x, const P& p) { return p.squaredNorm() + std::cos(2 * M_PI * x[0]); });
}

TEST(RunCauchy, RecordsMultiplesAndFinalTime) {
  const auto prob = testing::simple_problem(1, [](const P&, const P& p) { return p.norm(); });
  const auto grid = make_grid(1, 16);
  const auto params = SchemeParams<double>::create(prob, 1.0, 1.0);
  const auto traj = run_cauchy(prob, params, Field<double>::constant(grid, 0.0), 1.03, 0.25);
  const std::vector<double> expected{0, 0.25, 0.5, 0.75, 1.0, 1.03};
  ASSERT_EQ(traj.size(), expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) EXPECT_NEAR(traj.times()[i], expected[i], 1e-12);
  EXPECT_THROW(run_cauchy(prob, params, Field<double>(grid), 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(run_cauchy(prob, params, Field<double>(grid), 1.0, 0.0), std::invalid_argument);
}

TEST(RunCauchy, ConstantsStayPut) {
  const auto prob = testing::simple_problem(2, [](const P&, const P& p) { return p.norm(); }, testing::identity_sigma(2, 0.5));
  const auto grid = make_grid(2, 16);
  const auto params = SchemeParams<double>::create(prob, 1.0, 1.0);
  const auto traj = run_cauchy(prob, params, Field<double>::constant(grid, 3.0), 1.0, 0.5);
  for (const auto& s : traj.snapshots()) EXPECT_EQ(s.values().cwiseAbs().maxCoeff(), 3.0);
}

TEST(RunCauchy, HeatDecayRate) {
  const auto prob = testing::simple_problem(1, [](const P&, const P&) { return 0.0; }, testing::identity_sigma(1));
  const auto grid = make_grid(1, 64);
  const auto u0 = Field<double>::sample(grid, [](const P& x) { return std::sin(2 * M_PI * x[0]); });
  const auto params = SchemeParams<double>::create(prob, 1e-12, 1.0);
  const auto traj = run_cauchy(prob, params, u0, 0.05, 0.05);
  const double amplitude = 0.5 * oscillation(traj.back());
  const double exact = std::exp(-4 * M_PI * M_PI * 0.05);
  EXPECT_NEAR(amplitude / exact, 1.0, 0.05);
}

TEST(RunCauchy, RotatingWaveErrorHalvesUnderRefinement) {
  const auto entry = build("counterexample");
  double errors[2];
  int i = 0;
  for (int n : {64, 128}) {
    const auto grid = make_grid(2, n);
    const auto u0 = entry.default_u0(grid);
    const auto traj = run_cauchy(entry.problem, default_scheme_params(entry, u0), u0, 2.0, 0.5);
    double err = 0;
    for (Index k = 0; k < grid.size(); ++k)
      err = std::max(err, std::abs(traj.back()[k] - entry.exact_solution(grid.coordinate(k), 2.0)));
    errors[i++] = err;
  }
  EXPECT_GE(errors[0] / errors[1], 1.7);
}

TEST(RunCauchy, GradientBeyondRangeIsReported) {
  const auto prob = testing::simple_problem(1, [](const P&, const P& p) { return p.norm(); });
  const auto grid = make_grid(1, 32);
  const auto u0 = Field<double>::sample(grid, [](const P& x) { return std::sin(2 * M_PI * x[0]); });
  const auto params = SchemeParams<double>::create(prob, 1.0, 0.5);
  EXPECT_THROW(run_cauchy(prob, params, u0, 0.1, 0.05), SolverError);
}

TEST(RunCauchy, ComparisonAlongTheFlow) {
  const auto entry = build("strict_cvx_hjb");
  const auto grid = make_grid(2, 32);
  const auto u0 = entry.default_u0(grid);
  const auto params = default_scheme_params(entry, u0);
  const Field<double> w0 = u0 + Field<double>::sample(grid, [](const P& x) { return 0.02 * std::pow(std::sin(M_PI * x[0]), 2); });
  const auto a = run_cauchy(entry.problem, params, u0, 1.0, 0.25);
  const auto b = run_cauchy(entry.problem, params, w0, 1.0, 0.25);
  for (std::size_t i = 0; i < a.size(); ++i)
    EXPECT_GE((b.snapshots()[i].values() - a.snapshots()[i].values()).minCoeff(), -1e-12);
  // Adding a constant commutes with the flow.
  const auto c = run_cauchy(entry.problem, params, u0 + 0.7, 1.0, 0.25);
  EXPECT_LT(((c.back().values() - a.back().values()).array() - 0.7).abs().maxCoeff(), 1e-12);
}

TEST(LongTimeSlope, LinearGrowthGivesConstant) {
  // H = |p|^2 - 1 with u0 = 0 has u = t, so c = -1.
  const auto prob = testing::simple_problem(1, [](const P&, const P& p) { return p.squaredNorm() - 1; });
  const auto grid = make_grid(1, 16);
  const auto params = SchemeParams<double>::create(prob, 1.0, 0.5);
  auto traj = run_cauchy(prob, params, Field<double>(grid), 4.0, 0.5);
  EXPECT_NEAR(long_time_slope(traj, 2.0, 4.0), -1.0, 1e-12);
  ASSERT_TRUE(traj.c_estimate.has_value());
  EXPECT_THROW(long_time_slope(traj, 3.0, 2.0), std::invalid_argument);
  EXPECT_THROW(long_time_slope(traj, 0.3, 2.0), std::out_of_range);
}

TEST(LongTimeSlope, StationaryTrajectory) {
  const auto grid = make_grid(1, 8);
  Trajectory<double> traj(grid);
  for (int i = 0; i <= 4; ++i) traj.append(i, Field<double>::constant(grid, 2.0));
  EXPECT_EQ(long_time_slope(traj, 1.0, 4.0), 0.0);
}

TEST(SolveDiscounted, ConstantHamiltonian) {
  // lambda v + H(0) = 0 with H(0) = -1 gives v = 1 / lambda and -lambda v = -1.
  const auto prob = testing::simple_problem(1, [](const P&, const P& p) { return p.squaredNorm() - 1; });
  const auto grid = make_grid(1, 16);
  const auto params = SchemeParams<double>::create(prob, 1.0, 0.5);
  const auto r = solve_discounted(prob, params, grid, 1.0, 1e-12, 100.0);
  EXPECT_NEAR(r.c, -1.0, 1e-12);
  EXPECT_NEAR(r.spread, 0.0, 1e-12);
  EXPECT_NEAR(r.discounted.mean(), 1.0, 1e-12);
  EXPECT_EQ(r.corrector.min(), 0.0);
  EXPECT_THROW(solve_discounted(prob, params, grid, 0.0, 1e-8, 1.0), std::invalid_argument);
}

TEST(SolveDiscounted, ReportsNonConvergence) {
  const auto prob = mechanical_1d();
  const auto grid = make_grid(1, 32);
  const auto params = SchemeParams<double>::create(prob, 5.0, 2.0);
  try {
    solve_discounted(prob, params, grid, 0.01, 1e-12, 1e-3);
    FAIL() << "expected ConvergenceError";
  } catch (const ConvergenceError& e) {
    EXPECT_GT(e.residual(), 0.0);
  }
}

TEST(SolveDiscounted, VanishingDiscountGapsShrink) {
  const auto entry = build("strict_cvx_hjb");
  const auto grid = make_grid(2, 32);
  const auto params = default_scheme_params(entry, entry.default_u0(grid));
  const auto sweep = discount_sweep(entry.problem, params, grid, {0.1, 0.05, 0.025}, 1e-8, 3000.0);
  const double gap1 = std::abs(sweep[0].c - sweep[1].c);
  const double gap2 = std::abs(sweep[1].c - sweep[2].c);
  EXPECT_GE(gap1 / gap2, 1.5);
}

TEST(SolveDiscounted, MechanicalConstantConvergesUnderRefinement) {
  // c_h -> 1 at first order: the Lax-Friedrichs viscosity alpha h / 2 biases the discrete constant.
  double prev = 0;
  for (int n : {32, 64, 128, 256}) {
    const auto grid = make_grid(1, n);
    const auto params = SchemeParams<double>::create(mechanical_1d(), 2 * 2.0 + 0.01, 2.0);
    const auto r = discount_sweep(mechanical_1d(), params, grid, {0.05, 0.01, 0.002}, 1e-10, 1e5).back();
    const double err = std::abs(r.c - 1.0);
    if (prev > 0) EXPECT_GE(prev / err, 1.5) << "n=" << n;
    prev = err;
  }
  EXPECT_LT(prev, 0.05);
}

TEST(NrErgodicConstant, ClosedForm) {
  const auto entry = build("namah_roquejoffre");
  const auto grid = make_grid(2, 64);
  EXPECT_EQ(nr_ergodic_constant(entry.problem, degeneracy_set(entry.problem, grid)), -1.0);

  const auto zero_at_rest = testing::simple_problem(1, [](const P&, const P& p) { return p.norm(); });
  EXPECT_EQ(nr_ergodic_constant(zero_at_rest, degeneracy_set(zero_at_rest, make_grid(1, 16))), 0.0);

  const auto elliptic = testing::simple_problem(1, [](const P&, const P& p) { return p.norm(); }, testing::identity_sigma(1));
  EXPECT_THROW(nr_ergodic_constant(elliptic, degeneracy_set(elliptic, make_grid(1, 16))), std::invalid_argument);
}

TEST(NrErgodicConstant, DiscountedAgrees) {
  const auto entry = build("namah_roquejoffre");
  const auto grid = make_grid(2, 64);
  const auto params = default_scheme_params(entry, entry.default_u0(grid));
  const auto r = discount_sweep(entry.problem, params, grid, {0.1, 0.05, 0.025}, 1e-8, 2400.0).back();
  EXPECT_NEAR(r.c, -1.0, 1e-2);
}

}  // namespace
}  // namespace hjb
