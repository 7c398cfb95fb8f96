#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "hjb/diagnostics.hpp"
#include "test_problems.hpp"

namespace hjb {
namespace {

using testing::P;

Trajectory<double> sampled(const TorusGrid<double>& grid, double t_final, double dt,
                           const std::function<double(const P&, double)>& u) {
  Trajectory<double> traj(grid);
  const int steps = static_cast<int>(std::lround(t_final / dt));
  for (int i = 0; i <= steps; ++i) {
    const double t = i * dt;
    traj.append(t, Field<double>::sample(grid, [&](const P& x) { return u(x, t); }));
  }
  return traj;
}

Trajectory<double> random_trajectory(std::uint64_t seed) {
  const auto grid = make_grid(1, 8);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> d;
  Trajectory<double> traj(grid);
  for (int i = 0; i < 12; ++i) {
    Field<double> f(grid);
    for (Index k = 0; k < grid.size(); ++k) f[k] = d(rng);
    traj.append(0.5 * i, f);
  }
  return traj;
}

TEST(ProbeParams, Validation) {
  EXPECT_THROW(ProbeParams<double>(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(ProbeParams<double>(0.1, 0.5), std::invalid_argument);
}

TEST(ComputeP, StationaryReferenceGivesZero) {
  const auto grid = make_grid(1, 8);
  const auto v = Field<double>::sample(grid, [](const P& x) { return std::cos(2 * M_PI * x[0]); });
  const auto traj = sampled(grid, 2.0, 0.25, [](const P& x, double) { return std::cos(2 * M_PI * x[0]); });
  const ProbeParams<double> probe(0.1, 1.0, v);
  for (Index k = 0; k < grid.size(); ++k) EXPECT_EQ(compute_P(traj, probe, k, 2), 0.0);
  EXPECT_THROW(compute_P(traj, probe, 0, traj.size()), std::out_of_range);
}

TEST(ComputeP, NondecreasingInTimeGivesZero) {
  const auto grid = make_grid(1, 8);
  const auto traj = sampled(grid, 3.0, 0.5, [](const P& x, double t) { return x[0] + t * t; });
  const ProbeParams<double> probe(0.01, 1.0);
  for (std::size_t i = 0; i < traj.size(); ++i) EXPECT_EQ(compute_P(traj, probe, 3, i), 0.0);
}

TEST(ComputeP, RotatingWaveMatchesScan) {
  // At the node where sin(2 pi (x1 + x2)) is largest, P(0) = max_s sin(th) - sin(th - s) - 0.01 s.
  const auto grid = make_grid(2, 16);
  const auto traj = sampled(grid, 10.0, 0.05, testing::wave);
  const Index node = grid.node({2, 2});  // x1 + x2 = 1/4
  double expected = -INFINITY;
  for (std::size_t j = 0; j < traj.size(); ++j) {
    const double s = traj.times()[j];
    expected = std::max(expected, 1.0 - std::sin(M_PI / 2 - s) - 0.01 * s);
  }
  EXPECT_NEAR(compute_P(traj, ProbeParams<double>(0.01, 1.0), node, 0), expected, 1e-12);
  EXPECT_NEAR(expected, 2.0 - 0.01 * M_PI, 2e-3);
}

TEST(ComputeP, InvariantUnderConstantShift) {
  auto traj = random_trajectory(9);
  Trajectory<double> lifted(traj.grid());
  for (std::size_t i = 0; i < traj.size(); ++i) lifted.append(traj.times()[i], traj.snapshots()[i] + 4.2);
  const ProbeParams<double> probe(0.05, 1.0);
  for (Index k = 0; k < 8; ++k)
    for (std::size_t i = 0; i < traj.size(); ++i)
      EXPECT_NEAR(compute_P(traj, probe, k, i), compute_P(lifted, probe, k, i), 1e-12);
}

TEST(ComputeMSeries, MatchesBruteForce) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const auto traj = random_trajectory(seed);
    for (double mu : {1.0, 1.5}) {
      const auto grid = traj.grid();
      const auto v = Field<double>::sample(grid, [](const P& x) { return x[0]; });
      const ProbeParams<double> probe(0.07, mu, v);
      const auto series = compute_M_series(traj, probe);
      ASSERT_EQ(series.size(), traj.size());
      for (std::size_t i = 0; i < traj.size(); ++i) {
        double m = 0;
        for (Index k = 0; k < grid.size(); ++k) m = std::max(m, compute_P(traj, probe, k, i));
        EXPECT_NEAR(series[i].second, m, 1e-12);
        EXPECT_EQ(series[i].first, traj.times()[i]);
      }
    }
  }
}

TEST(ComputeMSeries, StationaryIsZero) {
  const auto grid = make_grid(2, 8);
  const auto traj = sampled(grid, 2.0, 0.5, [](const P& x, double) { return x[0] * x[1]; });
  for (const auto& [t, m] : compute_M_series(traj, ProbeParams<double>(0.01, 1.0))) EXPECT_EQ(m, 0.0);
}

TEST(ComputeMSeries, RotatingWaveStaysLarge) {
  const auto grid = make_grid(2, 16);
  const auto traj = sampled(grid, 20.0, 0.1, testing::wave);
  const auto series = compute_M_series(traj, ProbeParams<double>(0.01, 1.0));
  for (const auto& [t, m] : series)
    if (t <= 10.0) EXPECT_GE(m, 1.5) << "t=" << t;
}

TEST(WorstIncrease, LargestStepUp) {
  const std::vector<std::pair<double, double>> s{{0, 3}, {1, 2}, {2, 2.5}, {3, 1}, {4, 1.2}};
  EXPECT_DOUBLE_EQ(worst_increase(s), 0.5);
  EXPECT_EQ(worst_increase(std::vector<std::pair<double, double>>{{0, 3}, {1, 1}}), 0.0);
}

TEST(ShiftedOscillation, AgainstFinalSnapshot) {
  const auto grid = make_grid(1, 8);
  const auto traj = sampled(grid, 2.0, 1.0, [](const P& x, double t) { return std::exp(-t) * std::sin(2 * M_PI * x[0]) - 3 * t; });
  const auto osc = shifted_oscillation_series(traj);
  ASSERT_EQ(osc.size(), 3u);
  EXPECT_NEAR(osc[0], 2 * (1 - std::exp(-2.0)), 1e-12);
  EXPECT_NEAR(osc[2], 0.0, 1e-15);
}

TEST(ConvergenceVerdict, ShiftedStationaryProfile) {
  const auto grid = make_grid(2, 8);
  const auto traj = sampled(grid, 8.0, 0.5, [](const P& x, double t) { return std::cos(2 * M_PI * x[0]) + 0.7 * t; });
  const auto v = convergence_verdict(traj, -0.7, 1e-3);
  EXPECT_TRUE(v.converged);
  EXPECT_NEAR(v.final_osc, 0.0, 1e-12);
  EXPECT_NEAR(v.m_plus_tail, 0.0, 1e-12);
}

TEST(ConvergenceVerdict, RotatingWaveDoesNotConverge) {
  const auto grid = make_grid(2, 32);
  const auto traj = sampled(grid, 10.0, 0.05, testing::wave);
  const auto v = convergence_verdict(traj, 0.0, 1e-3);
  EXPECT_FALSE(v.converged);
  // Over the last quarter [7.5, 10] the widest pair differs by a phase of 2.5: osc = 4 sin(1.25).
  EXPECT_NEAR(v.final_osc, 4 * std::sin(1.25), 2e-2);
}

TEST(ConvergenceVerdict, HeatRunConverges) {
  const auto prob = testing::simple_problem(1, [](const P&, const P&) { return 0.0; }, testing::identity_sigma(1));
  const auto grid = make_grid(1, 32);
  const auto u0 = Field<double>::sample(grid, [](const P& x) { return std::sin(2 * M_PI * x[0]); });
  const auto traj = run_cauchy(prob, SchemeParams<double>::create(prob, 1e-12, 1.0), u0, 2.0, 0.05);
  const auto v = convergence_verdict(traj, 0.0, 1e-3);
  EXPECT_TRUE(v.converged);
  EXPECT_LE(v.monotone_violation, 1e-12);
}

TEST(ConvergenceVerdict, Preconditions) {
  const auto grid = make_grid(1, 8);
  Trajectory<double> one(grid);
  one.append(0.0, Field<double>(grid));
  EXPECT_THROW(convergence_verdict(one, 0.0, 1e-3), std::invalid_argument);
  const auto traj = sampled(grid, 1.0, 0.5, [](const P&, double) { return 0.0; });
  EXPECT_THROW(convergence_verdict(traj, 0.0, 0.0), std::invalid_argument);
}

}  // namespace
}  // namespace hjb
