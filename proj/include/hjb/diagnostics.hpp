#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "hjb/solver.hpp"

namespace hjb {

template <typename Scalar = double>
struct ProbeParams {
  Scalar eta;
  Scalar mu;
  std::optional<Field<Scalar>> v_ref;  // empty: the zero field

  ProbeParams(Scalar eta_, Scalar mu_, std::optional<Field<Scalar>> v = std::nullopt)
      : eta(eta_), mu(mu_), v_ref(std::move(v)) {
    if (!(eta > 0)) throw std::invalid_argument("ProbeParams: eta must be > 0");
    if (!(mu >= 1)) throw std::invalid_argument("ProbeParams: mu must be >= 1");
  }

  Scalar v_at(Index node) const { return v_ref ? (*v_ref)[node] : Scalar(0); }
};

/// sup over recorded s >= t of u(x,t) - v(x) - mu (u(x,s) - v(x)) - mu eta (s - t). Direct scan.
template <typename Scalar>
Scalar compute_P(const Trajectory<Scalar>& traj, const ProbeParams<Scalar>& probe, Index node, std::size_t t_index) {
  if (t_index >= traj.size()) throw std::out_of_range("compute_P: t_index out of range");
  const Scalar v = probe.v_at(node);
  const Scalar t = traj.times()[t_index];
  const Scalar ut = traj.snapshots()[t_index][node];
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (std::size_t j = t_index; j < traj.size(); ++j) {
    const Scalar s = traj.times()[j];
    const Scalar us = traj.snapshots()[j][node];
    best = std::max(best, ut - v - probe.mu * (us - v) - probe.mu * probe.eta * (s - t));
  }
  return best;
}

/**
 * max{0, sup_x P(x, t)} at every recorded t.
 *
 * The s-dependent part -mu (u(x,s) + eta s) is folded into a running suffix maximum per node, so the
 * whole series costs one pass over the trajectory.
 */
template <typename Scalar>
std::vector<std::pair<Scalar, Scalar>> compute_M_series(const Trajectory<Scalar>& traj, const ProbeParams<Scalar>& probe) {
  if (traj.size() < 2) throw std::invalid_argument("compute_M_series: need at least two snapshots");
  const Index n = traj.grid().size();
  const std::size_t steps = traj.size();
  std::vector<Scalar> suffix(static_cast<std::size_t>(n), -std::numeric_limits<Scalar>::infinity());
  std::vector<std::pair<Scalar, Scalar>> series(steps);
  for (std::size_t jj = steps; jj-- > 0;) {
    const Scalar t = traj.times()[jj];
    const auto& u = traj.snapshots()[jj];
    Scalar m = 0;
    for (Index k = 0; k < n; ++k) {
      const auto kk = static_cast<std::size_t>(k);
      suffix[kk] = std::max(suffix[kk], -probe.mu * (u[k] + probe.eta * t));
      const Scalar v = probe.v_at(k);
      const Scalar p = u[k] - v + probe.mu * v + probe.mu * probe.eta * t + suffix[kk];
      m = std::max(m, p);
    }
    series[jj] = {t, m};
  }
  return series;
}

/// Largest increase between consecutive values of a series (0 when nonincreasing).
template <typename Scalar>
Scalar worst_increase(const std::vector<std::pair<Scalar, Scalar>>& series) {
  Scalar worst = 0;
  for (std::size_t i = 1; i < series.size(); ++i) worst = std::max(worst, series[i].second - series[i - 1].second);
  return worst;
}

template <typename Scalar = double>
struct ConvergenceVerdict {
  bool converged;
  Scalar final_osc;  // worst osc[w(t) - w(t')] over pairs in the last quarter, w = u + c t
  std::vector<std::pair<Scalar, Scalar>> m_eta_mu_series;
  Scalar monotone_violation;
  Scalar m_plus_tail;  // M+ at the start of the last quarter
  Scalar threshold;
};

/// osc[u(., t) - u(., t_final)] per recorded t; identical for u and u + c t.
template <typename Scalar>
std::vector<Scalar> shifted_oscillation_series(const Trajectory<Scalar>& traj) {
  std::vector<Scalar> out;
  const auto& last = traj.snapshots().back();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Vector<Scalar> d = traj.snapshots()[i].values() - last.values();
    out.push_back(d.maxCoeff() - d.minCoeff());
  }
  return out;
}

/**
 * Converged iff the shifted profile w = u + c t moves by at most `threshold` in oscillation between any
 * two recorded times of the last quarter of the run, and M+ (eta = threshold / t_final, mu = 1, v = 0)
 * evaluated on w has dropped to at most `threshold` by the start of that quarter.
 */
template <typename Scalar>
ConvergenceVerdict<Scalar> convergence_verdict(const Trajectory<Scalar>& traj, Scalar c, Scalar threshold) {
  if (traj.size() < 2) throw std::invalid_argument("convergence_verdict: need at least two snapshots");
  if (!(threshold > 0)) throw std::invalid_argument("convergence_verdict: threshold must be > 0");
  const Scalar t_final = traj.times().back();
  const Scalar t_quarter = Scalar(0.75) * t_final;
  std::size_t first = 0;
  while (first + 1 < traj.size() && traj.times()[first] < t_quarter - Scalar(1e-12) * t_final) ++first;

  Scalar final_osc = 0;
  for (std::size_t i = first; i < traj.size(); ++i) {
    for (std::size_t j = i + 1; j < traj.size(); ++j) {
      // osc is blind to the constant c (t_i - t_j), so w and u give the same value here.
      const Vector<Scalar> d = traj.snapshots()[i].values() - traj.snapshots()[j].values();
      final_osc = std::max(final_osc, d.maxCoeff() - d.minCoeff());
    }
  }

  const auto shifted = shifted_by_ergodic_constant(traj, c);
  const ProbeParams<Scalar> probe(threshold / t_final, Scalar(1));
  auto series = compute_M_series(shifted, probe);
  const Scalar tail = series[first].second;

  ConvergenceVerdict<Scalar> v;
  v.converged = final_osc <= threshold && tail <= threshold;
  v.final_osc = final_osc;
  v.monotone_violation = worst_increase(series);
  v.m_eta_mu_series = std::move(series);
  v.m_plus_tail = tail;
  v.threshold = threshold;
  return v;
}

}  // namespace hjb
