#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "hjb/errors.hpp"
#include "hjb/scheme.hpp"

namespace hjb {

/// Time-stamped snapshots of u(., t) from one Cauchy run.
template <typename Scalar = double>
class Trajectory {
 public:
  explicit Trajectory(TorusGrid<Scalar> grid) : grid_(grid) {}

  void append(Scalar t, Field<Scalar> u) {
    if (!(u.grid() == grid_)) throw std::invalid_argument("Trajectory: snapshot on a different grid");
    if (!times_.empty() && !(t > times_.back())) throw std::invalid_argument("Trajectory: times must increase");
    if (times_.empty() && t != Scalar(0)) throw std::invalid_argument("Trajectory: first snapshot must be at t = 0");
    if (!u.all_finite()) throw SolverError("Trajectory: non-finite snapshot at t = " + std::to_string(double(t)));
    times_.push_back(t);
    snapshots_.push_back(std::move(u));
  }

  const TorusGrid<Scalar>& grid() const { return grid_; }
  const std::vector<Scalar>& times() const { return times_; }
  const std::vector<Field<Scalar>>& snapshots() const { return snapshots_; }
  std::size_t size() const { return times_.size(); }
  const Field<Scalar>& back() const { return snapshots_.back(); }

  /// Index of the recorded time equal to t up to 1e-9 (relative to the run length).
  std::optional<std::size_t> find_time(Scalar t) const {
    const Scalar tol = Scalar(1e-9) * std::max(Scalar(1), times_.empty() ? Scalar(1) : times_.back());
    for (std::size_t i = 0; i < times_.size(); ++i)
      if (std::abs(times_[i] - t) <= tol) return i;
    return std::nullopt;
  }

  std::optional<Scalar> c_estimate;

 private:
  TorusGrid<Scalar> grid_;
  std::vector<Scalar> times_;
  std::vector<Field<Scalar>> snapshots_;
};

/// u(., t) + c t for every snapshot; the frame in which the ergodic drift is removed.
template <typename Scalar>
Trajectory<Scalar> shifted_by_ergodic_constant(const Trajectory<Scalar>& traj, Scalar c) {
  Trajectory<Scalar> out(traj.grid());
  for (std::size_t i = 0; i < traj.size(); ++i) out.append(traj.times()[i], traj.snapshots()[i] + c * traj.times()[i]);
  out.c_estimate = traj.c_estimate;
  return out;
}

/**
 * Forward-Euler march of u_t + F[u] = 0 from u0 to t_final.
 *
 * Steps use the monotone bound from Scheme::stable_timestep and are clipped so that every multiple of
 * record_every and t_final itself is hit exactly. Each recorded snapshot is checked against
 * params.grad_range; exceeding it means the Lax-Friedrichs viscosity no longer dominates H_p.
 */
template <typename Scalar>
Trajectory<Scalar> run_cauchy(const HJBProblem<Scalar>& prob, const SchemeParams<Scalar>& params, const Field<Scalar>& u0,
                              Scalar t_final, Scalar record_every) {
  if (!(t_final > 0)) throw std::invalid_argument("run_cauchy: t_final must be > 0");
  if (!(record_every > 0)) throw std::invalid_argument("run_cauchy: record_every must be > 0");
  if (!u0.all_finite()) throw std::invalid_argument("run_cauchy: initial datum is not finite");

  const Scheme<Scalar> scheme(prob, params, u0.grid());
  const Scalar dt_max = scheme.stable_timestep();
  Trajectory<Scalar> traj(u0.grid());
  traj.append(Scalar(0), u0);

  Field<Scalar> u = u0;
  Field<Scalar> op(u0.grid());
  Scalar t = 0;
  long next_record = 1;
  const Scalar eps = Scalar(1e-12) * std::max(Scalar(1), t_final);
  while (t < t_final - eps) {
    const Scalar target = std::min(t_final, Scalar(next_record) * record_every);
    const Scalar dt = std::min(dt_max, target - t);
    scheme.apply_into(u, op);
    u.values() -= dt * op.values();
    t = (target - t <= dt_max) ? target : t + dt;
    if (!u.all_finite()) throw SolverError("run_cauchy: non-finite values at t = " + std::to_string(double(t)));
    if (t >= target - eps) {
      const Scalar lip = discrete_lipschitz(u);
      if (lip > params.grad_range) {
        throw SolverError("run_cauchy: discrete Lipschitz constant " + std::to_string(double(lip)) +
                          " exceeds grad_range " + std::to_string(double(params.grad_range)) +
                          " at t = " + std::to_string(double(t)));
      }
      traj.append(t, u);
      if (target < t_final) ++next_record;
      while (Scalar(next_record) * record_every <= t + eps) ++next_record;
    }
  }
  return traj;
}

/// c ~ -(mean u(t2) - mean u(t1)) / (t2 - t1); stored into traj.c_estimate.
template <typename Scalar>
Scalar long_time_slope(Trajectory<Scalar>& traj, Scalar t1, Scalar t2) {
  if (!(t1 < t2)) throw std::invalid_argument("long_time_slope: need t1 < t2");
  const auto i1 = traj.find_time(t1);
  const auto i2 = traj.find_time(t2);
  if (!i1 || !i2) throw std::out_of_range("long_time_slope: window endpoints are not recorded times");
  const auto& u1 = traj.snapshots()[*i1];
  const auto& u2 = traj.snapshots()[*i2];
  const Scalar c = -(u2.values() - u1.values()).mean() / (traj.times()[*i2] - traj.times()[*i1]);
  traj.c_estimate = c;
  return c;
}

template <typename Scalar = double>
struct ErgodicResult {
  Scalar c;               // mean over nodes of -lambda v_lambda
  Scalar spread;          // max - min of -lambda v_lambda
  Field<Scalar> corrector;  // v_lambda - min v_lambda
  Scalar lambda_used;
  Scalar residual;        // sup-node |lambda v + F[v]| at exit
  Scalar pseudo_time;
  Field<Scalar> discounted;  // v_lambda itself
};

template <typename Scalar>
Scalar default_discount_tolerance(Scalar c_scale) {
  return Scalar(1e-8) * (Scalar(1) + std::abs(c_scale));
}

/**
 * Solves lambda v + F[v] = 0 by marching v_s = -(lambda v + F[v]) in pseudo-time.
 *
 * F is invariant under adding constants, so the nodal mean of v only feeds back through lambda and
 * decouples from the rest; after each step the mean is reset to its equilibrium value
 * -mean(F[v])/lambda, which removes the slow e^{-lambda s} mode without changing the fixed point.
 * The tolerance is relative: |residual| <= tol * (1 + |mean lambda v|) when tol_is_relative.
 */
template <typename Scalar>
ErgodicResult<Scalar> solve_discounted(const HJBProblem<Scalar>& prob, const SchemeParams<Scalar>& params,
                                       const TorusGrid<Scalar>& grid, Scalar lambda, Scalar tol, Scalar max_pseudo_time,
                                       const Field<Scalar>* warm_start = nullptr, bool tol_is_relative = true) {
  if (!(lambda > 0)) throw std::invalid_argument("solve_discounted: lambda must be > 0");
  if (!(tol > 0)) throw std::invalid_argument("solve_discounted: tol must be > 0");
  const Scheme<Scalar> scheme(prob, params, grid);
  const Scalar dt = scheme.stable_timestep(lambda);

  Field<Scalar> v = warm_start ? *warm_start : Field<Scalar>(grid);
  Field<Scalar> op(grid);
  Scalar s = 0;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  for (;;) {
    scheme.apply_into(v, op);
    // Equilibrate the constant mode, then measure the residual there.
    v.values().array() -= v.mean() + op.mean() / lambda;
    Vector<Scalar> r = lambda * v.values() + op.values();
    residual = r.cwiseAbs().maxCoeff();
    const Scalar scale = tol_is_relative ? Scalar(1) + std::abs(lambda * v.mean()) : Scalar(1);
    if (!std::isfinite(residual)) throw SolverError("solve_discounted: non-finite residual");
    if (residual <= tol * scale) break;
    if (s >= max_pseudo_time) {
      throw ConvergenceError("solve_discounted: residual " + std::to_string(double(residual)) +
                                 " above tolerance after pseudo-time " + std::to_string(double(s)),
                             double(residual));
    }
    v.values() -= dt * r;
    s += dt;
  }

  Vector<Scalar> minus_lv = -lambda * v.values();
  ErgodicResult<Scalar> out{minus_lv.mean(),
                            minus_lv.maxCoeff() - minus_lv.minCoeff(),
                            v - v.min(),
                            lambda,
                            residual,
                            s,
                            v};
  return out;
}

/// Vanishing-discount sweep; each solve starts from the previous v_lambda.
template <typename Scalar>
std::vector<ErgodicResult<Scalar>> discount_sweep(const HJBProblem<Scalar>& prob, const SchemeParams<Scalar>& params,
                                                  const TorusGrid<Scalar>& grid, const std::vector<Scalar>& lambdas,
                                                  Scalar tol, Scalar max_pseudo_time) {
  std::vector<ErgodicResult<Scalar>> out;
  for (Scalar lambda : lambdas) {
    const Field<Scalar>* warm = out.empty() ? nullptr : &out.back().discounted;
    out.push_back(solve_discounted(prob, params, grid, lambda, tol, max_pseudo_time, warm));
  }
  return out;
}

/// max over controls and degenerate nodes of H_theta(x, 0).
template <typename Scalar>
Scalar nr_ergodic_constant(const HJBProblem<Scalar>& prob, const DegeneracyMask<Scalar>& sigma_mask) {
  if (sigma_mask.empty()) throw std::invalid_argument("nr_ergodic_constant: degeneracy set is empty on this grid");
  const Point<Scalar> zero = Point<Scalar>::Zero(prob.dim());
  Scalar best = -std::numeric_limits<Scalar>::infinity();
  for (Index k = 0; k < sigma_mask.grid.size(); ++k) {
    if (!sigma_mask.contains(k)) continue;
    const Point<Scalar> x = sigma_mask.grid.coordinate(k);
    for (int th = 0; th < prob.control_count(); ++th) best = std::max(best, eval_hamiltonian(prob, th, x, zero));
  }
  return best;
}

}  // namespace hjb
