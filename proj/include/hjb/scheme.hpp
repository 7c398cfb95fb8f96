#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "hjb/problem_model.hpp"
#include "hjb/torus_grid.hpp"

namespace hjb {

template <typename Scalar = double>
struct SchemeParams {
  Scalar lf_viscosity;
  Scalar cfl_safety;
  Scalar grad_range;

  /// Validates the parameters against the problem: lf_viscosity must dominate the sampled p-slope.
  static SchemeParams create(const HJBProblem<Scalar>& prob, Scalar lf_viscosity, Scalar grad_range,
                             Scalar cfl_safety = Scalar(0.5)) {
    if (!(cfl_safety > 0 && cfl_safety <= 1)) throw std::invalid_argument("SchemeParams: cfl_safety must lie in (0,1]");
    if (!(grad_range > 0)) throw std::invalid_argument("SchemeParams: grad_range must be > 0");
    const Scalar required = lipschitz_viscosity(prob, grad_range);
    // The bound comes from central differences, so allow for their rounding.
    if (!(lf_viscosity > 0) || lf_viscosity < required * (Scalar(1) - Scalar(1e-6))) {
      throw std::invalid_argument("SchemeParams: lf_viscosity " + std::to_string(double(lf_viscosity)) +
                                  " below sampled Lipschitz bound " + std::to_string(double(required)));
    }
    return SchemeParams{lf_viscosity, cfl_safety, grad_range};
  }

  /// grad_range = max(1.5 * Lip(u0), min_grad_range); viscosity = sampled slope bound at that range.
  static SchemeParams for_initial_datum(const HJBProblem<Scalar>& prob, const Field<Scalar>& u0,
                                        Scalar min_grad_range = Scalar(1), Scalar cfl_safety = Scalar(0.5)) {
    const Scalar range = std::max(Scalar(1.5) * discrete_lipschitz(u0), min_grad_range);
    const Scalar alpha = lipschitz_viscosity(prob, range);
    return create(prob, alpha > 0 ? alpha : Scalar(1e-12), range, cfl_safety);
  }
};

/// Lax-Friedrichs flux H(x, (p- + p+)/2) - (alpha/2) sum_i (p+_i - p-_i).
template <typename Scalar>
Scalar numerical_hamiltonian(const HJBProblem<Scalar>& prob, int theta, const Point<Scalar>& x,
                             const Point<Scalar>& p_minus, const Point<Scalar>& p_plus, Scalar alpha) {
  const Point<Scalar> p_mid = Scalar(0.5) * (p_minus + p_plus);
  return eval_hamiltonian(prob, theta, x, p_mid) - Scalar(0.5) * alpha * (p_plus - p_minus).sum();
}

/**
 * Monotone discretization of max_theta { -trace(A_theta D^2 u) + H_theta(x, Du) } on a fixed grid.
 *
 * Diffusion coefficients and neighbor tables are cached at construction; apply() is then a pure
 * per-node map. Each sigma column c(x) e contributes c^2 (u(x+he) - 2u(x) + u(x-he)) / h^2, which is
 * exactly trace(c^2 e e^T D^2 u) to second order.
 */
template <typename Scalar = double>
class Scheme {
 public:
  Scheme(const HJBProblem<Scalar>& prob, const SchemeParams<Scalar>& params, const TorusGrid<Scalar>& grid)
      : prob_(prob), params_(params), grid_(grid) {
    if (prob.dim() != grid.dim()) throw std::invalid_argument("Scheme: problem and grid dimensions differ");
    const Index n = grid.size();
    const int dim = grid.dim();
    coords_.reserve(static_cast<std::size_t>(n));
    for (Index k = 0; k < n; ++k) coords_.push_back(grid.coordinate(k));

    axis_plus_.resize(static_cast<std::size_t>(n * dim));
    axis_minus_.resize(static_cast<std::size_t>(n * dim));
    for (Index k = 0; k < n; ++k)
      for (int i = 0; i < dim; ++i) {
        const auto e = LatticeDirection::axis(dim, i);
        axis_plus_[static_cast<std::size_t>(k * dim + i)] = grid.neighbor(k, e, 1);
        axis_minus_[static_cast<std::size_t>(k * dim + i)] = grid.neighbor(k, e, -1);
      }

    const Scalar inv_h2 = Scalar(1) / (grid.h() * grid.h());
    max_diffusion_weight_ = 0;
    controls_.resize(static_cast<std::size_t>(prob.control_count()));
    for (int th = 0; th < prob.control_count(); ++th) {
      auto& ctl = controls_[static_cast<std::size_t>(th)];
      for (const auto& col : prob.sigma(th)) {
        ColumnCache cache;
        cache.weight.resize(static_cast<std::size_t>(n));
        cache.plus.resize(static_cast<std::size_t>(n));
        cache.minus.resize(static_cast<std::size_t>(n));
        for (Index k = 0; k < n; ++k) {
          const Scalar c = col.coefficient(coords_[static_cast<std::size_t>(k)]);
          cache.weight[static_cast<std::size_t>(k)] = c * c * inv_h2;
          cache.plus[static_cast<std::size_t>(k)] = grid.neighbor(k, col.direction, 1);
          cache.minus[static_cast<std::size_t>(k)] = grid.neighbor(k, col.direction, -1);
        }
        ctl.columns.push_back(std::move(cache));
      }
      for (Index k = 0; k < n; ++k) {
        Scalar total = 0;
        for (const auto& c : ctl.columns) total += c.weight[static_cast<std::size_t>(k)];
        max_diffusion_weight_ = std::max(max_diffusion_weight_, total);
      }
    }
  }

  const TorusGrid<Scalar>& grid() const { return grid_; }
  const SchemeParams<Scalar>& params() const { return params_; }
  const HJBProblem<Scalar>& problem() const { return prob_; }

  /// Forward-Euler step bound keeping u - dt * apply(u) nondecreasing in every node value.
  Scalar stable_timestep(Scalar extra_diagonal = 0) const {
    const Scalar denom = Scalar(grid_.dim()) * params_.lf_viscosity / grid_.h() + Scalar(4) * max_diffusion_weight_ +
                         extra_diagonal;
    if (!(denom > 0)) return params_.cfl_safety;  // nothing to resolve; any positive step is monotone
    return params_.cfl_safety / denom;
  }

  Scalar node_value(const Field<Scalar>& u, Index k) const {
    const int dim = grid_.dim();
    const Scalar inv_h = Scalar(1) / grid_.h();
    const Scalar uk = u[k];
    Point<Scalar> pm(dim), pp(dim);
    for (int i = 0; i < dim; ++i) {
      pm[i] = (uk - u[axis_minus_[static_cast<std::size_t>(k * dim + i)]]) * inv_h;
      pp[i] = (u[axis_plus_[static_cast<std::size_t>(k * dim + i)]] - uk) * inv_h;
    }
    const auto& x = coords_[static_cast<std::size_t>(k)];
    Scalar best = -std::numeric_limits<Scalar>::infinity();
    for (int th = 0; th < static_cast<int>(controls_.size()); ++th) {
      Scalar diffusion = 0;
      for (const auto& c : controls_[static_cast<std::size_t>(th)].columns) {
        const auto kk = static_cast<std::size_t>(k);
        diffusion += c.weight[kk] * (u[c.plus[kk]] - Scalar(2) * uk + u[c.minus[kk]]);
      }
      const Scalar value = -diffusion + numerical_hamiltonian(prob_, th, x, pm, pp, params_.lf_viscosity);
      if (!std::isfinite(value)) {
        throw ModelError("non-finite operator value at node " + std::to_string(k) +
                         " theta=" + prob_.controls().label(th));
      }
      best = std::max(best, value);
    }
    return best;
  }

  Field<Scalar> apply(const Field<Scalar>& u) const {
    Field<Scalar> out(grid_);
    apply_into(u, out);
    return out;
  }

  void apply_into(const Field<Scalar>& u, Field<Scalar>& out) const {
    if (!(u.grid() == grid_)) throw std::invalid_argument("Scheme::apply: field lives on a different grid");
    const Index n = grid_.size();
    // Exceptions cannot leave an OpenMP region; collect the first message instead.
    std::string failure;
#pragma omp parallel for schedule(static)
    for (Index k = 0; k < n; ++k) {
      try {
        out[k] = node_value(u, k);
      } catch (const std::exception& ex) {
#pragma omp critical(hjb_scheme_failure)
        if (failure.empty()) failure = ex.what();
      }
    }
    if (!failure.empty()) throw ModelError(failure);
  }

 private:
  struct ColumnCache {
    std::vector<Scalar> weight;  // coefficient^2 / h^2
    std::vector<Index> plus, minus;
  };
  struct ControlCache {
    std::vector<ColumnCache> columns;
  };

  HJBProblem<Scalar> prob_;
  SchemeParams<Scalar> params_;
  TorusGrid<Scalar> grid_;
  std::vector<Point<Scalar>> coords_;
  std::vector<Index> axis_plus_, axis_minus_;
  std::vector<ControlCache> controls_;
  Scalar max_diffusion_weight_;
};

template <typename Scalar>
Field<Scalar> apply_operator(const HJBProblem<Scalar>& prob, const SchemeParams<Scalar>& params, const Field<Scalar>& u) {
  return Scheme<Scalar>(prob, params, u.grid()).apply(u);
}

template <typename Scalar>
Scalar stable_timestep(const HJBProblem<Scalar>& prob, const SchemeParams<Scalar>& params, const TorusGrid<Scalar>& grid) {
  return Scheme<Scalar>(prob, params, grid).stable_timestep();
}

}  // namespace hjb
