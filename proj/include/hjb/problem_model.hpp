#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "hjb/torus_grid.hpp"

namespace hjb {

/// Finite, nonempty set of control labels. A control is addressed by its index.
class ControlSet {
 public:
  ControlSet() : ControlSet(std::vector<std::string>{"default"}) {}
  explicit ControlSet(std::vector<std::string> labels) : labels_(std::move(labels)) {
    if (labels_.empty()) throw std::invalid_argument("ControlSet: empty control set");
    std::set<std::string> seen(labels_.begin(), labels_.end());
    if (seen.size() != labels_.size()) throw std::invalid_argument("ControlSet: duplicate control label");
  }

  int size() const { return static_cast<int>(labels_.size()); }
  const std::string& label(int theta) const { return labels_.at(static_cast<std::size_t>(theta)); }

 private:
  std::vector<std::string> labels_;
};

template <typename Scalar>
using HamiltonianFn = std::function<Scalar(int theta, const Point<Scalar>& x, const Point<Scalar>& p)>;

template <typename Scalar>
using CoefficientFn = std::function<Scalar(const Point<Scalar>& x)>;

/// One column of sigma_theta(x): coefficient(x) * e. Contributes coefficient^2 e e^T to A_theta.
template <typename Scalar>
struct DiffusionColumn {
  CoefficientFn<Scalar> coefficient;
  LatticeDirection direction;
};

/**
 * The controlled pair (H_theta, sigma_theta) of
 *   u_t + max_theta { -trace(A_theta(x) D^2 u) + H_theta(x, Du) } = 0,   A_theta = sigma_theta sigma_theta^T.
 */
template <typename Scalar = double>
class HJBProblem {
 public:
  HJBProblem(int dim, ControlSet controls, HamiltonianFn<Scalar> hamiltonian,
             std::vector<std::vector<DiffusionColumn<Scalar>>> sigma, Scalar lipschitz_p_bound)
      : dim_(dim),
        controls_(std::move(controls)),
        hamiltonian_(std::move(hamiltonian)),
        sigma_(std::move(sigma)),
        lipschitz_p_bound_(lipschitz_p_bound) {
    if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("HJBProblem: unsupported dimension");
    if (!hamiltonian_) throw std::invalid_argument("HJBProblem: missing Hamiltonian");
    if (sigma_.empty()) sigma_.resize(static_cast<std::size_t>(controls_.size()));
    if (static_cast<int>(sigma_.size()) != controls_.size())
      throw std::invalid_argument("HJBProblem: need one sigma column list per control");
    for (const auto& cols : sigma_)
      for (const auto& c : cols)
        if (c.direction.dim() != dim_ || !c.coefficient)
          throw std::invalid_argument("HJBProblem: malformed diffusion column");
    if (!(lipschitz_p_bound_ > 0)) throw std::invalid_argument("HJBProblem: lipschitz_p_bound must be > 0");
  }

  int dim() const { return dim_; }
  const ControlSet& controls() const { return controls_; }
  int control_count() const { return controls_.size(); }
  const HamiltonianFn<Scalar>& hamiltonian() const { return hamiltonian_; }
  const std::vector<DiffusionColumn<Scalar>>& sigma(int theta) const {
    return sigma_.at(static_cast<std::size_t>(theta));
  }
  Scalar lipschitz_p_bound() const { return lipschitz_p_bound_; }

  /// sigma_theta(x) as a dim x max(dim, columns) matrix; missing columns are zero.
  SmallMatrix<Scalar> sigma_matrix(int theta, const Point<Scalar>& x) const {
    const auto& cols = sigma(theta);
    const int m = std::max<int>(dim_, static_cast<int>(cols.size()));
    if (m > 2) throw std::invalid_argument("sigma_matrix: more columns than supported");
    SmallMatrix<Scalar> s = SmallMatrix<Scalar>::Zero(dim_, m);
    for (int k = 0; k < static_cast<int>(cols.size()); ++k)
      s.col(k) = cols[static_cast<std::size_t>(k)].coefficient(x) *
                 cols[static_cast<std::size_t>(k)].direction.template as_vector<Scalar>();
    return s;
  }

 private:
  int dim_;
  ControlSet controls_;
  HamiltonianFn<Scalar> hamiltonian_;
  std::vector<std::vector<DiffusionColumn<Scalar>>> sigma_;
  Scalar lipschitz_p_bound_;
};

namespace detail {
template <typename Scalar>
std::string describe(const Point<Scalar>& v) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << ')';
  return os.str();
}
}  // namespace detail

template <typename Scalar>
Scalar eval_hamiltonian(const HJBProblem<Scalar>& prob, int theta, const Point<Scalar>& x, const Point<Scalar>& p) {
  const Scalar value = prob.hamiltonian()(theta, x, p);
  if (!std::isfinite(value)) {
    throw ModelError("non-finite Hamiltonian at theta=" + prob.controls().label(theta) +
                     " x=" + detail::describe(x) + " p=" + detail::describe(p));
  }
  return value;
}

template <typename Scalar>
SmallMatrix<Scalar> eval_diffusion(const HJBProblem<Scalar>& prob, int theta, const Point<Scalar>& x) {
  SmallMatrix<Scalar> a = SmallMatrix<Scalar>::Zero(prob.dim(), prob.dim());
  for (const auto& col : prob.sigma(theta)) {
    const Scalar c = col.coefficient(x);
    const Point<Scalar> e = col.direction.template as_vector<Scalar>();
    a.noalias() += (c * c) * (e * e.transpose());
  }
  return a;
}

/// Grid approximation of the set where every A_theta vanishes.
template <typename Scalar = double>
struct DegeneracyMask {
  TorusGrid<Scalar> grid;
  std::vector<char> in_sigma;
  Scalar tol;

  bool contains(Index node) const { return in_sigma[static_cast<std::size_t>(node)] != 0; }
  Index count() const { return static_cast<Index>(std::count(in_sigma.begin(), in_sigma.end(), char(1))); }
  bool empty() const { return count() == 0; }
};

template <typename Scalar>
Scalar max_diffusion_entry(const HJBProblem<Scalar>& prob, const Point<Scalar>& x) {
  Scalar m = 0;
  for (int th = 0; th < prob.control_count(); ++th) m = std::max(m, eval_diffusion(prob, th, x).cwiseAbs().maxCoeff());
  return m;
}

/// Default tolerance: 1e-10 relative to the largest diffusion entry on the grid (absolute when sigma == 0).
template <typename Scalar>
Scalar default_degeneracy_tol(const HJBProblem<Scalar>& prob, const TorusGrid<Scalar>& grid) {
  Scalar scale = 0;
  for (Index k = 0; k < grid.size(); ++k) scale = std::max(scale, max_diffusion_entry(prob, grid.coordinate(k)));
  return Scalar(1e-10) * (scale > 0 ? scale : Scalar(1));
}

template <typename Scalar>
DegeneracyMask<Scalar> degeneracy_set(const HJBProblem<Scalar>& prob, const TorusGrid<Scalar>& grid, Scalar tol) {
  if (!(tol > 0)) throw std::invalid_argument("degeneracy_set: tol must be > 0");
  DegeneracyMask<Scalar> mask{grid, std::vector<char>(static_cast<std::size_t>(grid.size()), 0), tol};
  for (Index k = 0; k < grid.size(); ++k)
    mask.in_sigma[static_cast<std::size_t>(k)] = max_diffusion_entry(prob, grid.coordinate(k)) <= tol ? 1 : 0;
  return mask;
}

template <typename Scalar>
DegeneracyMask<Scalar> degeneracy_set(const HJBProblem<Scalar>& prob, const TorusGrid<Scalar>& grid) {
  return degeneracy_set(prob, grid, default_degeneracy_tol(prob, grid));
}

/**
 * Sampled upper bound on |D_p H_theta(x, p)| over controls, x on a 16^dim lattice and |p| <= grad_range.
 *
 * Radii are taken on a fixed absolute ladder plus grad_range itself, so enlarging grad_range only
 * adds samples. Slopes are central differences with step 1e-6 * (1 + |p|).
 */
template <typename Scalar>
Scalar lipschitz_viscosity(const HJBProblem<Scalar>& prob, Scalar grad_range) {
  if (!(grad_range > 0)) throw std::invalid_argument("lipschitz_viscosity: grad_range must be > 0");
  const int dim = prob.dim();
  const TorusGrid<Scalar> xs(dim, 16);
  const Scalar ladder = Scalar(1) / Scalar(16);
  std::vector<Scalar> radii;
  for (int j = 0; Scalar(j) * ladder < grad_range; ++j) radii.push_back(Scalar(j) * ladder);
  radii.push_back(grad_range);

  std::vector<Point<Scalar>> directions;
  if (dim == 1) {
    directions.push_back(Point<Scalar>::Constant(1, Scalar(1)));
    directions.push_back(Point<Scalar>::Constant(1, Scalar(-1)));
  } else {
    constexpr int kAngles = 48;
    for (int a = 0; a < kAngles; ++a) {
      const Scalar phi = Scalar(2 * M_PI) * Scalar(a) / Scalar(kAngles);
      Point<Scalar> d(2);
      d << std::cos(phi), std::sin(phi);
      directions.push_back(d);
    }
  }

  Scalar best = 0;
  for (int th = 0; th < prob.control_count(); ++th) {
    for (Index k = 0; k < xs.size(); ++k) {
      const Point<Scalar> x = xs.coordinate(k);
      for (Scalar r : radii) {
        for (const auto& d : directions) {
          const Point<Scalar> p = r * d;
          const Scalar step = Scalar(1e-6) * (Scalar(1) + r);
          Point<Scalar> grad(dim);
          for (int i = 0; i < dim; ++i) {
            Point<Scalar> pp = p, pm = p;
            pp[i] += step;
            pm[i] -= step;
            grad[i] = (eval_hamiltonian(prob, th, x, pp) - eval_hamiltonian(prob, th, x, pm)) / (2 * step);
          }
          best = std::max(best, grad.norm());
        }
      }
    }
  }
  return best;
}

}  // namespace hjb
