#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "hjb/errors.hpp"

namespace hjb {

using Index = std::int64_t;

// Points and gradients live in R^1 or R^2; the fixed max size keeps them on the stack.
template <typename Scalar>
using Point = Eigen::Matrix<Scalar, Eigen::Dynamic, 1, Eigen::ColMajor, 2, 1>;

template <typename Scalar>
using SmallMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 2, 2>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A stencil direction on the lattice: an axis or a diagonal, components in {-1, 0, 1}.
class LatticeDirection {
 public:
  LatticeDirection(int dim, std::array<int, 2> components) : dim_(dim), e_(components) {
    if (dim != 1 && dim != 2) throw std::invalid_argument("LatticeDirection: unsupported dimension");
    if (dim == 1) e_[1] = 0;
    bool nonzero = false;
    for (int i = 0; i < dim_; ++i) {
      if (e_[i] < -1 || e_[i] > 1)
        throw std::invalid_argument("LatticeDirection: components must lie in {-1,0,1}");
      nonzero = nonzero || e_[i] != 0;
    }
    if (!nonzero) throw std::invalid_argument("LatticeDirection: zero direction");
  }

  static LatticeDirection axis(int dim, int i) {
    std::array<int, 2> c{0, 0};
    c.at(static_cast<std::size_t>(i)) = 1;
    return {dim, c};
  }
  static LatticeDirection diagonal() { return {2, {1, 1}}; }
  static LatticeDirection antidiagonal() { return {2, {1, -1}}; }

  int dim() const { return dim_; }
  int operator[](int i) const { return e_[static_cast<std::size_t>(i)]; }
  int norm_squared() const { return e_[0] * e_[0] + e_[1] * e_[1]; }
  LatticeDirection operator-() const { return {dim_, {-e_[0], -e_[1]}}; }

  template <typename Scalar>
  Point<Scalar> as_vector() const {
    Point<Scalar> v(dim_);
    for (int i = 0; i < dim_; ++i) v[i] = Scalar(e_[static_cast<std::size_t>(i)]);
    return v;
  }

  friend bool operator==(const LatticeDirection&, const LatticeDirection&) = default;

 private:
  int dim_;
  std::array<int, 2> e_;
};

/**
 * Uniform periodic lattice on the unit torus [0,1)^dim.
 *
 * Nodes are numbered lexicographically with the first axis fastest:
 * node = i0 + n * i1. All index arithmetic wraps modulo n.
 */
template <typename Scalar = double>
class TorusGrid {
 public:
  TorusGrid(int dim, int n_per_axis) : dim_(dim), n_(n_per_axis), h_(Scalar(1) / Scalar(n_per_axis)) {
    if (dim != 1 && dim != 2)
      throw std::invalid_argument("make_grid: unsupported dimension " + std::to_string(dim));
    if (n_per_axis < 8)
      throw std::invalid_argument("make_grid: n_per_axis must be >= 8, got " + std::to_string(n_per_axis));
  }

  int dim() const { return dim_; }
  int n_per_axis() const { return n_; }
  Scalar h() const { return h_; }
  Index size() const { return dim_ == 1 ? Index(n_) : Index(n_) * n_; }

  std::array<int, 2> multi_index(Index node) const {
    if (dim_ == 1) return {static_cast<int>(node), 0};
    return {static_cast<int>(node % n_), static_cast<int>(node / n_)};
  }

  Index node(std::array<int, 2> idx) const {
    const int i0 = wrap(idx[0]);
    if (dim_ == 1) return i0;
    return Index(i0) + Index(n_) * wrap(idx[1]);
  }

  Index neighbor(Index node_index, const LatticeDirection& e, int steps = 1) const {
    auto idx = multi_index(node_index);
    idx[0] += steps * e[0];
    if (dim_ == 2) idx[1] += steps * e[1];
    return node(idx);
  }

  Point<Scalar> coordinate(Index node_index) const {
    const auto idx = multi_index(node_index);
    Point<Scalar> x(dim_);
    for (int i = 0; i < dim_; ++i) x[i] = Scalar(idx[static_cast<std::size_t>(i)]) * h_;
    return x;
  }

  int wrap(int i) const {
    const int r = i % n_;
    return r < 0 ? r + n_ : r;
  }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) { return a.dim_ == b.dim_ && a.n_ == b.n_; }

 private:
  int dim_;
  int n_;
  Scalar h_;
};

template <typename Scalar = double>
TorusGrid<Scalar> make_grid(int dim, int n_per_axis) {
  return TorusGrid<Scalar>(dim, n_per_axis);
}

/// Real-valued grid function. Arithmetic is only defined between fields on the same grid.
template <typename Scalar = double>
class Field {
 public:
  explicit Field(TorusGrid<Scalar> grid) : grid_(grid), values_(Vector<Scalar>::Zero(grid.size())) {}

  Field(TorusGrid<Scalar> grid, Vector<Scalar> values) : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw std::invalid_argument("Field: value count does not match grid");
  }

  template <typename Fn>
  static Field sample(const TorusGrid<Scalar>& grid, Fn&& fn) {
    Field f(grid);
    for (Index k = 0; k < grid.size(); ++k) f.values_[k] = fn(grid.coordinate(k));
    return f;
  }

  static Field constant(const TorusGrid<Scalar>& grid, Scalar value) {
    return Field(grid, Vector<Scalar>::Constant(grid.size(), value));
  }

  const TorusGrid<Scalar>& grid() const { return grid_; }
  const Vector<Scalar>& values() const { return values_; }
  Vector<Scalar>& values() { return values_; }
  Index size() const { return values_.size(); }
  Scalar operator[](Index k) const { return values_[k]; }
  Scalar& operator[](Index k) { return values_[k]; }

  bool all_finite() const { return values_.allFinite(); }
  Scalar max() const { return values_.maxCoeff(); }
  Scalar min() const { return values_.minCoeff(); }
  Scalar mean() const { return values_.mean(); }

  Field& operator+=(const Field& o) {
    require_same_grid(o);
    values_ += o.values_;
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(o);
    values_ -= o.values_;
    return *this;
  }
  Field& operator+=(Scalar c) {
    values_.array() += c;
    return *this;
  }
  Field& operator-=(Scalar c) {
    values_.array() -= c;
    return *this;
  }
  Field& operator*=(Scalar c) {
    values_ *= c;
    return *this;
  }

  friend Field operator+(Field a, const Field& b) { return a += b; }
  friend Field operator-(Field a, const Field& b) { return a -= b; }
  friend Field operator+(Field a, Scalar c) { return a += c; }
  friend Field operator-(Field a, Scalar c) { return a -= c; }
  friend Field operator*(Scalar c, Field a) { return a *= c; }

 private:
  void require_same_grid(const Field& o) const {
    if (!(grid_ == o.grid_)) throw std::invalid_argument("Field: operands live on different grids");
  }

  TorusGrid<Scalar> grid_;
  Vector<Scalar> values_;
};

/// Backward and forward differences along each axis at `node`, with periodic wrap.
template <typename Scalar>
std::pair<Point<Scalar>, Point<Scalar>> one_sided_gradients(const Field<Scalar>& f, Index node) {
  const auto& grid = f.grid();
  const Scalar inv_h = Scalar(1) / grid.h();
  Point<Scalar> minus(grid.dim()), plus(grid.dim());
  for (int i = 0; i < grid.dim(); ++i) {
    const auto e = LatticeDirection::axis(grid.dim(), i);
    const Scalar center = f[node];
    minus[i] = (center - f[grid.neighbor(node, e, -1)]) * inv_h;
    plus[i] = (f[grid.neighbor(node, e, 1)] - center) * inv_h;
  }
  return {minus, plus};
}

/// Second difference along e, normalized to approximate the second derivative along e/|e|.
template <typename Scalar>
Scalar directional_second_difference(const Field<Scalar>& f, Index node, const LatticeDirection& e) {
  const auto& grid = f.grid();
  if (e.dim() != grid.dim()) throw std::invalid_argument("directional_second_difference: direction dimension mismatch");
  const Scalar h = grid.h();
  const Scalar raw = f[grid.neighbor(node, e, 1)] - Scalar(2) * f[node] + f[grid.neighbor(node, e, -1)];
  return raw / (h * h * Scalar(e.norm_squared()));
}

template <typename Scalar>
Scalar oscillation(const Field<Scalar>& f) {
  return f.max() - f.min();
}

/// Discrete gradient sup-norm: max over nodes of |(max(|p-_i|, |p+_i|))_i|.
template <typename Scalar>
Scalar discrete_lipschitz(const Field<Scalar>& f) {
  Scalar best = 0;
  for (Index k = 0; k < f.size(); ++k) {
    const auto [pm, pp] = one_sided_gradients(f, k);
    const Point<Scalar> g = pm.cwiseAbs().cwiseMax(pp.cwiseAbs());
    best = std::max(best, g.norm());
  }
  return best;
}

/// Returns g with g(i) = f(i - shift), i.e. f translated by `shift` nodes.
template <typename Scalar>
Field<Scalar> cyclic_shift(const Field<Scalar>& f, std::array<int, 2> shift) {
  const auto& grid = f.grid();
  Field<Scalar> g(grid);
  for (Index k = 0; k < grid.size(); ++k) {
    auto idx = grid.multi_index(k);
    idx[0] -= shift[0];
    idx[1] -= shift[1];
    g[k] = f[grid.node(idx)];
  }
  return g;
}

}  // namespace hjb
