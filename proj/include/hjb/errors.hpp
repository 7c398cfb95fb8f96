#pragma once

#include <stdexcept>
#include <string>

namespace hjb {

/// A Hamiltonian or diffusion coefficient produced a non-finite value.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A time march left its validity envelope (non-finite values, gradient beyond grad_range).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The discounted pseudo-time march did not reach its residual tolerance.
class ConvergenceError : public SolverError {
 public:
  ConvergenceError(const std::string& what, double residual) : SolverError(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

}  // namespace hjb
