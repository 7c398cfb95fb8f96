#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hjb/problem_model.hpp"

namespace hjb {

enum class Verdict { holds_on_samples, violated, inconclusive };

std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& text);

/**
 * Outcome of one sampled hypothesis check.
 *
 * `margin` is the slack at the binding sample and `witness` is that sample, laid out per check:
 *   convexity, cvx_neuf   theta, x..., p..., q..., lambda
 *   H10                   part(1: (i), 2: (ii)(a), 3: (ii)(b)), theta, x..., p..., mu, c
 *   inver_dege            theta, x..., eigenvector...
 *   BSsuperlinear         theta, x..., p...
 *   hyp_nr                part(1: F(x,0)=0, 2: F(x,p)>=F(x,0), 3: F convex, 4: nr456), theta, x..., then
 *                         p... (parts 1-2), p..., q..., lambda (part 3), f_min (part 4)
 *   kernel_condition      part(1: boundary plane outside Sigma, 2: direction gap), x... or xi...
 * Non-strict inequalities hold when margin >= -1e-9; strict ones when margin > 1e-9.
 */
struct CheckReport {
  std::string name;
  Verdict verdict = Verdict::inconclusive;
  std::vector<double> witness;
  double margin = 0;
  std::string note;
};

inline constexpr double kStrictThreshold = 1e-9;

struct SamplingParams {
  double grad_range = 2.0;  // p is sampled in the ball |p| <= grad_range
  std::uint64_t seed = 42;
};

struct H10Params {
  double c;
  double mu0;
  std::optional<std::vector<char>> K_mask;  // nodes of the compact set K; empty optional means K = {}

  H10Params(double c_, double mu0_, std::optional<std::vector<char>> k = std::nullopt)
      : c(c_), mu0(mu0_), K_mask(std::move(k)) {
    if (!(mu0 > 1)) throw std::invalid_argument("H10Params: mu0 must be > 1");
  }
};

struct SuperlinearParams {
  double L1;
  double grad_range;

  SuperlinearParams(double l1, double range) : L1(l1), grad_range(range) {
    if (!(L1 >= 1)) throw std::invalid_argument("SuperlinearParams: L1 must be >= 1");
    if (!(grad_range >= L1)) throw std::invalid_argument("SuperlinearParams: grad_range must be >= L1");
  }
};

/// Caller-supplied split H_theta = F_theta(x, p) - f_theta(x).
struct NRDecomposition {
  std::function<double(int theta, const Point<double>& x, const Point<double>& p)> F;
  std::function<double(int theta, const Point<double>& x)> f;
};

struct ConvexityReports {
  CheckReport strict_on_sigma;  // "cvx_neuf"
  CheckReport plain;            // "convexity", over every node
};

ConvexityReports check_convexity(const HJBProblem<double>& prob, const DegeneracyMask<double>& sigma_mask, int samples,
                                 const SamplingParams& sampling = {});

CheckReport check_H10(const HJBProblem<double>& prob, const H10Params& params, const DegeneracyMask<double>& sigma_mask,
                      int samples, const SamplingParams& sampling = {});

/// nu_delta = min eigenvalue of A_theta over nodes farther than delta (torus distance) from Sigma_h.
CheckReport check_uniform_ellipticity(const HJBProblem<double>& prob, const DegeneracyMask<double>& sigma_mask,
                                      double delta);

CheckReport check_superlinear(const HJBProblem<double>& prob, const SuperlinearParams& params,
                              const TorusGrid<double>& grid, int samples, std::uint64_t seed = 42);

CheckReport check_nr_structure(const HJBProblem<double>& prob, const NRDecomposition& decomposition,
                               const DegeneracyMask<double>& sigma_mask, int samples, const SamplingParams& sampling = {});

/// Nodes of the argmin set of f inside Sigma_h (the K of the Namah-Roquejoffre structure).
std::vector<char> nr_argmin_set(const HJBProblem<double>& prob, const NRDecomposition& decomposition,
                                const DegeneracyMask<double>& sigma_mask);

CheckReport check_kernel_condition(const HJBProblem<double>& prob, const DegeneracyMask<double>& sigma_mask, int samples,
                                   std::uint64_t seed = 42);

/// Margin at the witness of a pointwise check, recomputed from scratch. Empty when the margin is not
/// a function of the witness alone (kernel direction gaps) or there is no witness.
std::optional<double> recompute_margin(const HJBProblem<double>& prob, const CheckReport& report,
                                       const NRDecomposition* decomposition = nullptr);

/// One record per line: `name verdict margin witness...`, C locale, 17 significant digits.
std::string serialize_reports(const std::vector<CheckReport>& reports);
std::vector<CheckReport> parse_reports(const std::string& text);

}  // namespace hjb
