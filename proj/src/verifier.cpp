#include "hjb/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <locale>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "hjb/io.hpp"

namespace hjb {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::holds_on_samples:
      return "holds_on_samples";
    case Verdict::violated:
      return "violated";
    case Verdict::inconclusive:
      return "inconclusive";
  }
  return "inconclusive";
}

Verdict parse_verdict(const std::string& text) {
  if (text == "holds_on_samples") return Verdict::holds_on_samples;
  if (text == "violated") return Verdict::violated;
  if (text == "inconclusive") return Verdict::inconclusive;
  throw std::invalid_argument("unknown verdict '" + text + "'");
}

namespace {

using Pt = Point<double>;
constexpr double kPi = 3.14159265358979323846;

/// Halton points with a seeded Cranley-Patterson rotation.
class QuasiRandom {
 public:
  QuasiRandom(int dims, std::uint64_t seed) : shift_(static_cast<std::size_t>(dims)) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (auto& s : shift_) s = unit(rng);
  }

  std::vector<double> next() {
    static constexpr int kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29};
    ++index_;
    std::vector<double> out(shift_.size());
    for (std::size_t d = 0; d < shift_.size(); ++d) {
      const double v = radical_inverse(index_, kPrimes[d]) + shift_[d];
      out[d] = v - std::floor(v);
    }
    return out;
  }

 private:
  static double radical_inverse(std::uint64_t i, int base) {
    double inv = 1.0 / base, f = inv, r = 0;
    while (i > 0) {
      r += f * static_cast<double>(i % static_cast<std::uint64_t>(base));
      i /= static_cast<std::uint64_t>(base);
      f *= inv;
    }
    return r;
  }

  std::vector<double> shift_;
  std::uint64_t index_ = 0;
};

Pt ball_point(int dim, double u1, double u2, double radius) {
  Pt p(dim);
  if (dim == 1) {
    p[0] = radius * (2 * u1 - 1);
  } else {
    const double r = radius * std::sqrt(u1);
    p << r * std::cos(2 * kPi * u2), r * std::sin(2 * kPi * u2);
  }
  return p;
}

Pt shell_point(int dim, double u1, double u2, double r_min, double r_max) {
  const double r = r_min + (r_max - r_min) * u1;
  Pt p(dim);
  if (dim == 1) {
    p[0] = u2 < 0.5 ? -r : r;
  } else {
    p << r * std::cos(2 * kPi * u2), r * std::sin(2 * kPi * u2);
  }
  return p;
}

std::vector<Pt> unit_lattice_directions(int dim) {
  std::vector<Pt> out;
  if (dim == 1) {
    out.push_back(Pt::Constant(1, 1.0));
    out.push_back(Pt::Constant(1, -1.0));
    return out;
  }
  const int comps[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (const auto& c : comps) {
    Pt d(2);
    d << c[0], c[1];
    d.normalize();
    out.push_back(d);
    out.push_back(-d);
  }
  return out;
}

std::vector<Index> nodes_where(const DegeneracyMask<double>& mask, bool in_sigma) {
  std::vector<Index> out;
  for (Index k = 0; k < mask.grid.size(); ++k)
    if (mask.contains(k) == in_sigma) out.push_back(k);
  return out;
}

std::vector<Index> all_nodes(const TorusGrid<double>& grid) {
  std::vector<Index> out(static_cast<std::size_t>(grid.size()));
  for (Index k = 0; k < grid.size(); ++k) out[static_cast<std::size_t>(k)] = k;
  return out;
}

/// At most `count` nodes from the list, picked by a golden-ratio sequence so that a regular stride
/// cannot alias with the lattice numbering (e.g. a stride of n landing on one column).
std::vector<Index> strided(const std::vector<Index>& nodes, std::size_t count) {
  if (nodes.size() <= count) return nodes;
  constexpr double kGolden = 0.6180339887498949;
  std::vector<Index> out;
  for (std::size_t i = 0; i < count; ++i) {
    const double u = static_cast<double>(i) * kGolden;
    out.push_back(nodes[static_cast<std::size_t>((u - std::floor(u)) * static_cast<double>(nodes.size()))]);
  }
  return out;
}

Index pick(const std::vector<Index>& nodes, double u) {
  auto i = static_cast<std::size_t>(u * static_cast<double>(nodes.size()));
  return nodes[std::min(i, nodes.size() - 1)];
}

void append(std::vector<double>& w, const Pt& v) {
  for (int i = 0; i < v.size(); ++i) w.push_back(v[i]);
}

Pt read_point(const std::vector<double>& w, std::size_t& pos, int dim) {
  if (pos + static_cast<std::size_t>(dim) > w.size()) throw std::invalid_argument("witness too short");
  Pt p(dim);
  for (int i = 0; i < dim; ++i) p[i] = w[pos++];
  return p;
}

double H(const HJBProblem<double>& prob, int th, const Pt& x, const Pt& p) { return eval_hamiltonian(prob, th, x, p); }

double convexity_margin(const HJBProblem<double>& prob, int th, const Pt& x, const Pt& p, const Pt& q, double lambda) {
  const Pt mid = lambda * p + (1 - lambda) * q;
  return lambda * H(prob, th, x, p) + (1 - lambda) * H(prob, th, x, q) - H(prob, th, x, mid);
}

double h10_margin(const HJBProblem<double>& prob, int th, const Pt& x, const Pt& p, double mu, double c) {
  return H(prob, th, x, mu * p) - mu * H(prob, th, x, p) - (1 - mu) * c;
}

/// Tracks the smallest margin seen and the sample that produced it.
struct Worst {
  double margin = std::numeric_limits<double>::infinity();
  std::vector<double> witness;

  void offer(double m, const std::function<std::vector<double>()>& make_witness) {
    if (m < margin) {
      margin = m;
      witness = make_witness();
    }
  }
  bool seen() const { return std::isfinite(margin); }
};

CheckReport finish(std::string name, const Worst& worst, bool strict, std::string note = {}) {
  CheckReport r;
  r.name = std::move(name);
  r.note = std::move(note);
  if (!worst.seen()) {
    r.verdict = Verdict::inconclusive;
    return r;
  }
  r.margin = worst.margin;
  r.witness = worst.witness;
  const bool ok = strict ? worst.margin > kStrictThreshold : worst.margin >= -kStrictThreshold;
  r.verdict = ok ? Verdict::holds_on_samples : Verdict::violated;
  return r;
}

/// Torus distance between two nodes.
double torus_distance(const TorusGrid<double>& grid, Index a, Index b) {
  const auto ia = grid.multi_index(a), ib = grid.multi_index(b);
  double d2 = 0;
  for (int i = 0; i < grid.dim(); ++i) {
    int d = std::abs(ia[static_cast<std::size_t>(i)] - ib[static_cast<std::size_t>(i)]);
    d = std::min(d, grid.n_per_axis() - d);
    d2 += (d * grid.h()) * (d * grid.h());
  }
  return std::sqrt(d2);
}

double superlinear_margin(const HJBProblem<double>& prob, int th, const Pt& x, const Pt& p, double L1, double h0_sup,
                          double sigma_x_sup) {
  constexpr double step = 1e-5;
  const int dim = prob.dim();
  Pt hp(dim), hx(dim);
  for (int i = 0; i < dim; ++i) {
    Pt pp = p, pm = p, xp = x, xm = x;
    pp[i] += step;
    pm[i] -= step;
    xp[i] += step;
    xm[i] -= step;
    hp[i] = (H(prob, th, x, pp) - H(prob, th, x, pm)) / (2 * step);
    hx[i] = (H(prob, th, xp, p) - H(prob, th, xm, p)) / (2 * step);
  }
  // |2 sigma (sigma^T)_x|: largest Frobenius norm of 2 sigma d_k sigma^T over k.
  const auto s = prob.sigma_matrix(th, x);
  double cross = 0;
  for (int k = 0; k < dim; ++k) {
    Pt xp = x, xm = x;
    xp[k] += step;
    xm[k] -= step;
    const SmallMatrix<double> ds = (prob.sigma_matrix(th, xp) - prob.sigma_matrix(th, xm)) / (2 * step);
    cross = std::max(cross, (2.0 * s * ds.transpose()).norm());
  }
  const double pn = p.norm();
  return L1 * (hp.dot(p) - H(prob, th, x, p) - cross * pn - h0_sup) - hx.norm() - dim * sigma_x_sup * sigma_x_sup * pn;
}

/// sup_x |H(x,0)| and sup_x |d_k sigma(x)| over a lattice.
std::pair<double, double> superlinear_constants(const HJBProblem<double>& prob, const TorusGrid<double>& grid) {
  constexpr double step = 1e-5;
  double h0 = 0, sx = 0;
  const Pt zero = Pt::Zero(prob.dim());
  for (int th = 0; th < prob.control_count(); ++th)
    for (Index k = 0; k < grid.size(); ++k) {
      const Pt x = grid.coordinate(k);
      h0 = std::max(h0, std::abs(H(prob, th, x, zero)));
      for (int i = 0; i < prob.dim(); ++i) {
        Pt xp = x, xm = x;
        xp[i] += step;
        xm[i] -= step;
        sx = std::max(sx, ((prob.sigma_matrix(th, xp) - prob.sigma_matrix(th, xm)) / (2 * step)).norm());
      }
    }
  return {h0, sx};
}

double nr_f_inf(const NRDecomposition& d, int controls, const Pt& x, int* argmin = nullptr) {
  double best = std::numeric_limits<double>::infinity();
  for (int th = 0; th < controls; ++th) {
    const double v = d.f(th, x);
    if (v < best) {
      best = v;
      if (argmin) *argmin = th;
    }
  }
  return best;
}

}  // namespace

ConvexityReports check_convexity(const HJBProblem<double>& prob, const DegeneracyMask<double>& sigma_mask, int samples,
                                 const SamplingParams& sampling) {
  if (samples < 100) throw std::invalid_argument("check_convexity: need at least 100 samples");
  const int dim = prob.dim();
  const double R = sampling.grad_range;
  const auto dirs = unit_lattice_directions(dim);
  const double radii[] = {R / 4, R / 2, R};
  const double lambdas[] = {0.25, 0.5, 0.75};

  auto scan = [&](const std::vector<Index>& nodes) {
    Worst worst;
    if (nodes.empty()) return worst;
    auto offer = [&](int th, const Pt& x, const Pt& p, const Pt& q, double lam) {
      worst.offer(convexity_margin(prob, th, x, p, q, lam), [&] {
        std::vector<double> w{double(th)};
        append(w, x);
        append(w, p);
        append(w, q);
        w.push_back(lam);
        return w;
      });
    };
    for (Index k : strided(nodes, 64)) {
      const Pt x = sigma_mask.grid.coordinate(k);
      for (int th = 0; th < prob.control_count(); ++th)
        for (const auto& d : dirs)
          for (double lam : lambdas) {
            for (double r1 : radii)
              for (double r2 : radii)
                if (r1 != r2) offer(th, x, r1 * d, r2 * d, lam);
            for (double r : radii) offer(th, x, r * d, -r * d, lam);
            // Parallelogram pairs around r d, down to small |p| where degree-one terms dominate.
            if (dim == 2) {
              Pt perp(2);
              perp << -d[1], d[0];
              for (double r : {R / 128, R / 32, R / 8}) offer(th, x, r * (d + perp), r * (d - perp), lam);
            }
          }
    }
    QuasiRandom qr(6, sampling.seed);
    for (int s = 0; s < samples; ++s) {
      const auto u = qr.next();
      const Pt x = sigma_mask.grid.coordinate(pick(nodes, u[0]));
      const Pt p = ball_point(dim, u[1], u[2], R);
      const Pt q = ball_point(dim, u[3], u[4], R);
      const double lam = std::clamp(u[5], 1e-3, 1 - 1e-3);
      // Pairs closer than R/100 carry a convexity gap below the strictness threshold even for |p|^2.
      if ((p - q).norm() < 1e-2 * R) continue;
      for (int th = 0; th < prob.control_count(); ++th) offer(th, x, p, q, lam);
    }
    return worst;
  };

  ConvexityReports out;
  const auto sigma_nodes = nodes_where(sigma_mask, true);
  out.strict_on_sigma = finish("cvx_neuf", scan(sigma_nodes), true,
                               sigma_nodes.empty() ? "degeneracy set is empty on this grid" : "");
  out.plain = finish("convexity", scan(all_nodes(sigma_mask.grid)), false);
  return out;
}

CheckReport check_H10(const HJBProblem<double>& prob, const H10Params& params, const DegeneracyMask<double>& sigma_mask,
                      int samples, const SamplingParams& sampling) {
  if (samples < 100) throw std::invalid_argument("check_H10: need at least 100 samples");
  const auto& grid = sigma_mask.grid;
  if (params.K_mask && static_cast<Index>(params.K_mask->size()) != grid.size())
    throw std::invalid_argument("check_H10: K mask size does not match the grid");
  const int dim = prob.dim();
  const double R = sampling.grad_range;
  const double c = params.c;
  auto in_K = [&](Index k) { return params.K_mask && (*params.K_mask)[static_cast<std::size_t>(k)] != 0; };

  std::vector<Index> everywhere = all_nodes(grid), K_nodes, sigma_off_K;
  for (Index k = 0; k < grid.size(); ++k) {
    if (in_K(k)) K_nodes.push_back(k);
    else if (sigma_mask.contains(k)) sigma_off_K.push_back(k);
  }

  Worst part_i, part_a, part_b;
  auto witness = [&](int part, int th, const Pt& x, const Pt& p, double mu) {
    std::vector<double> w{double(part), double(th)};
    append(w, x);
    append(w, p);
    w.push_back(mu);
    w.push_back(c);
    return w;
  };
  auto offer_mu = [&](Worst& worst, int part, const Pt& x, const Pt& p, double mu) {
    for (int th = 0; th < prob.control_count(); ++th)
      worst.offer(h10_margin(prob, th, x, p, mu, c), [&] { return witness(part, th, x, p, mu); });
  };
  auto offer_a = [&](const Pt& x, const Pt& p) {
    for (int th = 0; th < prob.control_count(); ++th)
      part_a.offer(H(prob, th, x, p) - c, [&] { return witness(2, th, x, p, 1.0); });
  };

  // Structured samples: lattice directions at fixed radii, mu on a coarse ladder.
  const auto dirs = unit_lattice_directions(dim);
  const double radii[] = {R / 4, R / 2, R};
  const double mu_open[] = {0.25, 0.5, 0.75};
  const double mu_closed[] = {0.25, 0.5, 0.75, 1.0};
  for (Index k : strided(everywhere, 64)) {
    const Pt x = grid.coordinate(k);
    for (const auto& d : dirs)
      for (double r : radii)
        for (double m : mu_open) offer_mu(part_i, 1, x, r * d, 1 + (params.mu0 - 1) * m);
  }
  for (Index k : strided(K_nodes, 64)) {
    const Pt x = grid.coordinate(k);
    offer_a(x, Pt::Zero(dim));
    for (const auto& d : dirs)
      for (double r : radii) offer_a(x, r * d);
  }
  for (Index k : strided(sigma_off_K, 64)) {
    const Pt x = grid.coordinate(k);
    for (const auto& d : dirs)
      for (double r : radii)
        for (double m : mu_closed) offer_mu(part_b, 3, x, r * d, 1 + (params.mu0 - 1) * m);
  }

  QuasiRandom qr(4, sampling.seed);
  for (int s = 0; s < samples; ++s) {
    const auto u = qr.next();
    const Pt p = ball_point(dim, u[1], u[2], R);
    const double mu = 1 + (params.mu0 - 1) * std::clamp(u[3], 1e-3, 1 - 1e-3);
    offer_mu(part_i, 1, grid.coordinate(pick(everywhere, u[0])), p, mu);
    if (!K_nodes.empty()) offer_a(grid.coordinate(pick(K_nodes, u[0])), p);
    if (!sigma_off_K.empty() && p.norm() > 0) {
      const double mu_b = 1 + (params.mu0 - 1) * std::clamp(u[3], 1e-3, 1.0);
      offer_mu(part_b, 3, grid.coordinate(pick(sigma_off_K, u[0])), p, mu_b);
    }
  }

  const CheckReport ri = finish("H10", part_i, false);
  const CheckReport ra = finish("H10", part_a, false);
  const CheckReport rb = finish("H10", part_b, true);
  for (const auto* r : {&ri, &ra, &rb})
    if (r->verdict == Verdict::violated) {
      CheckReport out = *r;
      out.note = r == &ri ? "(i) fails" : r == &ra ? "(ii)(a) fails" : "(ii)(b) strictness fails";
      return out;
    }
  // Nothing failed: report the smallest margin seen across parts.
  const CheckReport* best = &ri;
  for (const auto* r : {&ra, &rb})
    if (r->verdict != Verdict::inconclusive && r->margin < best->margin) best = r;
  CheckReport out = *best;
  out.verdict = Verdict::holds_on_samples;
  if (sigma_off_K.empty()) out.note = "Sigma_h \\ K is empty; (ii)(b) vacuous";
  return out;
}

CheckReport check_uniform_ellipticity(const HJBProblem<double>& prob, const DegeneracyMask<double>& sigma_mask,
                                      double delta) {
  if (!(delta > 0)) throw std::invalid_argument("check_uniform_ellipticity: delta must be > 0");
  const auto& grid = sigma_mask.grid;
  const auto sigma_nodes = nodes_where(sigma_mask, true);
  Worst worst;
  for (Index k = 0; k < grid.size(); ++k) {
    if (sigma_mask.contains(k)) continue;
    double dist = std::numeric_limits<double>::infinity();
    for (Index s : sigma_nodes) dist = std::min(dist, torus_distance(grid, k, s));
    if (!(dist > delta)) continue;
    const Pt x = grid.coordinate(k);
    for (int th = 0; th < prob.control_count(); ++th) {
      const Eigen::MatrixXd a = eval_diffusion(prob, th, x);
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
      const double nu = eig.eigenvalues()[0];
      worst.offer(nu, [&] {
        std::vector<double> w{double(th)};
        append(w, x);
        Pt v = eig.eigenvectors().col(0);
        // Fix the sign so the witness is reproducible: first nonzero component positive.
        for (int i = 0; i < v.size(); ++i)
          if (std::abs(v[i]) > 1e-12) {
            if (v[i] < 0) v = -v;
            break;
          }
        append(w, v);
        return w;
      });
    }
  }
  CheckReport r;
  r.name = "inver_dege";
  if (!worst.seen()) {
    r.verdict = Verdict::inconclusive;
    r.note = "no nodes farther than delta from Sigma_h";
    return r;
  }
  r.margin = worst.margin;
  r.witness = worst.witness;
  r.verdict = worst.margin > sigma_mask.tol ? Verdict::holds_on_samples : Verdict::violated;
  return r;
}

CheckReport check_superlinear(const HJBProblem<double>& prob, const SuperlinearParams& params,
                              const TorusGrid<double>& grid, int samples, std::uint64_t seed) {
  if (samples < 100) throw std::invalid_argument("check_superlinear: need at least 100 samples");
  const int dim = prob.dim();
  const auto [h0_sup, sigma_x_sup] = superlinear_constants(prob, grid);
  const auto nodes = all_nodes(grid);
  Worst worst;
  auto offer = [&](const Pt& x, const Pt& p) {
    for (int th = 0; th < prob.control_count(); ++th)
      worst.offer(superlinear_margin(prob, th, x, p, params.L1, h0_sup, sigma_x_sup), [&] {
        std::vector<double> w{double(th)};
        append(w, x);
        append(w, p);
        return w;
      });
  };
  const auto dirs = unit_lattice_directions(dim);
  const double radii[] = {params.L1, 0.5 * (params.L1 + params.grad_range), params.grad_range};
  for (Index k : strided(nodes, 64))
    for (const auto& d : dirs)
      for (double r : radii) offer(grid.coordinate(k), r * d);
  QuasiRandom qr(3, seed);
  for (int s = 0; s < samples; ++s) {
    const auto u = qr.next();
    offer(grid.coordinate(pick(nodes, u[0])), shell_point(dim, u[1], u[2], params.L1, params.grad_range));
  }
  return finish("BSsuperlinear", worst, false,
                "central differences, step 1e-5; margins at kinks of H are approximate");
}

std::vector<char> nr_argmin_set(const HJBProblem<double>& prob, const NRDecomposition& decomposition,
                                const DegeneracyMask<double>& sigma_mask) {
  const auto& grid = sigma_mask.grid;
  double f_min = std::numeric_limits<double>::infinity();
  for (Index k = 0; k < grid.size(); ++k)
    f_min = std::min(f_min, nr_f_inf(decomposition, prob.control_count(), grid.coordinate(k)));
  const double tol = 1e-12 * (1 + std::abs(f_min));
  std::vector<char> K(static_cast<std::size_t>(grid.size()), 0);
  for (Index k = 0; k < grid.size(); ++k)
    if (sigma_mask.contains(k) && nr_f_inf(decomposition, prob.control_count(), grid.coordinate(k)) <= f_min + tol)
      K[static_cast<std::size_t>(k)] = 1;
  return K;
}

CheckReport check_nr_structure(const HJBProblem<double>& prob, const NRDecomposition& decomposition,
                               const DegeneracyMask<double>& sigma_mask, int samples, const SamplingParams& sampling) {
  if (samples < 100) throw std::invalid_argument("check_nr_structure: need at least 100 samples");
  if (!decomposition.F || !decomposition.f) throw std::invalid_argument("check_nr_structure: incomplete decomposition");
  const auto& grid = sigma_mask.grid;
  const int dim = prob.dim();
  const int controls = prob.control_count();
  const double R = sampling.grad_range;
  const auto nodes = all_nodes(grid);
  const Pt zero = Pt::Zero(dim);

  Worst normalization, nonneg, convex;
  for (Index k : nodes) {
    const Pt x = grid.coordinate(k);
    for (int th = 0; th < controls; ++th)
      normalization.offer(-std::abs(decomposition.F(th, x, zero)), [&] {
        std::vector<double> w{1.0, double(th)};
        append(w, x);
        append(w, zero);
        return w;
      });
  }
  QuasiRandom qr(6, sampling.seed);
  for (int s = 0; s < samples; ++s) {
    const auto u = qr.next();
    const Pt x = grid.coordinate(pick(nodes, u[0]));
    const Pt p = ball_point(dim, u[1], u[2], R);
    const Pt q = ball_point(dim, u[3], u[4], R);
    const double lam = std::clamp(u[5], 1e-3, 1 - 1e-3);
    for (int th = 0; th < controls; ++th) {
      nonneg.offer(decomposition.F(th, x, p) - decomposition.F(th, x, zero), [&] {
        std::vector<double> w{2.0, double(th)};
        append(w, x);
        append(w, p);
        return w;
      });
      const double m = lam * decomposition.F(th, x, p) + (1 - lam) * decomposition.F(th, x, q) -
                       decomposition.F(th, x, lam * p + (1 - lam) * q);
      convex.offer(m, [&] {
        std::vector<double> w{3.0, double(th)};
        append(w, x);
        append(w, p);
        append(w, q);
        w.push_back(lam);
        return w;
      });
    }
  }

  for (const auto* worst : {&normalization, &nonneg, &convex}) {
    CheckReport r = finish("hyp_nr", *worst, false);
    if (r.verdict == Verdict::violated) {
      r.note = worst == &normalization ? "F(x,0) != 0" : worst == &nonneg ? "F(x,p) < F(x,0)" : "F not convex in p";
      return r;
    }
  }

  double f_min = std::numeric_limits<double>::infinity();
  for (Index k : nodes) f_min = std::min(f_min, nr_f_inf(decomposition, controls, grid.coordinate(k)));
  const auto K = nr_argmin_set(prob, decomposition, sigma_mask);
  const bool K_empty = std::none_of(K.begin(), K.end(), [](char c) { return c != 0; });

  Worst nr456;
  for (Index k : nodes) {
    if (!sigma_mask.contains(k) || K[static_cast<std::size_t>(k)]) continue;
    const Pt x = grid.coordinate(k);
    int th = 0;
    const double m = nr_f_inf(decomposition, controls, x, &th) - f_min;
    nr456.offer(m, [&] {
      std::vector<double> w{4.0, double(th)};
      append(w, x);
      w.push_back(f_min);
      return w;
    });
  }

  if (K_empty) {
    CheckReport r;
    r.name = "hyp_nr";
    r.verdict = Verdict::violated;
    r.note = "K is empty: the minimum of f is not attained in Sigma_h";
    if (nr456.seen()) {
      r.margin = nr456.margin;
      r.witness = nr456.witness;
    } else {
      r.margin = -1;
      r.witness = {5.0, 0.0, f_min};
    }
    return r;
  }
  if (!nr456.seen()) {
    CheckReport r = finish("hyp_nr", convex, false, "Sigma_h \\ K is empty; nr456 vacuous");
    return r;
  }
  CheckReport r = finish("hyp_nr", nr456, true);
  if (r.verdict == Verdict::violated) r.note = "inf f on Sigma_h \\ K reaches min f";
  return r;
}

CheckReport check_kernel_condition(const HJBProblem<double>& prob, const DegeneracyMask<double>& sigma_mask, int samples,
                                   std::uint64_t seed) {
  if (prob.dim() != 2) throw std::invalid_argument("check_kernel_condition: requires dim = 2");
  const auto& grid = sigma_mask.grid;
  CheckReport r;
  r.name = "kernel_condition";

  // (a) the coordinate planes {x_i = 0} lie in Sigma_h.
  for (Index k = 0; k < grid.size(); ++k) {
    const auto idx = grid.multi_index(k);
    if ((idx[0] == 0 || idx[1] == 0) && !sigma_mask.contains(k)) {
      r.verdict = Verdict::violated;
      r.margin = -1;
      r.witness = {1.0};
      append(r.witness, grid.coordinate(k));
      r.note = "coordinate plane node outside Sigma_h";
      return r;
    }
  }

  // (b) kernel lines of sigma_theta(x) off Sigma_h leave a gap wider than 2 degrees on the circle.
  auto off = nodes_where(sigma_mask, false);
  if (static_cast<std::size_t>(samples) < off.size()) {
    QuasiRandom qr(1, seed);
    std::vector<Index> chosen;
    for (int s = 0; s < samples; ++s) chosen.push_back(pick(off, qr.next()[0]));
    std::sort(chosen.begin(), chosen.end());
    chosen.erase(std::unique(chosen.begin(), chosen.end()), chosen.end());
    off = chosen;
  }
  double scale = 0;
  for (Index k : off)
    for (int th = 0; th < prob.control_count(); ++th)
      scale = std::max(scale, prob.sigma_matrix(th, grid.coordinate(k)).norm());
  const double tol = 1e-10 * std::max(scale, 1.0);

  std::vector<double> angles;  // kernel lines, angle in [0, pi)
  bool whole_circle = false;
  Pt whole_circle_x;
  for (Index k : off) {
    const Pt x = grid.coordinate(k);
    for (int th = 0; th < prob.control_count(); ++th) {
      SmallMatrix<double> s = prob.sigma_matrix(th, x);
      Eigen::Matrix2d sq = Eigen::Matrix2d::Zero();
      sq.leftCols(std::min<Index>(2, s.cols())) = s.leftCols(std::min<Index>(2, s.cols()));
      Eigen::JacobiSVD<Eigen::Matrix2d> svd(sq, Eigen::ComputeFullV);
      const auto sv = svd.singularValues();
      if (sv[0] <= tol) {
        whole_circle = true;
        whole_circle_x = x;
        continue;
      }
      if (sv[1] <= tol) {
        const Eigen::Vector2d v = svd.matrixV().col(1);
        double a = std::atan2(v[1], v[0]);
        if (a < 0) a += kPi;
        if (a >= kPi) a -= kPi;
        angles.push_back(a);
      }
    }
  }
  const double two_degrees = 2.0 * kPi / 180.0;
  if (whole_circle) {
    r.verdict = Verdict::violated;
    r.margin = -two_degrees;
    r.witness = {2.0};
    append(r.witness, whole_circle_x);
    r.note = "sigma_theta vanishes at a node outside Sigma_h";
    return r;
  }
  double best_gap = kPi, best_mid = 0;
  if (!angles.empty()) {
    std::sort(angles.begin(), angles.end());
    best_gap = -1;
    for (std::size_t i = 0; i < angles.size(); ++i) {
      const double a = angles[i];
      const double b = i + 1 < angles.size() ? angles[i + 1] : angles[0] + kPi;
      if (b - a > best_gap) {
        best_gap = b - a;
        best_mid = 0.5 * (a + b);
      }
    }
  }
  r.margin = 0.5 * best_gap - two_degrees;
  r.witness = {2.0, std::cos(best_mid), std::sin(best_mid)};
  r.verdict = r.margin > 0 ? Verdict::holds_on_samples : Verdict::violated;
  if (angles.empty()) r.note = "sigma_theta has full rank at every sampled node off Sigma_h";
  return r;
}

std::optional<double> recompute_margin(const HJBProblem<double>& prob, const CheckReport& report,
                                       const NRDecomposition* decomposition) {
  const auto& w = report.witness;
  if (w.empty()) return std::nullopt;
  const int dim = prob.dim();
  std::size_t pos = 0;
  if (report.name == "convexity" || report.name == "cvx_neuf") {
    const int th = static_cast<int>(w[pos++]);
    const Pt x = read_point(w, pos, dim), p = read_point(w, pos, dim), q = read_point(w, pos, dim);
    return convexity_margin(prob, th, x, p, q, w.at(pos));
  }
  if (report.name == "H10") {
    const int part = static_cast<int>(w[pos++]);
    const int th = static_cast<int>(w[pos++]);
    const Pt x = read_point(w, pos, dim), p = read_point(w, pos, dim);
    const double mu = w.at(pos), c = w.at(pos + 1);
    if (part == 2) return H(prob, th, x, p) - c;
    return h10_margin(prob, th, x, p, mu, c);
  }
  if (report.name == "inver_dege") {
    const int th = static_cast<int>(w[pos++]);
    const Pt x = read_point(w, pos, dim);
    const Eigen::MatrixXd a = eval_diffusion(prob, th, x);
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues()[0];
  }
  if (report.name == "kernel_condition") {
    return std::nullopt;
  }
  if (report.name == "hyp_nr") {
    if (!decomposition) return std::nullopt;
    const int part = static_cast<int>(w[pos++]);
    const int th = static_cast<int>(w[pos++]);
    if (part == 5) return std::nullopt;
    const Pt x = read_point(w, pos, dim);
    const Pt zero = Pt::Zero(dim);
    switch (part) {
      case 1:
        return -std::abs(decomposition->F(th, x, zero));
      case 2:
        return decomposition->F(th, x, read_point(w, pos, dim)) - decomposition->F(th, x, zero);
      case 3: {
        const Pt p = read_point(w, pos, dim), q = read_point(w, pos, dim);
        const double lam = w.at(pos);
        return lam * decomposition->F(th, x, p) + (1 - lam) * decomposition->F(th, x, q) -
               decomposition->F(th, x, lam * p + (1 - lam) * q);
      }
      case 4:
        return nr_f_inf(*decomposition, prob.control_count(), x) - w.at(pos);
      default:
        return std::nullopt;
    }
  }
  return std::nullopt;
}

std::string serialize_reports(const std::vector<CheckReport>& reports) {
  std::string out;
  for (const auto& r : reports) {
    out += r.name + ' ' + to_string(r.verdict) + ' ' + format_real(r.margin);
    for (double v : r.witness) out += ' ' + format_real(v);
    out += '\n';
  }
  return out;
}

std::vector<CheckReport> parse_reports(const std::string& text) {
  std::vector<CheckReport> out;
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line)) {
    if (line.empty()) continue;
    std::istringstream is(line);
    is.imbue(std::locale::classic());
    CheckReport r;
    std::string verdict;
    if (!(is >> r.name >> verdict >> r.margin)) throw std::invalid_argument("parse_reports: malformed line '" + line + "'");
    r.verdict = parse_verdict(verdict);
    double v;
    while (is >> v) r.witness.push_back(v);
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace hjb
