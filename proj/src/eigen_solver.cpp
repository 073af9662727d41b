#include "insulab/eigen_solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace insulab {

namespace {

constexpr int kBlock = 3;

// Cyclic Jacobi for a small symmetric matrix (row-major, p x p). Returns
// eigenvalues ascending; columns of `vectors` are the eigenvectors.
std::vector<double> small_symmetric_eigen(std::vector<double> a, int p, std::vector<double>& vectors) {
  vectors.assign(static_cast<std::size_t>(p * p), 0.0);
  for (int i = 0; i < p; ++i) vectors[static_cast<std::size_t>(i * p + i)] = 1.0;
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i * p + j)]; };
  auto V = [&](int i, int j) -> double& { return vectors[static_cast<std::size_t>(i * p + j)]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30) break;
    for (int i = 0; i < p; ++i)
      for (int j = i + 1; j < p; ++j) {
        if (A(i, j) == 0.0) continue;
        const double theta = (A(j, j) - A(i, i)) / (2.0 * A(i, j));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < p; ++k) {
          const double aki = A(k, i);
          const double akj = A(k, j);
          A(k, i) = c * aki - s * akj;
          A(k, j) = s * aki + c * akj;
        }
        for (int k = 0; k < p; ++k) {
          const double aik = A(i, k);
          const double ajk = A(j, k);
          A(i, k) = c * aik - s * ajk;
          A(j, k) = s * aik + c * ajk;
        }
        for (int k = 0; k < p; ++k) {
          const double vki = V(k, i);
          const double vkj = V(k, j);
          V(k, i) = c * vki - s * vkj;
          V(k, j) = s * vki + c * vkj;
        }
      }
  }
  std::vector<int> order(static_cast<std::size_t>(p));
  for (int i = 0; i < p; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return A(x, x) < A(y, y); });
  std::vector<double> vals(static_cast<std::size_t>(p));
  std::vector<double> sorted(static_cast<std::size_t>(p * p));
  for (int c = 0; c < p; ++c) {
    vals[static_cast<std::size_t>(c)] = A(order[static_cast<std::size_t>(c)], order[static_cast<std::size_t>(c)]);
    for (int r = 0; r < p; ++r) sorted[static_cast<std::size_t>(r * p + c)] = V(r, order[static_cast<std::size_t>(c)]);
  }
  vectors = std::move(sorted);
  return vals;
}

// M-orthonormalises the block in place (two Gram-Schmidt passes); columns that
// become numerically dependent are dropped.
void m_orthonormalize(std::vector<Vector>& block, const SparseOperator& mass, const Subspace& sub) {
  std::vector<Vector> out;
  std::vector<Vector> mout;
  for (auto& y : block) {
    sub.project(y);
    Vector my = mass * y;
    const double original = std::sqrt(std::max(dot(y, my), 0.0));
    if (original == 0.0) continue;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < out.size(); ++k) {
        const double c = dot(mout[k], y);
        axpy(-c, out[k], y);
      }
      my = mass * y;
    }
    const double nrm = std::sqrt(std::max(dot(y, my), 0.0));
    if (nrm <= 1e-10 * original) continue;
    scale(y, 1.0 / nrm);
    scale(my, 1.0 / nrm);
    out.push_back(std::move(y));
    mout.push_back(std::move(my));
  }
  block = std::move(out);
}

double residual_norm(const SparseOperator& k, const SparseOperator& m, const Subspace& sub, const Vector& x, double lambda) {
  Vector r = k * x;
  const Vector mx = m * x;
  axpy(-lambda, mx, r);
  sub.project(r);
  return norm2(r);
}

SpectralResult lowest_pair(const SparseOperator& k, const SparseOperator& m, const Subspace& sub, const EigenOptions& opts,
                           std::mt19937_64& rng) {
  const auto n = static_cast<std::size_t>(k.dimension());
  std::vector<Vector> block;
  for (const auto& v : opts.initial)
    if (v.size() == n && static_cast<int>(block.size()) < kBlock) block.push_back(v);
  for (int j = static_cast<int>(block.size()); j < kBlock; ++j) {
    Vector v(n);
    for (auto& e : v) e = static_cast<double>(rng() >> 11) * 0x1.0p-53 - 0.5;
    block.push_back(std::move(v));
  }
  m_orthonormalize(block, m, sub);
  if (block.empty()) throw SolverError("admissible subspace is empty");

  SolveOptions inner{1e-11, 0, 1e-8};
  SpectralResult res;
  std::vector<double> theta(block.size(), 0.0);
  for (int it = 1; it <= opts.max_iterations; ++it) {
    std::vector<Vector> next;
    for (std::size_t j = 0; j < block.size(); ++j) {
      const Vector rhs = m * block[j];
      Vector guess = block[j];
      if (theta[j] > 0.0) scale(guess, 1.0 / theta[j]);
      next.push_back(solve_spd_projected(k, rhs, sub, inner, nullptr, it > 1 ? std::span<const double>(guess) : std::span<const double>{}));
    }
    m_orthonormalize(next, m, sub);
    if (next.empty()) throw SolverError("inverse iteration collapsed");
    const int p = static_cast<int>(next.size());
    std::vector<Vector> kn;
    for (const auto& y : next) kn.push_back(k * y);
    std::vector<double> h(static_cast<std::size_t>(p * p));
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j) h[static_cast<std::size_t>(i * p + j)] = 0.5 * (dot(next[static_cast<std::size_t>(i)], kn[static_cast<std::size_t>(j)]) + dot(next[static_cast<std::size_t>(j)], kn[static_cast<std::size_t>(i)]));
    std::vector<double> vecs;
    theta = small_symmetric_eigen(h, p, vecs);
    block.assign(static_cast<std::size_t>(p), Vector(n, 0.0));
    for (int c = 0; c < p; ++c)
      for (int r = 0; r < p; ++r) axpy(vecs[static_cast<std::size_t>(r * p + c)], next[static_cast<std::size_t>(r)], block[static_cast<std::size_t>(c)]);

    const Vector& x = block.front();
    const double lambda = k.quadratic_form(x) / m.quadratic_form(x);
    const double r = residual_norm(k, m, sub, x, lambda);
    res.residual_history.push_back(r);
    if (r <= opts.tol && it >= opts.min_iterations) {
      res.eigenvalue = lambda;
      res.eigenfunction = x;
      res.residual = r;
      res.iterations = it;
      return res;
    }
  }
  std::ostringstream os;
  os << "eigen solver did not converge after " << opts.max_iterations << " iterations; last residuals:";
  const std::size_t h = res.residual_history.size();
  for (std::size_t i = h > 5 ? h - 5 : 0; i < h; ++i) os << ' ' << res.residual_history[i];
  throw SolverError(os.str());
}

}  // namespace

SpectralResult eig_smallest(const SparseOperator& stiffness, const SparseOperator& mass, const EigenOptions& opts) {
  const int n = stiffness.dimension();
  if (mass.dimension() != n) throw std::invalid_argument("stiffness and mass dimensions differ");
  std::vector<Vector> constraints = opts.constraints;
  int skip = opts.skip;
  std::mt19937_64 rng(opts.seed);

  bool any_fixed = false;
  for (bool f : opts.fixed_zero) any_fixed = any_fixed || f;
  bool constants_admissible = !any_fixed && annihilates_constants(stiffness);
  for (const auto& c : constraints) {
    double s = 0.0;
    double a = 0.0;
    for (double v : c) {
      s += v;
      a += std::abs(v);
    }
    if (std::abs(s) > 1e-12 * a) constants_admissible = false;
  }

  const Vector ones(static_cast<std::size_t>(n), 1.0);
  if (constants_admissible) {
    // K has exactly the constants as kernel on a connected mesh
    if (skip == 0) {
      SpectralResult res;
      res.eigenfunction = ones;
      scale(res.eigenfunction, 1.0 / std::sqrt(mass.quadratic_form(ones)));
      const Subspace sub(n, opts.fixed_zero, constraints);
      res.residual = residual_norm(stiffness, mass, sub, res.eigenfunction, 0.0);
      res.residual_history = {res.residual};
      if (res.residual > opts.tol) throw SolverError("stiffness does not annihilate constants");
      return res;
    }
    constraints.push_back(mass * ones);
    --skip;
  }

  for (;;) {
    const Subspace sub(n, opts.fixed_zero, constraints);
    SpectralResult res = lowest_pair(stiffness, mass, sub, opts, rng);
    if (skip == 0) return res;
    constraints.push_back(mass * res.eigenfunction);
    --skip;
  }
}

SpectralResult eig_smallest(const Discretization& disc, std::vector<Vector> constraints, bool dirichlet, int skip) {
  EigenOptions opts;
  opts.constraints = std::move(constraints);
  if (dirichlet) opts.fixed_zero = disc.on_boundary;
  opts.skip = skip;
  return eig_smallest(disc.stiffness, disc.mass, opts);
}

}  // namespace insulab
