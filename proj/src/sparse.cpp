#include "insulab/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace insulab {

SparseOperator SparseOperator::from_triplets(int dimension, std::vector<Triplet> entries) {
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  SparseOperator op;
  op.n_ = dimension;
  op.row_ptr_.assign(static_cast<std::size_t>(dimension) + 1, 0);
  op.cols_.reserve(entries.size());
  op.values_.reserve(entries.size());
  int last_row = -1;
  int last_col = -1;
  for (const auto& t : entries) {
    if (t.row < 0 || t.row >= dimension || t.col < 0 || t.col >= dimension) throw std::out_of_range("triplet index outside operator");
    if (t.row == last_row && t.col == last_col) {
      op.values_.back() += t.value;
      continue;
    }
    op.cols_.push_back(t.col);
    op.values_.push_back(t.value);
    ++op.row_ptr_[static_cast<std::size_t>(t.row) + 1];
    last_row = t.row;
    last_col = t.col;
  }
  for (int i = 0; i < dimension; ++i) op.row_ptr_[static_cast<std::size_t>(i) + 1] += op.row_ptr_[static_cast<std::size_t>(i)];
  return op;
}

void SparseOperator::multiply(std::span<const double> x, std::span<double> y) const {
  for (int i = 0; i < n_; ++i) {
    double s = 0.0;
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      s += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
    y[static_cast<std::size_t>(i)] = s;
  }
}

Vector SparseOperator::operator*(std::span<const double> x) const {
  Vector y(static_cast<std::size_t>(n_));
  multiply(x, y);
  return y;
}

double SparseOperator::quadratic_form(std::span<const double> x) const {
  double s = 0.0;
  for (int i = 0; i < n_; ++i) {
    double row = 0.0;
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      row += values_[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(cols_[static_cast<std::size_t>(k)])];
    s += x[static_cast<std::size_t>(i)] * row;
  }
  return s;
}

double SparseOperator::at(int row, int col) const {
  const auto begin = cols_.begin() + row_ptr_[static_cast<std::size_t>(row)];
  const auto end = cols_.begin() + row_ptr_[static_cast<std::size_t>(row) + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

Vector SparseOperator::diagonal() const {
  Vector d(static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) d[static_cast<std::size_t>(i)] = at(i, i);
  return d;
}

SparseOperator SparseOperator::plus_diagonal(std::span<const double> diag) const {
  if (static_cast<int>(diag.size()) != n_) throw std::invalid_argument("diagonal length differs from dimension");
  SparseOperator out = *this;
  bool complete = true;
  for (int i = 0; i < n_ && complete; ++i) {
    bool found = false;
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      if (cols_[static_cast<std::size_t>(k)] == i) {
        out.values_[static_cast<std::size_t>(k)] += diag[static_cast<std::size_t>(i)];
        found = true;
        break;
      }
    complete = found;
  }
  if (complete) return out;
  std::vector<Triplet> t;
  t.reserve(values_.size() + static_cast<std::size_t>(n_));
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      t.push_back({i, cols_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]});
    if (diag[static_cast<std::size_t>(i)] != 0.0) t.push_back({i, i, diag[static_cast<std::size_t>(i)]});
  }
  return from_triplets(n_, std::move(t));
}

SparseOperator SparseOperator::plus_scaled(const SparseOperator& other, double s) const {
  if (other.n_ != n_) throw std::invalid_argument("operator dimensions differ");
  std::vector<Triplet> t;
  t.reserve(values_.size() + other.values_.size());
  for (int i = 0; i < n_; ++i) {
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      t.push_back({i, cols_[static_cast<std::size_t>(k)], values_[static_cast<std::size_t>(k)]});
    for (int k = other.row_ptr_[static_cast<std::size_t>(i)]; k < other.row_ptr_[static_cast<std::size_t>(i) + 1]; ++k)
      t.push_back({i, other.cols_[static_cast<std::size_t>(k)], s * other.values_[static_cast<std::size_t>(k)]});
  }
  return from_triplets(n_, std::move(t));
}

double SparseOperator::asymmetry() const {
  double worst = 0.0;
  double biggest = 0.0;
  for (int i = 0; i < n_; ++i)
    for (int k = row_ptr_[static_cast<std::size_t>(i)]; k < row_ptr_[static_cast<std::size_t>(i) + 1]; ++k) {
      const double v = values_[static_cast<std::size_t>(k)];
      biggest = std::max(biggest, std::abs(v));
      worst = std::max(worst, std::abs(v - at(cols_[static_cast<std::size_t>(k)], i)));
    }
  return biggest > 0.0 ? worst / biggest : 0.0;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double a, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += a * x[i];
}

void scale(std::span<double> x, double a) {
  for (auto& v : x) v *= a;
}

Subspace::Subspace(int dimension, std::vector<bool> fixed_zero, std::vector<Vector> constraints)
    : n_(dimension), fixed_(std::move(fixed_zero)) {
  if (!fixed_.empty() && static_cast<int>(fixed_.size()) != n_) throw std::invalid_argument("mask size mismatch");
  for (auto c : constraints) {
    if (static_cast<int>(c.size()) != n_) throw std::invalid_argument("constraint size mismatch");
    if (!fixed_.empty())
      for (std::size_t i = 0; i < c.size(); ++i)
        if (fixed_[i]) c[i] = 0.0;
    const double original = norm2(c);
    // two passes of Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& q : basis_) axpy(-dot(q, c), q, c);
    const double nrm = norm2(c);
    if (original == 0.0 || nrm <= 1e-12 * original) continue;  // already implied
    scale(c, 1.0 / nrm);
    basis_.push_back(std::move(c));
  }
}

void Subspace::project(std::span<double> x) const {
  if (!fixed_.empty())
    for (std::size_t i = 0; i < x.size(); ++i)
      if (fixed_[i]) x[i] = 0.0;
  for (const auto& q : basis_) axpy(-dot(q, x), q, x);
}

bool annihilates_constants(const SparseOperator& a) {
  const Vector ones(static_cast<std::size_t>(a.dimension()), 1.0);
  const Vector r = a * ones;
  const Vector d = a.diagonal();
  double dmax = 0.0;
  for (double v : d) dmax = std::max(dmax, std::abs(v));
  double rmax = 0.0;
  for (double v : r) rmax = std::max(rmax, std::abs(v));
  return dmax > 0.0 && rmax <= 1e-12 * dmax;
}

Vector solve_spd_projected(const SparseOperator& a, std::span<const double> rhs, const Subspace& subspace,
                           const SolveOptions& opts, SolveReport* report, std::span<const double> initial) {
  const auto n = static_cast<std::size_t>(a.dimension());
  if (rhs.size() != n) throw std::invalid_argument("rhs size mismatch");
  const int max_it = opts.max_iterations > 0 ? opts.max_iterations : 10 * static_cast<int>(n) + 100;

  Vector b(rhs.begin(), rhs.end());
  subspace.project(b);
  const double bnorm = norm2(b);
  Vector x(n, 0.0);
  if (bnorm == 0.0) {
    if (report) *report = {0, 0.0};
    return x;
  }
  if (!initial.empty()) {
    x.assign(initial.begin(), initial.end());
    subspace.project(x);
  }

  Vector inv_diag = a.diagonal();
  for (auto& v : inv_diag) v = v > 0.0 ? 1.0 / v : 1.0;

  Vector r(n), z(n), p(n), ap(n);
  auto residual = [&]() {
    a.multiply(x, r);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - r[i];
    subspace.project(r);
  };
  auto precondition = [&]() {
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag[i] * r[i];
    subspace.project(z);
  };

  residual();
  double rnorm = norm2(r);
  const double target = opts.tol * bnorm;
  int it = 0;
  int restarts = 0;
  while (rnorm > target && it < max_it && restarts <= 8) {
    precondition();
    p = z;
    double rz = dot(r, z);
    while (++it <= max_it) {
      a.multiply(p, ap);
      subspace.project(ap);
      const double pap = dot(p, ap);
      if (!(pap > 0.0)) break;
      const double alpha = rz / pap;
      axpy(alpha, p, x);
      axpy(-alpha, ap, r);
      if (norm2(r) <= target) break;
      precondition();
      const double rz_new = dot(r, z);
      const double beta = rz_new / rz;
      rz = rz_new;
      for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    // the recursive residual drifts from the true one; verify and restart
    residual();
    const double previous = rnorm;
    rnorm = norm2(r);
    if (!(rnorm < previous)) break;
    ++restarts;
  }
  if (report) *report = {it, rnorm / bnorm};
  if (!(rnorm <= std::max(target, opts.accept_tol * bnorm))) {
    std::ostringstream os;
    os << "conjugate gradients did not converge: relative residual " << rnorm / bnorm << " after " << it
       << " iterations (target " << opts.tol << ")";
    throw SolverError(os.str());
  }
  return x;
}

Vector solve_spd(const SparseOperator& a, std::span<const double> rhs, const SolveOptions& opts, SolveReport* report,
                 std::span<const double> initial) {
  const auto n = static_cast<std::size_t>(a.dimension());
  if (!annihilates_constants(a)) return solve_spd_projected(a, rhs, Subspace{}, opts, report, initial);

  double sum = 0.0;
  double abs_sum = 0.0;
  for (double v : rhs) {
    sum += v;
    abs_sum += std::abs(v);
  }
  if (std::abs(sum) > std::max(opts.tol, 1e-13) * abs_sum) {
    std::ostringstream os;
    os << "incompatible right-hand side for a singular (pure Neumann) operator: sum of entries " << sum
       << " is not zero relative to " << abs_sum;
    throw SolverError(os.str());
  }
  const Subspace zero_mean(a.dimension(), {}, {Vector(n, 1.0)});
  return solve_spd_projected(a, rhs, zero_mean, opts, report, initial);
}

}  // namespace insulab
