#pragma once

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace insulab {

using Vector = std::vector<double>;

/// One value per mesh vertex.
using ScalarField = Vector;

struct Triplet {
  int row;
  int col;
  double value;
};

/// Square sparse matrix in compressed row storage.
class SparseOperator {
 public:
  SparseOperator() = default;
  /// Duplicate (row, col) entries are summed.
  static SparseOperator from_triplets(int dimension, std::vector<Triplet> entries);

  int dimension() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }

  void multiply(std::span<const double> x, std::span<double> y) const;
  Vector operator*(std::span<const double> x) const;
  double quadratic_form(std::span<const double> x) const;
  double at(int row, int col) const;
  Vector diagonal() const;

  /// A + s * D with D diagonal (same sparsity plus diagonal).
  SparseOperator plus_diagonal(std::span<const double> diag) const;
  /// A + s * B for operators with possibly different patterns.
  SparseOperator plus_scaled(const SparseOperator& other, double s) const;

  /// max |a_ij - a_ji| / max |a_ij|.
  double asymmetry() const;

  std::span<const int> row_ptr() const { return row_ptr_; }
  std::span<const int> cols() const { return cols_; }
  std::span<const double> values() const { return values_; }

 private:
  int n_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> cols_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += a * x
void axpy(double a, std::span<const double> x, std::span<double> y);
void scale(std::span<double> x, double a);

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolveOptions {
  double tol = 1e-10;  ///< relative residual target
  int max_iterations = 0;  ///< 0 selects 10 * dimension
  /// A missed target still returns when the residual is below this.
  double accept_tol = 0.0;
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
};

/// Restriction of R^n to the subspace {x : x_i = 0 on masked entries,
/// c^T x = 0 for each constraint c}. Constraints are orthonormalised on
/// construction.
class Subspace {
 public:
  Subspace() = default;
  Subspace(int dimension, std::vector<bool> fixed_zero, std::vector<Vector> constraints);

  int dimension() const { return n_; }
  bool trivial() const { return fixed_.empty() && basis_.empty(); }
  /// Orthogonal projection onto the subspace, in place.
  void project(std::span<double> x) const;
  const std::vector<Vector>& constraint_basis() const { return basis_; }
  const std::vector<bool>& fixed_zero() const { return fixed_; }

 private:
  int n_ = 0;
  std::vector<bool> fixed_;
  std::vector<Vector> basis_;
};

/// Preconditioned conjugate gradients for symmetric positive (semi)definite A.
/// When A annihilates constants (pure Neumann) the right-hand side must be
/// orthogonal to them; the returned solution then has zero Euclidean mean.
/// Throws SolverError on non-convergence or incompatible data.
Vector solve_spd(const SparseOperator& a, std::span<const double> rhs, const SolveOptions& opts = {},
                 SolveReport* report = nullptr, std::span<const double> initial = {});

/// CG on P A P restricted to a subspace; rhs is projected first.
Vector solve_spd_projected(const SparseOperator& a, std::span<const double> rhs, const Subspace& subspace,
                           const SolveOptions& opts = {}, SolveReport* report = nullptr,
                           std::span<const double> initial = {});

/// True when A * 1 vanishes relative to the diagonal scale.
bool annihilates_constants(const SparseOperator& a);

}  // namespace insulab
