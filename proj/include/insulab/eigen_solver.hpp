#pragma once

#include <cstdint>
#include <vector>

#include "insulab/fem.hpp"
#include "insulab/sparse.hpp"

namespace insulab {

struct SpectralResult {
  double eigenvalue = 0.0;
  ScalarField eigenfunction;  ///< M-normalised
  double residual = 0.0;      ///< |P (K x - lambda M x)| with |x|_M = 1
  int iterations = 0;
  std::vector<double> residual_history;
};

struct EigenOptions {
  /// Admissible space is {x : c^T x = 0 for every constraint c}.
  std::vector<Vector> constraints;
  /// Entries forced to zero (Dirichlet vertices); empty for none.
  std::vector<bool> fixed_zero;
  /// Number of lowest admissible eigenpairs to deflate before returning.
  int skip = 0;
  double tol = 1e-8;
  int max_iterations = 20000;
  /// Convergence is not declared before this many block iterations, so an
  /// exact but non-minimal start vector cannot end the search early.
  int min_iterations = 8;
  std::uint64_t seed = 0;
  /// Optional start vectors; random vectors fill the rest of the block.
  std::vector<Vector> initial;
};

/// Smallest admissible eigenpair of K x = lambda M x by inverse iteration with
/// projection onto the constrained subspace and M-orthogonal deflation.
/// Throws SolverError when the residual target is not reached.
SpectralResult eig_smallest(const SparseOperator& stiffness, const SparseOperator& mass, const EigenOptions& opts);

/// Convenience form on an assembled mesh; `dirichlet` fixes boundary vertices.
SpectralResult eig_smallest(const Discretization& disc, std::vector<Vector> constraints, bool dirichlet, int skip);

}  // namespace insulab
