#pragma once

#include <span>
#include <vector>

#include "insulab/geometry.hpp"
#include "insulab/sparse.hpp"

namespace insulab {

class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exact P1 stiffness matrix: x^T K x = integral of |grad x|^2.
SparseOperator assemble_stiffness(const TriMesh& mesh);
/// Consistent P1 mass matrix: x^T M x = integral of x^2.
SparseOperator assemble_mass(const TriMesh& mesh);

struct BoundaryOperators {
  ScalarField b;       ///< b_i = boundary integral of phi_i
  SparseOperator mass; ///< 1D boundary mass matrix
};
BoundaryOperators assemble_boundary(const TriMesh& mesh);
/// b restricted to one boundary component.
ScalarField boundary_load(const TriMesh& mesh, int component);

/// All discrete operators of one mesh, assembled once and shared read-only.
struct Discretization {
  explicit Discretization(const TriMesh& mesh);

  const TriMesh& mesh;
  SparseOperator stiffness;
  SparseOperator mass;
  SparseOperator boundary_mass;
  ScalarField boundary_weights;  ///< b
  ScalarField volume_weights;    ///< M * 1, so integral of x = volume_weights . x
  std::vector<bool> on_boundary;
  std::vector<int> boundary_vertices;
  double area = 0.0;       ///< from triangle areas
  double perimeter = 0.0;  ///< from boundary edge lengths

  double integral(std::span<const double> x) const;           ///< over the domain
  double boundary_integral(std::span<const double> x) const;  ///< lumped, exact for P1 traces of one sign
  double l2_norm(std::span<const double> x) const;
  double min_on_boundary(std::span<const double> x) const;
  double max_abs_on_boundary(std::span<const double> x) const;
};

/// Nodal interpolant of f.
template <class F>
ScalarField interpolate(const TriMesh& mesh, F&& f) {
  ScalarField u(mesh.vertices.size());
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = f(mesh.vertices[i].x, mesh.vertices[i].y);
  return u;
}

/// Zero-mean solution of -Lap u = f, du/dn = g_c on component c, with
/// constant data. Requires f |Omega| + sum_c g_c P_c = 0.
ScalarField neumann_poisson(const Discretization& disc, double f, std::span<const double> flux_per_component,
                            const SolveOptions& opts = {});

/// Solution of -Lap u = f with u = 0 on the boundary, constant f.
ScalarField dirichlet_poisson(const Discretization& disc, double f, const SolveOptions& opts = {});

}  // namespace insulab
