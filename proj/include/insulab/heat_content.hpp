#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "insulab/fem.hpp"

namespace insulab::heat {

/// Boundary edges where the trace is numerically zero.
struct VanishingSet {
  std::vector<int> edges;  ///< indices into TriMesh::boundary_edges
  double measure = 0.0;    ///< summed edge length
};

/// Edges whose two endpoint values satisfy |u| <= tol_rel * max over the
/// boundary of |u|. A zero trace vanishes everywhere.
VanishingSet vanishing_set(const Discretization& disc, std::span<const double> u, double tol_rel = 1e-3);

using BoundaryTrace = std::vector<std::pair<int, double>>;  ///< (vertex id, value)
BoundaryTrace boundary_trace(const Discretization& disc, std::span<const double> u);

/// Continuation and fixed-point controls shared by both insulation problems.
struct IterationRecord {
  double delta = 0.0;
  int iterations = 0;
  double objective = 0.0;  ///< regularised objective at the end of this level
  int damped_steps = 0;
};

std::vector<double> default_delta_schedule();

class StagnationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InapplicableCertificate : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// T_m(u) = int |grad u|^2 + (1/m) (int_boundary |u|)^2.
double heat_functional(const Discretization& disc, std::span<const double> u, double m);
/// T_m with |u| replaced by sqrt(u^2 + delta^2) on the boundary.
double heat_functional_regularized(const Discretization& disc, std::span<const double> u, double m, double delta);

/// u0: zero-mean solution of -Lap u = 1, du/dn = -|Omega|/P.
ScalarField solve_u0(const Discretization& disc);

/// Boundary mean of u0 minus its minimum over boundary vertices.
double delta_omega(const Discretization& disc, std::span<const double> u0);

struct M1Report {
  double m1 = 0.0;
  double delta = 0.0;
  double perimeter = 0.0;
  double area = 0.0;
  double boundary_mean = 0.0;
  double boundary_min = 0.0;
  double h = 0.0;  ///< longest edge of the mesh
  double m1_refined = 0.0;
  double delta_refined = 0.0;
  double h_refined = 0.0;
  double m1_extrapolated = 0.0;  ///< Richardson, assuming O(h^2)
};

/// m1 = delta * P^2 / |Omega| on the mesh and on its refinement.
M1Report threshold_m1(const TriMesh& mesh);

struct LinearCandidate {
  ScalarField u;  ///< u0 + m |Omega| / P^2 - mean of u0 on the boundary
  double boundary_min = 0.0;
};
LinearCandidate linear_candidate(const Discretization& disc, std::span<const double> u0, double m);
LinearCandidate linear_candidate(const Discretization& disc, double m);

struct Certificate {
  bool passed = false;
  int trials = 0;
  double worst_margin = 0.0;  ///< min over trials of T_m(v) - T_m(u)
  double objective = 0.0;     ///< T_m(u)
};

/// T_m(v) - T_m(u).
double certificate_margin(const Discretization& disc, std::span<const double> u, std::span<const double> v, double m);

/// Compares T_m(u) against `trials` random fields with the same integral.
/// Throws InapplicableCertificate when u is negative on the boundary.
Certificate certify_minimizer(const Discretization& disc, std::span<const double> u, double m, int trials, std::uint64_t seed);

struct HeatOptions {
  std::vector<double> schedule = default_delta_schedule();
  double damping = 0.5;  ///< step reduction factor when a full step fails to decrease
  double objective_tol = 1e-10;
  double step_tol = 1e-10;
  int max_iterations = 20000;  ///< per delta level
  double vanishing_tol = 1e-3;
  std::optional<ScalarField> initial;  ///< defaults to the constant 1/|Omega|
};

struct HeatMinimizerResult {
  double m = 0.0;
  ScalarField u;  ///< integral 1
  double objective = 0.0;  ///< T_m(u)
  double regularized_objective = 0.0;
  BoundaryTrace trace;
  VanishingSet vanishing;
  std::vector<double> schedule;
  std::vector<IterationRecord> log;
};

HeatMinimizerResult minimize_heat_content(const Discretization& disc, double m, const HeatOptions& opts = {});

/// h_i = m |u_i| / int_boundary |u| at boundary vertices, zero elsewhere.
ScalarField material_distribution(const Discretization& disc, std::span<const double> u, double m);

struct BoundaryArc {
  int component = 0;
  Point center;  ///< point at half arclength
  double length = 0.0;
};

struct TorsionPrediction {
  ScalarField torsion;            ///< -Lap u = 1, u = 0 on the boundary
  std::vector<double> edge_flux;  ///< |du/dn| per boundary edge
  double max_flux = 0.0;
  int argmax_edge = -1;
  Point argmax_point;             ///< midpoint of argmax_edge
  std::vector<int> near_max_edges;  ///< flux >= (1 - tol_loc) * max
  std::vector<BoundaryArc> arcs;    ///< connected runs of near_max_edges
};

TorsionPrediction torsion_predictor(const Discretization& disc, double tol_loc = 0.05);

}  // namespace insulab::heat
