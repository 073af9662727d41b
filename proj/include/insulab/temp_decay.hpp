#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "insulab/eigen_solver.hpp"
#include "insulab/heat_content.hpp"

namespace insulab::decay {

using heat::BoundaryTrace;
using heat::IterationRecord;
using heat::StagnationError;
using heat::VanishingSet;

/// First Dirichlet eigenpair.
SpectralResult eig_dirichlet(const Discretization& disc);
/// First nonzero Neumann eigenpair (constants deflated).
SpectralResult eig_neumann2(const Discretization& disc);
/// Smallest eigenpair on fields with zero boundary integral.
SpectralResult eig_kappa1(const Discretization& disc);

/// [u^T K u + (1/m)(int_boundary |u|)^2] / u^T M u
double decay_quotient(const Discretization& disc, std::span<const double> u, double m);
double decay_quotient_regularized(const Discretization& disc, std::span<const double> u, double m, double delta);
/// Quotient of the constant field: P^2 / (m |Omega|).
double constant_trial_bound(const Discretization& disc, double m);

struct DecayOptions {
  std::vector<double> schedule = heat::default_delta_schedule();
  double damping = 0.5;
  double objective_tol = 1e-10;
  double step_tol = 1e-4;  ///< loose: minimisers may form flat families
  int max_iterations = 20000;  ///< per delta level
  double vanishing_tol = 1e-3;
  std::optional<ScalarField> initial;
  /// Symmetry-breaking direction added to the constant start; defaults to a
  /// tilted linear coordinate field.
  std::optional<ScalarField> perturbation;
  double perturbation_amplitude = 0.5;
  /// Extra admissible fields; the result is never worse than any of them.
  std::vector<ScalarField> candidates;
};

struct DecayMinimizerResult {
  double m = 0.0;
  double lambda_m = 0.0;  ///< quotient of u, unregularised
  ScalarField u;          ///< |u|_M = 1, sign-normalised
  BoundaryTrace trace;
  VanishingSet vanishing;
  double min_trace = 0.0;
  std::vector<double> schedule;
  std::vector<IterationRecord> log;
  std::string source;  ///< "iterate", "refined", "constant" or "candidate"
  int refine_iterations = 0;
  bool refine_converged = false;
};

struct RefineResult {
  ScalarField u;
  double lambda = 0.0;
  int iterations = 0;
  bool converged = false;     ///< zero set stopped changing
  double kkt_violation = 0.0; ///< of the best iterate when not converged
};

/// Minimises u^T Q u / u^T M u, Q = K + (1/m) b b^T, over fields that are
/// nonnegative on the boundary. Each step solves the eigenproblem with u = 0
/// on the current boundary zero set, then releases vertices with a negative
/// multiplier and adds vertices where u went negative. The start field's zero
/// set (|u| <= zero_tol * max) seeds the iteration.
RefineResult active_set_refine(const Discretization& disc, double m, std::span<const double> start, double zero_tol = 1e-3,
                               int max_iterations = 30);

DecayMinimizerResult minimize_lambda_m(const Discretization& disc, double m, const DecayOptions& opts = {});

class BracketError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BracketStep {
  double lo = 0.0;
  double hi = 0.0;
  double m = 0.0;
  double lambda_m = 0.0;
};

struct M0Report {
  double m0 = 0.0;
  double kappa1 = 0.0;
  double mu2 = 0.0;
  double lambda_d = 0.0;
  double tol = 0.0;
  double h = 0.0;
  std::vector<BracketStep> history;
  // filled by threshold_m0_pair
  std::optional<double> m0_refined;
  std::optional<double> kappa1_refined;
  std::optional<double> mu2_refined;
  std::optional<double> lambda_d_refined;
  std::optional<double> h_refined;
};

/// Root of m -> lambda_m - kappa1 by bisection in log m; stops once the
/// bracket is narrower than tol * m0.
M0Report threshold_m0(const Discretization& disc, double tol = 1e-3, const DecayOptions& opts = {});
/// threshold_m0 on the mesh and on one refinement of it.
M0Report threshold_m0_pair(const TriMesh& mesh, double tol = 1e-3, const DecayOptions& opts = {});

struct ScanRow {
  double m = 0.0;
  double lambda_m = 0.0;
  double vanish_measure = 0.0;
  double min_trace = 0.0;
};

/// One minimisation per grid value, run on `jobs` threads. Rows come back in
/// grid order and lambda_m is nonincreasing in m.
std::vector<ScanRow> breaking_scan(const Discretization& disc, const std::vector<double>& grid, int jobs = 1,
                                   const DecayOptions& opts = {}, std::vector<DecayMinimizerResult>* details = nullptr);

}  // namespace insulab::decay
