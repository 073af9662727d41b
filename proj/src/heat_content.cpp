#include "insulab/heat_content.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

namespace insulab::heat {

namespace {

double boundary_abs_integral(const Discretization& disc, std::span<const double> u) {
  double s = 0.0;
  for (int i : disc.boundary_vertices) s += disc.boundary_weights[static_cast<std::size_t>(i)] * std::abs(u[static_cast<std::size_t>(i)]);
  return s;
}

double boundary_reg_integral(const Discretization& disc, std::span<const double> u, double delta) {
  double s = 0.0;
  for (int i : disc.boundary_vertices) {
    const double v = u[static_cast<std::size_t>(i)];
    s += disc.boundary_weights[static_cast<std::size_t>(i)] * std::sqrt(v * v + delta * delta);
  }
  return s;
}

void check_field(const Discretization& disc, std::span<const double> u) {
  if (u.size() != disc.mesh.vertices.size()) throw std::invalid_argument("field length differs from the vertex count");
}

double edge_length(const TriMesh& mesh, const BoundaryEdge& e) {
  const Point& a = mesh.vertices[static_cast<std::size_t>(e.v[0])];
  const Point& b = mesh.vertices[static_cast<std::size_t>(e.v[1])];
  return std::hypot(b.x - a.x, b.y - a.y);
}

}  // namespace

std::vector<double> default_delta_schedule() { return {1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6}; }

VanishingSet vanishing_set(const Discretization& disc, std::span<const double> u, double tol_rel) {
  check_field(disc, u);
  const double cut = tol_rel * disc.max_abs_on_boundary(u);
  VanishingSet vs;
  const auto& edges = disc.mesh.boundary_edges;
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& e = edges[k];
    if (std::abs(u[static_cast<std::size_t>(e.v[0])]) <= cut && std::abs(u[static_cast<std::size_t>(e.v[1])]) <= cut) {
      vs.edges.push_back(static_cast<int>(k));
      vs.measure += edge_length(disc.mesh, e);
    }
  }
  return vs;
}

BoundaryTrace boundary_trace(const Discretization& disc, std::span<const double> u) {
  check_field(disc, u);
  BoundaryTrace t;
  t.reserve(disc.boundary_vertices.size());
  for (int i : disc.boundary_vertices) t.emplace_back(i, u[static_cast<std::size_t>(i)]);
  return t;
}

double heat_functional(const Discretization& disc, std::span<const double> u, double m) {
  check_field(disc, u);
  const double s = boundary_abs_integral(disc, u);
  return disc.stiffness.quadratic_form(u) + s * s / m;
}

double heat_functional_regularized(const Discretization& disc, std::span<const double> u, double m, double delta) {
  check_field(disc, u);
  const double s = boundary_reg_integral(disc, u, delta);
  return disc.stiffness.quadratic_form(u) + s * s / m;
}

ScalarField solve_u0(const Discretization& disc) {
  const std::vector<double> flux(static_cast<std::size_t>(disc.mesh.num_components()), -disc.area / disc.perimeter);
  return neumann_poisson(disc, 1.0, flux, SolveOptions{1e-11, 0});
}

double delta_omega(const Discretization& disc, std::span<const double> u0) {
  check_field(disc, u0);
  return disc.boundary_integral(u0) / disc.perimeter - disc.min_on_boundary(u0);
}

M1Report threshold_m1(const TriMesh& mesh) {
  M1Report r;
  {
    const Discretization disc(mesh);
    const ScalarField u0 = solve_u0(disc);
    r.perimeter = disc.perimeter;
    r.area = disc.area;
    r.boundary_mean = disc.boundary_integral(u0) / disc.perimeter;
    r.boundary_min = disc.min_on_boundary(u0);
    r.delta = r.boundary_mean - r.boundary_min;
    r.m1 = r.delta * r.perimeter * r.perimeter / r.area;
    r.h = max_edge_length(mesh);
  }
  const TriMesh fine = refine(mesh);
  const Discretization disc(fine);
  const ScalarField u0 = solve_u0(disc);
  r.delta_refined = delta_omega(disc, u0);
  r.m1_refined = r.delta_refined * disc.perimeter * disc.perimeter / disc.area;
  r.h_refined = max_edge_length(fine);
  r.m1_extrapolated = r.m1_refined + (r.m1_refined - r.m1) / 3.0;
  return r;
}

LinearCandidate linear_candidate(const Discretization& disc, std::span<const double> u0, double m) {
  check_field(disc, u0);
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  const double shift = m * disc.area / (disc.perimeter * disc.perimeter) - disc.boundary_integral(u0) / disc.perimeter;
  LinearCandidate c;
  c.u.assign(u0.begin(), u0.end());
  for (auto& v : c.u) v += shift;
  c.boundary_min = disc.min_on_boundary(c.u);
  return c;
}

LinearCandidate linear_candidate(const Discretization& disc, double m) { return linear_candidate(disc, solve_u0(disc), m); }

double certificate_margin(const Discretization& disc, std::span<const double> u, std::span<const double> v, double m) {
  return heat_functional(disc, v, m) - heat_functional(disc, u, m);
}

Certificate certify_minimizer(const Discretization& disc, std::span<const double> u, double m, int trials, std::uint64_t seed) {
  check_field(disc, u);
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  double umax = 0.0;
  for (double v : u) umax = std::max(umax, std::abs(v));
  const double bmin = disc.min_on_boundary(u);
  if (bmin < -1e-10 * umax) {
    std::ostringstream os;
    os << "certificate needs a nonnegative boundary trace; minimum is " << bmin;
    throw InapplicableCertificate(os.str());
  }
  Certificate c;
  c.objective = heat_functional(disc, u, m);
  c.trials = trials;
  c.worst_margin = 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> expo(-4.0, 0.0);
  const auto& verts = disc.mesh.vertices;
  const std::size_t n = u.size();
  bool first = true;
  for (int t = 0; t < trials; ++t) {
    ScalarField xi(n);
    if (t % 2 == 0) {
      for (auto& v : xi) v = unit(rng);
    } else {
      double c0[6];
      for (double& cc : c0) cc = unit(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double x = verts[i].x;
        const double y = verts[i].y;
        xi[i] = c0[0] * x + c0[1] * y + c0[2] * x * x + c0[3] * x * y + c0[4] * y * y + c0[5] * std::sin(3.0 * x + 2.0 * y);
      }
    }
    const double shift = disc.integral(xi) / disc.area;
    for (auto& v : xi) v -= shift;
    double ximax = 0.0;
    for (double v : xi) ximax = std::max(ximax, std::abs(v));
    const double eps = std::pow(10.0, expo(rng)) * std::max(umax, 1e-300) / std::max(ximax, 1e-300);
    ScalarField v(u.begin(), u.end());
    axpy(eps, xi, v);
    const double margin = heat_functional(disc, v, m) - c.objective;
    if (first || margin < c.worst_margin) c.worst_margin = margin;
    first = false;
  }
  c.passed = c.worst_margin >= -1e-12 * std::abs(c.objective);
  return c;
}

HeatMinimizerResult minimize_heat_content(const Discretization& disc, double m, const HeatOptions& opts) {
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  if (opts.schedule.empty()) throw std::invalid_argument("delta schedule is empty");
  for (std::size_t k = 0; k < opts.schedule.size(); ++k) {
    if (!(opts.schedule[k] > 0.0)) throw std::invalid_argument("delta values must be positive");
    if (k > 0 && !(opts.schedule[k] < opts.schedule[k - 1])) throw std::invalid_argument("delta schedule must be strictly decreasing");
  }
  if (!(opts.damping > 0.0 && opts.damping < 1.0)) throw std::invalid_argument("damping must lie in (0, 1)");
  const std::size_t n = disc.mesh.vertices.size();
  const ScalarField& e = disc.volume_weights;
  const ScalarField& b = disc.boundary_weights;

  ScalarField u = opts.initial ? *opts.initial : ScalarField(n, 1.0 / disc.area);
  check_field(disc, u);
  {
    const double mass = dot(e, u);
    if (!(mass > 0.0)) throw std::invalid_argument("initial field must have positive integral");
    scale(u, 1.0 / mass);
  }

  HeatMinimizerResult res;
  res.m = m;
  res.schedule = opts.schedule;
  const SolveOptions inner{1e-11, 0, 1e-7};
  double objective = 0.0;
  for (double delta : opts.schedule) {
    IterationRecord rec;
    rec.delta = delta;
    objective = heat_functional_regularized(disc, u, m, delta);
    bool converged = false;
    std::vector<double> recent;
    for (int it = 1; it <= opts.max_iterations; ++it) {
      // Robin-type majoriser of (S_delta)^2 at u
      const double s = boundary_reg_integral(disc, u, delta);
      ScalarField d(n, 0.0);
      for (int i : disc.boundary_vertices) {
        const auto ii = static_cast<std::size_t>(i);
        d[ii] = s / m * b[ii] / std::sqrt(u[ii] * u[ii] + delta * delta);
      }
      const SparseOperator a = disc.stiffness.plus_diagonal(d);
      ScalarField guess = u;
      scale(guess, dot(e, u) / a.quadratic_form(u));
      ScalarField x = solve_spd(a, e, inner, nullptr, guess);
      scale(x, 1.0 / dot(e, x));

      double theta = 1.0;
      ScalarField y = x;
      double fy = heat_functional_regularized(disc, y, m, delta);
      int halvings = 0;
      while (fy > objective && halvings < 40) {
        theta *= opts.damping;
        ++halvings;
        for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + theta * (x[i] - u[i]);
        fy = heat_functional_regularized(disc, y, m, delta);
      }
      if (halvings > 0) ++rec.damped_steps;
      recent.push_back(fy);
      if (recent.size() > 8) recent.erase(recent.begin());
      if (fy > objective) {
        if (fy - objective <= 1e-13 * std::abs(objective)) {
          rec.iterations = it;
          converged = true;
          break;
        }
        std::ostringstream os;
        os << "heat-content iteration stagnated at delta=" << delta << " iteration " << it << "; recent objectives:";
        for (double v : recent) os << ' ' << v;
        throw StagnationError(os.str());
      }
      ScalarField diff = y;
      axpy(-1.0, u, diff);
      const double step = disc.l2_norm(diff) / disc.l2_norm(y);
      const double change = (objective - fy) / std::abs(objective);
      u = std::move(y);
      objective = fy;
      rec.iterations = it;
      if (change < opts.objective_tol && step < opts.step_tol) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "heat-content iteration did not converge at delta=" << delta << " within " << opts.max_iterations
         << " iterations; recent objectives:";
      for (double v : recent) os << ' ' << v;
      throw StagnationError(os.str());
    }
    rec.objective = objective;
    res.log.push_back(rec);
  }
  res.u = std::move(u);
  res.regularized_objective = objective;
  res.objective = heat_functional(disc, res.u, m);
  res.trace = boundary_trace(disc, res.u);
  res.vanishing = vanishing_set(disc, res.u, opts.vanishing_tol);
  return res;
}

ScalarField material_distribution(const Discretization& disc, std::span<const double> u, double m) {
  check_field(disc, u);
  const double s = boundary_abs_integral(disc, u);
  if (!(s > 0.0)) throw std::domain_error("insulation density is undefined for a vanishing boundary trace");
  ScalarField h(u.size(), 0.0);
  for (int i : disc.boundary_vertices) h[static_cast<std::size_t>(i)] = m * std::abs(u[static_cast<std::size_t>(i)]) / s;
  return h;
}

TorsionPrediction torsion_predictor(const Discretization& disc, double tol_loc) {
  const TriMesh& mesh = disc.mesh;
  TorsionPrediction tp;
  tp.torsion = dirichlet_poisson(disc, 1.0, SolveOptions{1e-11, 0});

  std::map<std::pair<int, int>, int> owner;
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    owner[{std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])}] = -1;
  }
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    for (int j = 0; j < 3; ++j) {
      const int a = tri[static_cast<std::size_t>(j)];
      const int c = tri[static_cast<std::size_t>((j + 1) % 3)];
      auto it = owner.find({std::min(a, c), std::max(a, c)});
      if (it != owner.end()) it->second = static_cast<int>(t);
    }
  }

  const auto& u = tp.torsion;
  tp.edge_flux.resize(mesh.boundary_edges.size());
  for (std::size_t k = 0; k < mesh.boundary_edges.size(); ++k) {
    const auto& e = mesh.boundary_edges[k];
    const auto& tri = mesh.triangles[static_cast<std::size_t>(owner.at({std::min(e.v[0], e.v[1]), std::max(e.v[0], e.v[1])}))];
    const Point& p0 = mesh.vertices[static_cast<std::size_t>(tri[0])];
    const Point& p1 = mesh.vertices[static_cast<std::size_t>(tri[1])];
    const Point& p2 = mesh.vertices[static_cast<std::size_t>(tri[2])];
    const double twice = 2.0 * signed_area(p0, p1, p2);
    const double u0 = u[static_cast<std::size_t>(tri[0])];
    const double u1 = u[static_cast<std::size_t>(tri[1])];
    const double u2 = u[static_cast<std::size_t>(tri[2])];
    const double gx = (u0 * (p1.y - p2.y) + u1 * (p2.y - p0.y) + u2 * (p0.y - p1.y)) / twice;
    const double gy = (u0 * (p2.x - p1.x) + u1 * (p0.x - p2.x) + u2 * (p1.x - p0.x)) / twice;
    const Point& a = mesh.vertices[static_cast<std::size_t>(e.v[0])];
    const Point& c = mesh.vertices[static_cast<std::size_t>(e.v[1])];
    const double len = std::hypot(c.x - a.x, c.y - a.y);
    const double nx = (c.y - a.y) / len;
    const double ny = -(c.x - a.x) / len;
    tp.edge_flux[k] = std::abs(gx * nx + gy * ny);
    if (tp.argmax_edge < 0 || tp.edge_flux[k] > tp.max_flux) {
      tp.max_flux = tp.edge_flux[k];
      tp.argmax_edge = static_cast<int>(k);
      tp.argmax_point = {0.5 * (a.x + c.x), 0.5 * (a.y + c.y)};
    }
  }

  const double cut = (1.0 - tol_loc) * tp.max_flux;
  std::vector<bool> near(mesh.boundary_edges.size(), false);
  for (std::size_t k = 0; k < near.size(); ++k)
    if (tp.edge_flux[k] >= cut) {
      near[k] = true;
      tp.near_max_edges.push_back(static_cast<int>(k));
    }

  // edges are stored loop by loop, so runs are contiguous modulo wrap-around
  std::size_t start = 0;
  while (start < near.size()) {
    const int comp = mesh.boundary_edges[start].component;
    std::size_t stop = start;
    while (stop < near.size() && mesh.boundary_edges[stop].component == comp) ++stop;
    const std::size_t len = stop - start;
    std::size_t first_gap = len;
    for (std::size_t j = 0; j < len; ++j)
      if (!near[start + j]) {
        first_gap = j;
        break;
      }
    auto arc_from = [&](std::size_t j0, std::size_t count) {
      BoundaryArc arc;
      arc.component = comp;
      for (std::size_t j = 0; j < count; ++j) arc.length += edge_length(mesh, mesh.boundary_edges[start + (j0 + j) % len]);
      double walked = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        const auto& e = mesh.boundary_edges[start + (j0 + j) % len];
        const double l = edge_length(mesh, e);
        if (walked + l >= 0.5 * arc.length) {
          const double f = (0.5 * arc.length - walked) / l;
          const Point& a = mesh.vertices[static_cast<std::size_t>(e.v[0])];
          const Point& c = mesh.vertices[static_cast<std::size_t>(e.v[1])];
          arc.center = {a.x + f * (c.x - a.x), a.y + f * (c.y - a.y)};
          break;
        }
        walked += l;
      }
      tp.arcs.push_back(arc);
    };
    if (first_gap == len) {
      arc_from(0, len);
    } else {
      // walk once around the loop beginning just after a gap
      std::size_t j = first_gap;
      std::size_t visited = 0;
      while (visited < len) {
        while (visited < len && !near[start + j % len]) {
          ++j;
          ++visited;
        }
        if (visited >= len) break;
        const std::size_t j0 = j % len;
        std::size_t count = 0;
        while (visited < len && near[start + j % len]) {
          ++j;
          ++visited;
          ++count;
        }
        arc_from(j0, count);
      }
    }
    start = stop;
  }
  return tp;
}

}  // namespace insulab::heat
