#include "insulab/fem.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace insulab {

namespace {

const Point& vtx(const TriMesh& mesh, int i) { return mesh.vertices[static_cast<std::size_t>(i)]; }

}  // namespace

SparseOperator assemble_stiffness(const TriMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const Point& p0 = vtx(mesh, tri[0]);
    const Point& p1 = vtx(mesh, tri[1]);
    const Point& p2 = vtx(mesh, tri[2]);
    const double area = signed_area(p0, p1, p2);
    // grad phi_i * 2A = (y_j - y_k, x_k - x_j), (i, j, k) cyclic
    const double gx[3] = {p1.y - p2.y, p2.y - p0.y, p0.y - p1.y};
    const double gy[3] = {p2.x - p1.x, p0.x - p2.x, p1.x - p0.x};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.push_back({tri[i], tri[j], (gx[i] * gx[j] + gy[i] * gy[j]) / (4.0 * area)});
  }
  return SparseOperator::from_triplets(static_cast<int>(mesh.vertices.size()), std::move(t));
}

SparseOperator assemble_mass(const TriMesh& mesh) {
  std::vector<Triplet> t;
  t.reserve(mesh.triangles.size() * 9);
  for (const auto& tri : mesh.triangles) {
    const double area = signed_area(vtx(mesh, tri[0]), vtx(mesh, tri[1]), vtx(mesh, tri[2]));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) t.push_back({tri[i], tri[j], area / 12.0 * (i == j ? 2.0 : 1.0)});
  }
  return SparseOperator::from_triplets(static_cast<int>(mesh.vertices.size()), std::move(t));
}

BoundaryOperators assemble_boundary(const TriMesh& mesh) {
  BoundaryOperators out;
  out.b.assign(mesh.vertices.size(), 0.0);
  std::vector<Triplet> t;
  t.reserve(mesh.boundary_edges.size() * 4);
  for (const auto& e : mesh.boundary_edges) {
    const Point& a = vtx(mesh, e.v[0]);
    const Point& b = vtx(mesh, e.v[1]);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    out.b[static_cast<std::size_t>(e.v[0])] += 0.5 * len;
    out.b[static_cast<std::size_t>(e.v[1])] += 0.5 * len;
    t.push_back({e.v[0], e.v[0], len / 3.0});
    t.push_back({e.v[1], e.v[1], len / 3.0});
    t.push_back({e.v[0], e.v[1], len / 6.0});
    t.push_back({e.v[1], e.v[0], len / 6.0});
  }
  out.mass = SparseOperator::from_triplets(static_cast<int>(mesh.vertices.size()), std::move(t));
  return out;
}

ScalarField boundary_load(const TriMesh& mesh, int component) {
  ScalarField b(mesh.vertices.size(), 0.0);
  for (const auto& e : mesh.boundary_edges) {
    if (e.component != component) continue;
    const Point& a = vtx(mesh, e.v[0]);
    const Point& c = vtx(mesh, e.v[1]);
    const double len = std::hypot(c.x - a.x, c.y - a.y);
    b[static_cast<std::size_t>(e.v[0])] += 0.5 * len;
    b[static_cast<std::size_t>(e.v[1])] += 0.5 * len;
  }
  return b;
}

Discretization::Discretization(const TriMesh& m)
    : mesh(m), stiffness(assemble_stiffness(m)), mass(assemble_mass(m)), on_boundary(boundary_mask(m)) {
  auto bnd = assemble_boundary(m);
  boundary_mass = std::move(bnd.mass);
  boundary_weights = std::move(bnd.b);
  volume_weights = mass * Vector(m.vertices.size(), 1.0);
  const Measures meas = measures(m);
  area = meas.area;
  perimeter = meas.perimeter;
  for (std::size_t i = 0; i < on_boundary.size(); ++i)
    if (on_boundary[i]) boundary_vertices.push_back(static_cast<int>(i));
}

double Discretization::integral(std::span<const double> x) const { return dot(volume_weights, x); }

double Discretization::boundary_integral(std::span<const double> x) const {
  double s = 0.0;
  for (int i : boundary_vertices) s += boundary_weights[static_cast<std::size_t>(i)] * x[static_cast<std::size_t>(i)];
  return s;
}

double Discretization::l2_norm(std::span<const double> x) const { return std::sqrt(mass.quadratic_form(x)); }

double Discretization::min_on_boundary(std::span<const double> x) const {
  double m = x[static_cast<std::size_t>(boundary_vertices.front())];
  for (int i : boundary_vertices) m = std::min(m, x[static_cast<std::size_t>(i)]);
  return m;
}

double Discretization::max_abs_on_boundary(std::span<const double> x) const {
  double m = 0.0;
  for (int i : boundary_vertices) m = std::max(m, std::abs(x[static_cast<std::size_t>(i)]));
  return m;
}

ScalarField neumann_poisson(const Discretization& disc, double f, std::span<const double> flux_per_component,
                            const SolveOptions& opts) {
  const TriMesh& mesh = disc.mesh;
  const int nc = mesh.num_components();
  if (static_cast<int>(flux_per_component.size()) != nc) {
    std::ostringstream os;
    os << "neumann_poisson expects " << nc << " flux values, got " << flux_per_component.size();
    throw std::invalid_argument(os.str());
  }
  const Measures meas = measures(mesh);
  double source = f * disc.area;
  double flux = 0.0;
  double scale = std::abs(source);
  for (int c = 0; c < nc; ++c) {
    flux += flux_per_component[static_cast<std::size_t>(c)] * meas.component_perimeters[static_cast<std::size_t>(c)];
    scale += std::abs(flux_per_component[static_cast<std::size_t>(c)]) * meas.component_perimeters[static_cast<std::size_t>(c)];
  }
  if (std::abs(source + flux) > 1e-10 * scale) {
    std::ostringstream os;
    os << "incompatible Neumann data: integral of f over the domain (" << source
       << ") must equal minus the boundary integral of g (" << -flux << ")";
    throw CompatibilityError(os.str());
  }
  ScalarField rhs(mesh.vertices.size(), 0.0);
  axpy(f, disc.volume_weights, rhs);
  for (int c = 0; c < nc; ++c) axpy(flux_per_component[static_cast<std::size_t>(c)], boundary_load(mesh, c), rhs);
  // remove round-off so the data is exactly orthogonal to constants
  double mean = 0.0;
  for (double v : rhs) mean += v;
  mean /= static_cast<double>(rhs.size());
  for (auto& v : rhs) v -= mean;

  ScalarField u = solve_spd(disc.stiffness, rhs, opts);
  const double shift = disc.integral(u) / disc.area;
  for (auto& v : u) v -= shift;
  return u;
}

ScalarField dirichlet_poisson(const Discretization& disc, double f, const SolveOptions& opts) {
  ScalarField rhs(disc.mesh.vertices.size(), 0.0);
  axpy(f, disc.volume_weights, rhs);
  const Subspace interior(disc.stiffness.dimension(), disc.on_boundary, {});
  return solve_spd_projected(disc.stiffness, rhs, interior, opts);
}

}  // namespace insulab
