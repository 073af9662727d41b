#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "insulab/heat_content.hpp"

using namespace insulab;
using namespace insulab::heat;

namespace {

constexpr double kPi = std::numbers::pi;

double l2_distance(const Discretization& d, const ScalarField& a, const ScalarField& b) {
  ScalarField e = a;
  axpy(-1.0, b, e);
  return d.l2_norm(e);
}

// Annulus(1, 2): u = -r^2/4 + ln r + B with B fixing the zero mean.
double annulus_exact(double x, double y) {
  const double r2 = x * x + y * y;
  // B = -(1/|Omega|) int (-r^2/4 + ln r), |Omega| = 3 pi
  const double int_r2 = 2 * kPi * (std::pow(2.0, 4) - 1.0) / 4.0;             // int r^2
  const double int_ln = 2 * kPi * (2.0 * std::log(2.0) - 0.75);               // int ln r = 2 pi [r^2 ln r / 2 - r^2 / 4]_1^2
  const double b = -(-int_r2 / 4.0 + int_ln) / (3 * kPi);
  return -r2 / 4.0 + 0.5 * std::log(r2) + b;
}

}  // namespace

TEST_CASE("u0 on the disk has a constant trace") {
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 1);
  const Discretization d(mesh);
  const ScalarField u0 = solve_u0(d);
  CHECK(std::abs(d.integral(u0)) < 1e-12);
  const double h = max_edge_length(mesh);
  double lo = INFINITY, hi = -INFINITY;
  for (int i : d.boundary_vertices) {
    lo = std::min(lo, u0[i]);
    hi = std::max(hi, u0[i]);
  }
  CHECK(hi - lo < h * h);
  CHECK(delta_omega(d, u0) < h * h);
}

TEST_CASE("u0 on the annulus matches the radial closed form") {
  std::vector<double> errs;
  for (int r = 0; r < 2; ++r) {
    const TriMesh mesh = refine(build_mesh(annulus(1.0, 2.0, 0.25)), r);
    const Discretization d(mesh);
    const ScalarField u0 = solve_u0(d);
    CHECK(std::abs(d.integral(u0)) < 1e-12);
    const ScalarField ue = interpolate(mesh, annulus_exact);
    errs.push_back(l2_distance(d, u0, ue) / d.l2_norm(ue));
  }
  CHECK(errs[1] < 0.05);
  CHECK(errs[0] / errs[1] > 3.0);
}

TEST_CASE("delta of the annulus") {
  const TriMesh mesh = refine(build_mesh(annulus(1.0, 2.0, 0.25)), 2);
  const Discretization d(mesh);
  const double exact = 0.25 - std::log(2.0) / 3.0;
  CHECK(std::abs(delta_omega(d, solve_u0(d)) - exact) / exact < 0.01);
}

TEST_CASE("delta of the unit square is positive") {
  const TriMesh mesh = build_mesh(square(1.0, 0.05));
  const Discretization d(mesh);
  const double delta = delta_omega(d, solve_u0(d));
  CHECK(delta > 0.0);
  // frozen: two-mesh Richardson value from h = 0.05 and 0.025
  CHECK(std::abs(delta - 0.04168) / 0.04168 < 0.01);
}

TEST_CASE("threshold m1") {
  const TriMesh d = build_mesh(disk(1.0, 0.25));
  const M1Report rd = threshold_m1(d);
  CHECK(rd.m1 == doctest::Approx(rd.delta * rd.perimeter * rd.perimeter / rd.area).epsilon(1e-15));
  CHECK(rd.m1 < 1e-3 * rd.perimeter * rd.perimeter / rd.area * rd.h * rd.h);
  CHECK(rd.delta >= -1e-12);

  const M1Report ra = threshold_m1(refine(build_mesh(annulus(1.0, 2.0, 0.25)), 2));
  const double exact = 12 * kPi * (0.25 - std::log(2.0) / 3.0);
  CHECK(std::abs(ra.m1_refined - exact) / exact < 0.02);
  CHECK(std::abs(ra.m1_extrapolated - exact) < std::abs(ra.m1 - exact));
  CHECK(ra.m1_extrapolated == doctest::Approx(ra.m1_refined + (ra.m1_refined - ra.m1) / 3.0));
}

TEST_CASE("m1 scales as t^2") {
  for (const auto& spec : {annulus(1.0, 2.0, 0.3), random_convex_polygon(4, 6, 0.2)}) {
    CAPTURE(describe(spec));
    const double a = threshold_m1(build_mesh(spec)).m1;
    for (double t : {0.5, 2.0}) {
      const double b = threshold_m1(build_mesh(scaled(spec, t))).m1;
      CHECK(b == doctest::Approx(t * t * a).epsilon(1e-8));
    }
  }
}

TEST_CASE("linear candidate") {
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 1);
  const Discretization d(mesh);
  const ScalarField u0 = solve_u0(d);
  const double h = max_edge_length(mesh);
  for (double m : {0.5, 1.0, 4.0}) {
    const LinearCandidate c = linear_candidate(d, u0, m);
    for (int i : d.boundary_vertices) CHECK(std::abs(c.u[i] - m / (4 * kPi)) < h * h);
  }
  // reported minimum = -delta + m |Omega| / P^2, affine in m
  const TriMesh am = build_mesh(annulus(1.0, 2.0, 0.25));
  const Discretization ad(am);
  const ScalarField a0 = solve_u0(ad);
  const double delta = delta_omega(ad, a0);
  const double slope = ad.area / (ad.perimeter * ad.perimeter);
  for (double m : {0.1, 0.7, 3.0}) {
    const LinearCandidate c = linear_candidate(ad, a0, m);
    CHECK(std::abs(c.boundary_min - (-delta + m * slope)) < 1e-10);
  }
  const double m1 = delta / slope;
  CHECK(std::abs(linear_candidate(ad, a0, m1).boundary_min) < 1e-12);
  CHECK_THROWS(linear_candidate(ad, a0, 0.0));
}

TEST_CASE("certificate") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  for (double m : {0.2, 1.0, 5.0}) {
    const LinearCandidate c = linear_candidate(d, m);
    const Certificate cert = certify_minimizer(d, c.u, m, 100, 7);
    CHECK(cert.passed);
    CHECK(cert.trials == 100);
    CHECK(certificate_margin(d, c.u, c.u, m) == 0.0);
  }
  const TriMesh am = build_mesh(annulus(1.0, 2.0, 0.25));
  const Discretization ad(am);
  const double m1 = threshold_m1(am).m1;
  const LinearCandidate good = linear_candidate(ad, 2.0 * m1);
  CHECK(good.boundary_min > 0.0);
  CHECK(certify_minimizer(ad, good.u, 2.0 * m1, 100, 1).passed);
  const LinearCandidate bad = linear_candidate(ad, 0.5 * m1);
  CHECK_THROWS_AS(certify_minimizer(ad, bad.u, 0.5 * m1, 10, 1), InapplicableCertificate);
}

TEST_CASE("certificate rejects a non-minimiser") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  // nonnegative trace, integral 1, far from optimal
  ScalarField u = interpolate(mesh, [](double x, double) { return 2.0 + x; });
  scale(u, 1.0 / d.integral(u));
  CHECK_FALSE(certify_minimizer(d, u, 1.0, 50, 3).passed);
}

TEST_CASE("certificate is deterministic per seed") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.3));
  const Discretization d(mesh);
  const LinearCandidate c = linear_candidate(d, 1.0);
  CHECK(certify_minimizer(d, c.u, 1.0, 20, 4).worst_margin == certify_minimizer(d, c.u, 1.0, 20, 4).worst_margin);
}

TEST_CASE("regularisation gap bound on random fields") {
  const TriMesh mesh = build_mesh(random_convex_polygon(2, 6, 0.25));
  const Discretization d(mesh);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    ScalarField u(mesh.vertices.size());
    for (auto& v : u) v = g(rng);
    const double m = std::exp(g(rng));
    const double delta = std::pow(10.0, -1.0 - 0.25 * t);
    const double gap = heat_functional_regularized(d, u, m, delta) - heat_functional(d, u, m);
    ScalarField au = u;
    for (auto& v : au) v = std::abs(v);
    const double s = d.boundary_integral(au);
    const double p = d.perimeter;
    CHECK(gap >= -1e-12 * heat_functional(d, u, m));
    CHECK(gap <= (2 * delta * p * s + delta * delta * p * p) / m * (1 + 1e-12));
  }
}

TEST_CASE("disk minimiser equals the linear candidate") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  const HeatMinimizerResult r = minimize_heat_content(d, 1.0);
  const LinearCandidate c = linear_candidate(d, 1.0);
  ScalarField cu = c.u;
  scale(cu, 1.0 / d.integral(cu));
  CHECK(std::abs(d.integral(r.u) - 1.0) < 1e-10);
  CHECK(l2_distance(d, r.u, cu) < 1e-4);
  // T(u) = u^T K u + (1/m)(b^T u)^2 evaluated for the normalised candidate
  const double t_candidate = d.stiffness.quadratic_form(cu) + std::pow(d.boundary_integral(cu), 2);
  CHECK(std::abs(r.objective - t_candidate) / t_candidate < 0.01);
  CHECK(r.vanishing.measure == 0.0);
  for (std::size_t k = 1; k < r.log.size(); ++k) CHECK(r.log[k].objective <= r.log[k - 1].objective * (1 + 1e-9));
  const double t_const = heat_functional(d, ScalarField(mesh.vertices.size(), 1.0 / d.area), 1.0);
  CHECK(r.objective <= t_const * (1 + 1e-12));
}

TEST_CASE("annulus below m1 leaves the outer circle bare") {
  const TriMesh mesh = build_mesh(annulus(1.0, 2.0, 0.25));
  const Discretization d(mesh);
  const HeatMinimizerResult r = minimize_heat_content(d, 0.1);
  CHECK(r.vanishing.measure > 0.0);
  for (int e : r.vanishing.edges) CHECK(mesh.boundary_edges[e].component == 0);
  double umax = 0.0;
  for (double v : r.u) umax = std::max(umax, std::abs(v));
  for (double v : r.u) CHECK(v >= -1e-8 * umax);
  const ScalarField h = material_distribution(d, r.u, 0.1);
  for (int e : r.vanishing.edges) {
    CHECK(h[mesh.boundary_edges[e].v[0]] <= 1e-3 * 0.1);
  }
}

TEST_CASE("dichotomy around m1 on the annulus") {
  const TriMesh mesh = build_mesh(annulus(1.0, 2.0, 0.25));
  const Discretization d(mesh);
  const double m1 = threshold_m1(mesh).m1;
  const HeatMinimizerResult above = minimize_heat_content(d, 1.1 * m1);
  CHECK(above.vanishing.measure == 0.0);
  CHECK(d.min_on_boundary(above.u) > 0.0);
  const HeatMinimizerResult below = minimize_heat_content(d, 0.9 * m1);
  CHECK(below.vanishing.measure > 0.0);
}

TEST_CASE("minimiser does not depend on the start") {
  const TriMesh mesh = build_mesh(annulus(1.0, 2.0, 0.3));
  const Discretization d(mesh);
  HeatOptions o1;
  HeatOptions o2;
  o2.initial = interpolate(mesh, [](double x, double y) { return 1.0 + 0.5 * std::sin(3 * x) * std::cos(2 * y); });
  for (double m : {0.2, 2.0}) {
    const HeatMinimizerResult a = minimize_heat_content(d, m, o1);
    const HeatMinimizerResult b = minimize_heat_content(d, m, o2);
    CHECK(l2_distance(d, a.u, b.u) < 1e-6);
  }
}

TEST_CASE("invalid arguments") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.4));
  const Discretization d(mesh);
  CHECK_THROWS(minimize_heat_content(d, 0.0));
  HeatOptions o;
  o.schedule = {1e-2, 1e-1};
  CHECK_THROWS(minimize_heat_content(d, 1.0, o));
  CHECK_THROWS(material_distribution(d, ScalarField(mesh.vertices.size(), 0.0), 1.0));
}

TEST_CASE("vanishing set and material distribution") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  const VanishingSet all = vanishing_set(d, ScalarField(mesh.vertices.size(), 0.0));
  CHECK(all.edges.size() == mesh.boundary_edges.size());
  CHECK(all.measure == doctest::Approx(d.perimeter).epsilon(1e-14));
  const LinearCandidate c = linear_candidate(d, 2.0);
  CHECK(vanishing_set(d, c.u).measure == 0.0);
  const ScalarField h = material_distribution(d, c.u, 2.0);
  CHECK(d.boundary_integral(h) == doctest::Approx(2.0).epsilon(1e-10));
  for (int i : d.boundary_vertices) CHECK(h[i] == doctest::Approx(2.0 / d.perimeter).epsilon(1e-3));
  // a field vanishing on half the circle carries no insulation there
  ScalarField u = interpolate(mesh, [](double x, double) { return std::max(x, 0.0); });
  const ScalarField hu = material_distribution(d, u, 1.0);
  for (int i : d.boundary_vertices)
    if (mesh.vertices[i].x <= 0.0) CHECK(hu[i] == 0.0);
  CHECK(d.boundary_integral(hu) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("torsion predictor on the disk flags the whole circle") {
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 2);
  const Discretization d(mesh);
  const TorsionPrediction tp = torsion_predictor(d);
  CHECK(tp.near_max_edges.size() == mesh.boundary_edges.size());
  CHECK(std::abs(tp.max_flux - 0.5) / 0.5 < 0.05);
}

TEST_CASE("torsion predictor on the ellipse") {
  const TriMesh mesh = refine(build_mesh(ellipse(2.0, 1.0, 0.2)), 2);
  const Discretization d(mesh);
  const TorsionPrediction tp = torsion_predictor(d);
  // u = (1 - x^2/4 - y^2) / (2 (1/4 + 1)), |du/dn| at (0, 1) = 2 / 2.5
  CHECK(std::abs(tp.max_flux - 0.8) / 0.8 < 0.03);
  CHECK(std::abs(tp.argmax_point.x) < 0.1);
  CHECK(std::abs(std::abs(tp.argmax_point.y) - 1.0) < 0.01);
  REQUIRE(tp.arcs.size() == 2);
  for (const auto& arc : tp.arcs) {
    CHECK(std::abs(arc.center.x) < 0.1);
    CHECK(std::abs(std::abs(arc.center.y) - 1.0) < 0.01);
  }
  CHECK(tp.arcs[0].center.y * tp.arcs[1].center.y < 0.0);
}

TEST_CASE("torsion predictor on the 2x1 rectangle") {
  const TriMesh mesh = build_mesh(rectangle(2.0, 1.0, 0.05));
  const Discretization d(mesh);
  const TorsionPrediction tp = torsion_predictor(d);
  REQUIRE(tp.arcs.size() == 2);
  for (const auto& arc : tp.arcs) {
    CHECK(std::abs(arc.center.x - 1.0) < 0.1);
    CHECK((std::abs(arc.center.y) < 1e-12 || std::abs(arc.center.y - 1.0) < 1e-12));
  }
}
