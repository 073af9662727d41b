#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "insulab/radial_exact.hpp"
#include "insulab/temp_decay.hpp"

using namespace insulab;
using namespace insulab::decay;

namespace {

constexpr double kPi = std::numbers::pi;

double boundary_max(const Discretization& d, const ScalarField& u) {
  double hi = 0.0;
  for (int i : d.boundary_vertices) hi = std::max(hi, std::abs(u[i]));
  return hi;
}

// relative spread of the boundary trace around its mean
double angular_spread(const Discretization& d, const ScalarField& u) {
  double s = 0.0, s2 = 0.0;
  for (int i : d.boundary_vertices) {
    s += u[i];
    s2 += u[i] * u[i];
  }
  const double n = static_cast<double>(d.boundary_vertices.size());
  const double mean = s / n;
  return std::sqrt(std::max(0.0, s2 / n - mean * mean)) / std::abs(mean);
}

}  // namespace

TEST_CASE("disk above m0: radial minimiser with the exact eigenvalue") {
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 1);
  const Discretization d(mesh);
  const double m = 2.0 * radial::ball_thresholds(2, 1.0).m0;
  const DecayMinimizerResult r = minimize_lambda_m(d, m);
  const double exact = radial::lambda_m_disk(2, 1.0, m);
  CHECK(std::abs(r.lambda_m - exact) / exact < 0.01);
  CHECK(r.vanishing.measure == 0.0);
  CHECK(angular_spread(d, r.u) < 1e-3);
  CHECK(r.lambda_m == doctest::Approx(decay_quotient(d, r.u, m)).epsilon(1e-10));
  CHECK(d.l2_norm(r.u) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("large m approaches the constant field") {
  const TriMesh mesh = build_mesh(square(1.0, 0.2));
  const Discretization d(mesh);
  const double m = 1e6 * d.area;
  const DecayMinimizerResult r = minimize_lambda_m(d, m);
  CHECK(r.lambda_m <= constant_trial_bound(d, m) * (1.0 + 1e-6));
  CHECK(r.min_trace > 0.0);
  CHECK(r.vanishing.measure == 0.0);
}

TEST_CASE("small m approaches the Dirichlet eigenvalue") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  const double ld = eig_dirichlet(d).eigenvalue;
  const DecayMinimizerResult r = minimize_lambda_m(d, 1e-6);
  CHECK(r.lambda_m < ld);
  CHECK(std::abs(r.lambda_m - ld) / ld < 0.02);
}

TEST_CASE("lambda_m stays below both Dirichlet and constant bounds") {
  for (const auto& spec : {square(1.0, 0.2), ellipse(2.0, 1.0, 0.3), random_convex_polygon(7, 6, 0.25)}) {
    CAPTURE(describe(spec));
    const TriMesh mesh = build_mesh(spec);
    const Discretization d(mesh);
    const double ld = eig_dirichlet(d).eigenvalue;
    for (double m : {0.3, 1.0, 5.0}) {
      CAPTURE(m);
      const DecayMinimizerResult r = minimize_lambda_m(d, m);
      CHECK(r.lambda_m <= std::min(ld, constant_trial_bound(d, m)) * (1.0 + 1e-9));
      CHECK(r.lambda_m == doctest::Approx(decay_quotient(d, r.u, m)).epsilon(1e-10));
      CHECK(d.l2_norm(r.u) == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(r.lambda_m > 0.0);
    }
  }
}

TEST_CASE("decay quotient is invariant under u -> c u and u -> -u") {
  const TriMesh mesh = build_mesh(ellipse(2.0, 1.0, 0.3));
  const Discretization d(mesh);
  ScalarField u = interpolate(mesh, [](double x, double y) { return 1.0 + 0.3 * x - 0.2 * y * y; });
  const double q = decay_quotient(d, u, 1.5);
  ScalarField v = u;
  scale(v, -3.5);
  CHECK(decay_quotient(d, v, 1.5) == doctest::Approx(q).epsilon(1e-13));
  const ScalarField one(mesh.vertices.size(), 1.0);
  CHECK(decay_quotient(d, one, 1.5) == doctest::Approx(constant_trial_bound(d, 1.5)).epsilon(1e-12));
}

TEST_CASE("lambda_m scales as t^-2 with m scaled by t^2") {
  const DomainSpec spec = random_convex_polygon(3, 5, 0.25);
  const TriMesh a = build_mesh(spec);
  const TriMesh b = build_mesh(scaled(spec, 2.0));
  const Discretization da(a), db(b);
  for (double m : {0.5, 4.0}) {
    const double la = minimize_lambda_m(da, m).lambda_m;
    const double lb = minimize_lambda_m(db, 4.0 * m).lambda_m;
    CHECK(lb * 4.0 == doctest::Approx(la).epsilon(1e-6));
  }
}

TEST_CASE("threshold m0 of the unit disk") {
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 1);
  const Discretization d(mesh);
  const M0Report rep = threshold_m0(d, 1e-3);
  const double exact = radial::ball_thresholds(2, 1.0).m0;
  CHECK(std::abs(rep.m0 - exact) / exact < 0.02);
  CHECK(rep.kappa1 <= rep.mu2 + 1e-8);
  CHECK(rep.mu2 < rep.lambda_d);
  CHECK(std::abs(rep.m0 * rep.mu2 - 2.0 * kPi) / (2.0 * kPi) < 0.02);
  REQUIRE(!rep.history.empty());
  // each entry holds the bracket before its evaluation
  const BracketStep& last = rep.history.back();
  const double lo = last.lambda_m > rep.kappa1 ? last.m : last.lo;
  const double hi = last.lambda_m > rep.kappa1 ? last.hi : last.m;
  CHECK(hi - lo < 1e-3 * rep.m0 * 1.001);
  CHECK(rep.m0 > lo);
  CHECK(rep.m0 < hi);
}

TEST_CASE("threshold m0 scales with t^2") {
  const DomainSpec spec = disk(1.0, 0.25);
  const TriMesh m1 = build_mesh(spec);
  const TriMesh m2 = build_mesh(scaled(spec, 2.0));
  const Discretization d1(m1), d2(m2);
  const double a = threshold_m0(d1, 1e-4).m0;
  const double b = threshold_m0(d2, 1e-4).m0;
  CHECK(b / a == doctest::Approx(4.0).epsilon(1e-3));
}

TEST_CASE("threshold m0 of the square is stable under refinement") {
  const M0Report rep = threshold_m0_pair(build_mesh(square(1.0, 0.125)), 1e-3);
  REQUIRE(rep.m0_refined.has_value());
  CHECK(std::abs(rep.m0 - *rep.m0_refined) / *rep.m0_refined < 0.03);
  CHECK(rep.kappa1 <= rep.mu2 + 1e-8);
  CHECK(*rep.kappa1_refined <= *rep.mu2_refined + 1e-8);
}

TEST_CASE("breaking scan on the disk separates the two regimes") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  const double m0 = threshold_m0(d, 1e-3).m0;
  const std::vector<double> grid{0.5 * m0, 0.8 * m0, 1.25 * m0, 2.0 * m0};
  std::vector<DecayMinimizerResult> details;
  const std::vector<ScanRow> rows = breaking_scan(d, grid, 2, {}, &details);
  REQUIRE(rows.size() == grid.size());
  REQUIRE(details.size() == grid.size());
  for (std::size_t i = 0; i < rows.size(); ++i) CHECK(rows[i].m == grid[i]);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].lambda_m <= rows[i - 1].lambda_m);
  CHECK(rows[0].vanish_measure > 0.0);
  CHECK(rows[3].vanish_measure == 0.0);
  CHECK(rows[3].min_trace >= 1e-3 * boundary_max(d, details[3].u));
}

TEST_CASE("breaking scan is independent of the thread count") {
  const TriMesh mesh = build_mesh(ellipse(1.5, 1.0, 0.3));
  const Discretization d(mesh);
  std::vector<double> grid;
  for (int i = 0; i < 6; ++i) grid.push_back(0.3 * std::pow(2.0, i));
  const auto a = breaking_scan(d, grid, 1);
  const auto b = breaking_scan(d, grid, 3);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].lambda_m == b[i].lambda_m);
    CHECK(a[i].vanish_measure == b[i].vanish_measure);
    CHECK(a[i].min_trace == b[i].min_trace);
  }
}

TEST_CASE("active-set refinement never raises the quotient") {
  const TriMesh mesh = build_mesh(disk(1.0, 0.25));
  const Discretization d(mesh);
  const double m = 0.5;
  const ScalarField start = interpolate(mesh, [](double x, double) { return std::max(0.0, 0.8 + x); });
  const RefineResult r = active_set_refine(d, m, start);
  CHECK(r.lambda <= decay_quotient(d, start, m) + 1e-12);
  for (int i : d.boundary_vertices) CHECK(r.u[i] >= -1e-12);
}

TEST_CASE("non-positive m is rejected") {
  const TriMesh mesh = build_mesh(square(1.0, 0.3));
  const Discretization d(mesh);
  CHECK_THROWS(minimize_lambda_m(d, 0.0));
  CHECK_THROWS(minimize_lambda_m(d, -1.0));
}
