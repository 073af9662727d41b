// One PASS/FAIL line per acceptance criterion; exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "insulab/heat_content.hpp"
#include "insulab/radial_exact.hpp"
#include "insulab/temp_decay.hpp"

using namespace insulab;

namespace {

constexpr double kPi = std::numbers::pi;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    pass = pass && ok;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [x]");
  }
};

std::string fmt(const char* f, double a) {
  char buf[96];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string fmt(const char* f, double a, double b) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a, b);
  return buf;
}

std::string fmt(const char* f, double a, double b, double c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// ---------------------------------------------------------------------------

Outcome disk_two_pi() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 3);
  const Discretization d(mesh);
  const decay::M0Report r = decay::threshold_m0(d, 1e-3);
  const double secs = seconds_since(t0);
  const double prod = r.m0 * r.mu2;
  o.require(std::abs(prod - 2.0 * kPi) <= 0.02 * 2.0 * kPi, fmt("m0=%.6f mu2=%.6f m0*mu2/2pi=%.6f", r.m0, r.mu2, prod / (2.0 * kPi)));
  o.require(secs <= 300.0, fmt("%.1f s", secs));
  return o;
}

Outcome ball_ratio() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  for (int n : {2, 3}) {
    const radial::BallThresholds b = radial::ball_thresholds(n, 1.0);
    const double ratio = b.m0 * b.mu2 * b.volume / (b.perimeter * b.perimeter);
    const double expected = (n - 1.0) / n;
    o.require(std::abs(ratio - expected) <= 1e-10, fmt("n=%.0f ratio-(n-1)/n=%.2e", n, ratio - expected));
  }
  const double secs = seconds_since(t0);
  o.require(secs < 1.0, fmt("%.4f s", secs));
  return o;
}

Outcome disk_spectrum() {
  Outcome o;
  const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), 2);
  const Discretization d(mesh);
  const double mu2 = decay::eig_neumann2(d).eigenvalue;
  const double ld = decay::eig_dirichlet(d).eigenvalue;
  const double j01 = radial::bessel_zero(radial::BesselOrder(0.0));
  o.require(rel(mu2, 3.390) <= 0.01, fmt("mu2=%.5f vs 3.390", mu2));
  o.require(rel(ld, 5.7832) <= 0.01, fmt("lambda_D=%.5f vs 5.7832", ld));
  o.require(rel(ld, j01 * j01) <= 0.01, fmt("j01^2=%.6f", j01 * j01));
  return o;
}

Outcome m1_values() {
  Outcome o;
  const double exact = 12.0 * kPi * (0.25 - std::log(2.0) / 3.0);
  const heat::M1Report a = heat::threshold_m1(refine(build_mesh(annulus(1.0, 2.0, 0.25)), 2));
  o.require(rel(a.m1, exact) <= 0.02, fmt("annulus m1=%.6f exact=%.6f err=%.2f%%", a.m1, exact, 100.0 * rel(a.m1, exact)));
  o.detail += fmt(" (refined %.6f, extrapolated %.6f)", a.m1_refined, a.m1_extrapolated);
  for (double h : {0.25, 0.125, 0.0625}) {
    const TriMesh mesh = build_mesh(disk(1.0, h));
    const heat::M1Report r = heat::threshold_m1(mesh);
    const double floor = 1e-3 * r.h * r.h * r.perimeter * r.perimeter / r.area;
    o.require(r.m1 < floor, fmt("disk h=%.4f m1=%.2e floor=%.2e", r.h, r.m1, floor));
  }
  {
    // refinement leaves two classes of boundary vertex, old and new
    const heat::M1Report r = heat::threshold_m1(refine(build_mesh(disk(1.0, 0.25)), 2));
    o.detail += fmt(" (refined disk m1=%.2e)", r.m1);
  }
  return o;
}

Outcome eigen_ordering() {
  Outcome o;
  const std::vector<DomainSpec> corpus{disk(1.0, 0.25),
                                       square(1.0, 0.125),
                                       rectangle(2.0, 1.0, 0.125),
                                       ellipse(2.0, 1.0, 0.2),
                                       annulus(1.0, 2.0, 0.2),
                                       random_convex_polygon(1, 6, 0.15),
                                       random_convex_polygon(2, 7, 0.15),
                                       random_convex_polygon(3, 5, 0.15)};
  int ordered = 0;
  for (const auto& spec : corpus) {
    const TriMesh mesh = build_mesh(spec);
    const Discretization d(mesh);
    const double k1 = decay::eig_kappa1(d).eigenvalue;
    const double mu2 = decay::eig_neumann2(d).eigenvalue;
    const double ld = decay::eig_dirichlet(d).eigenvalue;
    if (k1 <= mu2 + 1e-8 && mu2 < ld) {
      ++ordered;
    } else {
      o.require(false, describe(spec) + fmt(" k1=%.5f mu2=%.5f lD=%.5f", k1, mu2, ld));
    }
  }
  o.require(ordered == static_cast<int>(corpus.size()), fmt("%.0f/%.0f meshes ordered", ordered, corpus.size()));
  for (const auto& spec : {disk(1.0, 0.125), square(1.0, 0.1)}) {
    const TriMesh mesh = build_mesh(spec);
    const Discretization d(mesh);
    const double k1 = decay::eig_kappa1(d).eigenvalue;
    const double mu2 = decay::eig_neumann2(d).eigenvalue;
    o.require(rel(k1, mu2) <= 0.01, describe(spec) + fmt(" |k1-mu2|/mu2=%.2e", rel(k1, mu2)));
  }
  return o;
}

Outcome heat_uniqueness() {
  Outcome o;
  struct Case {
    DomainSpec spec;
    double m;
  };
  const double m1 = 12.0 * kPi * (0.25 - std::log(2.0) / 3.0);
  const std::vector<Case> cases{{disk(1.0, 0.25), 0.5}, {disk(1.0, 0.25), 3.0}, {annulus(1.0, 2.0, 0.25), 0.5 * m1},
                                {annulus(1.0, 2.0, 0.25), 2.0 * m1}};
  double worst_gap = 0.0;
  int certified = 0;
  for (const auto& c : cases) {
    const TriMesh mesh = build_mesh(c.spec);
    const Discretization d(mesh);
    heat::HeatOptions other;
    ScalarField init = interpolate(mesh, [](double x, double y) { return 2.0 + x + 0.5 * y * y; });
    scale(init, 1.0 / d.integral(init));
    other.initial = init;
    const heat::HeatMinimizerResult a = heat::minimize_heat_content(d, c.m);
    const heat::HeatMinimizerResult b = heat::minimize_heat_content(d, c.m, other);
    ScalarField diff = a.u;
    axpy(-1.0, b.u, diff);
    worst_gap = std::max(worst_gap, d.l2_norm(diff));
    const heat::LinearCandidate lc = heat::linear_candidate(d, c.m);
    if (lc.boundary_min > 0.0) {
      const heat::Certificate cert = heat::certify_minimizer(d, lc.u, c.m, 100, 7);
      o.require(cert.passed && cert.trials == 100, describe(c.spec) + fmt(" m=%.3f certificate margin %.2e", c.m, cert.worst_margin));
      ++certified;
    }
  }
  o.require(worst_gap <= 1e-6, fmt("max L2 gap between initialisations %.2e", worst_gap));
  o.require(certified >= 3, fmt("%.0f certificates", certified));
  return o;
}

Outcome dichotomy() {
  Outcome o;
  const std::vector<double> below{0.5, 0.7, 0.9};
  const std::vector<double> above{1.1, 1.5, 2.0};
  const double m0_exact = radial::ball_thresholds(2, 1.0).m0;
  const double m1_exact = 12.0 * kPi * (0.25 - std::log(2.0) / 3.0);
  for (int r = 0; r < 2; ++r) {
    {
      const TriMesh mesh = refine(build_mesh(disk(1.0, 0.25)), r);
      const Discretization d(mesh);
      const double m0 = decay::threshold_m0(d, 1e-3).m0;
      for (double threshold : {m0, m0_exact}) {
        std::vector<double> grid;
        for (double f : below) grid.push_back(f * threshold);
        for (double f : above) grid.push_back(f * threshold);
        const auto rows = decay::breaking_scan(d, grid, 1);
        double low = INFINITY, high = 0.0;
        for (std::size_t k = 0; k < rows.size(); ++k) {
          if (k < below.size())
            low = std::min(low, rows[k].vanish_measure);
          else
            high = std::max(high, rows[k].vanish_measure);
        }
        o.require(low > 0.05 * d.perimeter && high == 0.0,
                  fmt("decay disk r%.0f m0=%.4f: min bare %.3f", r, threshold, low) + fmt(", max bare %.3f", high));
      }
    }
    {
      const TriMesh mesh = refine(build_mesh(annulus(1.0, 2.0, 0.25)), r);
      const Discretization d(mesh);
      const double m1 = heat::threshold_m1(mesh).m1;
      for (double threshold : {m1, m1_exact}) {
        double low = INFINITY, high = 0.0;
        for (double f : below) low = std::min(low, heat::minimize_heat_content(d, f * threshold).vanishing.measure);
        for (double f : above) high = std::max(high, heat::minimize_heat_content(d, f * threshold).vanishing.measure);
        o.require(low > 0.05 * d.perimeter && high == 0.0,
                  fmt("heat annulus r%.0f m1=%.4f: min bare %.3f", r, threshold, low) + fmt(", max bare %.3f", high));
      }
    }
  }
  return o;
}

Outcome monotone_scaling() {
  Outcome o;
  {
    const TriMesh mesh = build_mesh(ellipse(1.5, 1.0, 0.25));
    const Discretization d(mesh);
    std::vector<double> grid;
    for (int k = 0; k < 20; ++k) grid.push_back(0.05 * std::pow(400.0, k / 19.0));
    const auto rows = decay::breaking_scan(d, grid, 4);
    double rise = 0.0;
    for (std::size_t k = 1; k < rows.size(); ++k) rise = std::max(rise, rows[k].lambda_m - rows[k - 1].lambda_m);
    o.require(rise <= 1e-8, fmt("scan worst rise %.2e", rise));
    double raw_rise = 0.0, prev = INFINITY;
    for (double m : grid) {
      const double l = decay::minimize_lambda_m(d, m).lambda_m;
      raw_rise = std::max(raw_rise, l - prev);
      prev = l;
    }
    o.require(raw_rise <= 1e-8, fmt("independent minimisations worst rise %.2e", raw_rise));
  }
  const DomainSpec spec = random_convex_polygon(5, 6, 0.2);
  const TriMesh base = build_mesh(spec);
  const Discretization db(base);
  const double m0 = decay::threshold_m0(db, 1e-4).m0;
  const double m1 = heat::threshold_m1(base).m1;
  for (double t : {0.5, 2.0}) {
    const TriMesh mesh = build_mesh(scaled(spec, t));
    const Discretization d(mesh);
    const double m0t = decay::threshold_m0(d, 1e-4).m0;
    const double m1t = heat::threshold_m1(mesh).m1;
    o.require(rel(m0t / (t * t), m0) <= 0.02, fmt("t=%.1f m0 ratio %.6f", t, m0t / (t * t * m0)));
    o.require(rel(m1t / (t * t), m1) <= 0.02, fmt("t=%.1f m1 ratio %.6f", t, m1t / (t * t * m1)));
  }
  return o;
}

Outcome bessel_identities() {
  Outcome o;
  double worst = 0.0;
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    for (int k = 0; k < 300; ++k) {
      const double z = 0.1 + 0.1 * k;
      const double below = s >= 1.0 ? radial::bessel_j(radial::BesselOrder(s - 1.0), z) : std::sqrt(2.0 / (kPi * z)) * std::cos(z);
      const double above = radial::bessel_j(radial::BesselOrder(s + 1.0), z);
      worst = std::max(worst, std::abs(below + above - 2.0 * s * radial::bessel_j(radial::BesselOrder(s), z) / z));
    }
  }
  o.require(worst < 1e-11, fmt("recurrence residual %.2e", worst));
  const radial::BallThresholds b = radial::ball_thresholds(2, 1.0);
  double w2 = 0.0;
  for (double f : {1.25, 1.5, 2.0, 3.0, 5.0}) {
    const double m = f * b.m0;
    w2 = std::max(w2, std::abs(radial::identity_2bel_check(1.0, m, radial::lambda_m_disk(2, 1.0, m))));
  }
  o.require(w2 < 1e-8, fmt("2bel residual %.2e", w2));
  return o;
}

// arclength along x = a cos t, y = b sin t between parameters t0 and t1
double ellipse_arc(double a, double b, double t0, double t1) {
  if (t1 < t0) std::swap(t0, t1);
  const int n = 2000;
  const double dt = (t1 - t0) / n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (i + 0.5) * dt;
    s += std::hypot(a * std::sin(t), b * std::cos(t)) * dt;
  }
  return s;
}

Outcome torsion() {
  Outcome o;
  const TriMesh mesh = refine(build_mesh(ellipse(2.0, 1.0, 0.2)), 2);
  const Discretization d(mesh);
  const heat::TorsionPrediction tp = heat::torsion_predictor(d);
  const double t = std::atan2(tp.argmax_point.y / 1.0, tp.argmax_point.x / 2.0);
  const double target = t >= 0.0 ? kPi / 2.0 : -kPi / 2.0;
  const double arc = ellipse_arc(2.0, 1.0, t, target);
  o.require(arc <= 0.1, fmt("argmax (%.4f, %.4f), arclength to (0,+-1) %.4f", tp.argmax_point.x, tp.argmax_point.y, arc));
  o.require(rel(tp.max_flux, 0.8) <= 0.03, fmt("max flux %.5f vs 0.8", tp.max_flux));
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"disk m0*mu2 = 2 pi after 3 refinements", disk_two_pi},
      {"ball threshold ratio (n-1)/n for n = 2, 3", ball_ratio},
      {"unit disk mu2 and lambda_D", disk_spectrum},
      {"annulus m1 closed form, disk m1 below noise floor", m1_values},
      {"kappa1 <= mu2 < lambda_D on the corpus", eigen_ordering},
      {"heat content uniqueness and certificate", heat_uniqueness},
      {"vanishing-set dichotomy across one refinement", dichotomy},
      {"lambda_m monotone, thresholds scale as t^2", monotone_scaling},
      {"Bessel recurrence and circle identity", bessel_identities},
      {"ellipse torsion flux maximum", torsion},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    if (!o.pass) ++failed;
    std::printf("%s %zu %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
