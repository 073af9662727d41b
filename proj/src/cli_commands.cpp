#include "insulab/cli_commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "insulab/fem.hpp"
#include "insulab/heat_content.hpp"
#include "insulab/mesh_io.hpp"
#include "insulab/radial_exact.hpp"
#include "insulab/report.hpp"
#include "insulab/temp_decay.hpp"

namespace insulab::cli {

namespace {

using report::json;

constexpr double kPi = 3.141592653589793;
constexpr double kTwoPi = 2.0 * kPi;

double to_number(const std::string& tok, const std::string& context) {
  double v = 0.0;
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (tok.empty() || ec != std::errc() || ptr != end || !std::isfinite(v))
    throw UsageError("malformed number '" + tok + "' in '" + context + "'");
  return v;
}

std::vector<double> number_list(const std::string& text, char sep, const std::string& context) {
  std::vector<double> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(to_number(text.substr(start, pos - start), context));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::filesystem::path out_file(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out);
  return std::filesystem::path(cfg.out) / name;
}

void emit(const RunConfig& cfg, const std::string& name, const std::string& text, std::ostream& log) {
  const auto path = out_file(cfg, name);
  report::write_text(path.string(), text);
  log << "wrote " << path.string() << "\n";
}

json header(const RunConfig& cfg, const TriMesh& mesh) {
  return {{"schema", report::kSchema},
          {"command", cfg.command},
          {"domain", report::domain_json(mesh.domain)},
          {"refine", cfg.refine},
          {"mesh", {{"vertices", mesh.vertices.size()}, {"triangles", mesh.triangles.size()}, {"h", max_edge_length(mesh)}}}};
}

const Disk* as_disk(const DomainSpec& spec) { return std::get_if<Disk>(&spec.shape); }
const Annulus* as_annulus(const DomainSpec& spec) { return std::get_if<Annulus>(&spec.shape); }

/// Boundary values against arclength, one series per boundary loop.
std::vector<report::Series> trace_series(const TriMesh& mesh, std::span<const double> u, const std::string& label) {
  std::vector<report::Series> out;
  const auto loops = boundary_loops(mesh);
  for (std::size_t c = 0; c < loops.size(); ++c) {
    report::Series s;
    s.label = loops.size() == 1 ? label : label + " (loop " + std::to_string(c) + ")";
    const auto& loop = loops[c];
    double arc = 0.0;
    for (std::size_t k = 0; k <= loop.size(); ++k) {
      const int v = loop[k % loop.size()];
      if (k > 0) {
        const Point& a = mesh.vertices[loop[k - 1]];
        const Point& b = mesh.vertices[v];
        arc += std::hypot(b.x - a.x, b.y - a.y);
      }
      s.x.push_back(arc);
      s.y.push_back(u[v]);
    }
    out.push_back(std::move(s));
  }
  return out;
}

json check(bool ok, double value, double limit) { return {{"passed", ok}, {"value", value}, {"limit", limit}}; }

int exit_code(const json& checks, std::ostream& log) {
  int code = 0;
  for (const auto& [name, c] : checks.items()) {
    if (!c["passed"].get<bool>()) {
      log << "check failed: " << name << "\n";
      code = 1;
    }
  }
  return code;
}

}  // namespace

double m1_noise_floor(double h, double perimeter, double area) { return 1e-3 * h * h * perimeter * perimeter / area; }

DomainSpec parse_domain(const std::string& text, double h, std::uint64_t seed) {
  const std::size_t colon = text.find(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size())
    throw UsageError("domain must look like kind:params, got '" + text + "'");
  const std::string kind = text.substr(0, colon);
  const std::string rest = text.substr(colon + 1);
  auto need = [&](const std::vector<double>& v, std::size_t n) {
    if (v.size() != n) throw UsageError("domain '" + kind + "' takes " + std::to_string(n) + " parameter(s)");
    return v;
  };
  DomainSpec spec;
  try {
    if (kind == "disk") {
      spec = disk(need(number_list(rest, ',', text), 1)[0], h);
    } else if (kind == "annulus") {
      const auto v = need(number_list(rest, ',', text), 2);
      spec = annulus(v[0], v[1], h);
    } else if (kind == "square") {
      spec = square(need(number_list(rest, ',', text), 1)[0], h);
    } else if (kind == "rectangle") {
      const auto v = need(number_list(rest, ',', text), 2);
      spec = rectangle(v[0], v[1], h);
    } else if (kind == "ellipse") {
      const auto v = need(number_list(rest, ',', text), 2);
      spec = ellipse(v[0], v[1], h);
    } else if (kind == "polygon") {
      const auto v = number_list(rest, ',', text);
      if (v.size() < 6 || v.size() % 2) throw UsageError("polygon needs at least three x,y pairs");
      std::vector<Point> pts;
      for (std::size_t i = 0; i < v.size(); i += 2) pts.push_back({v[i], v[i + 1]});
      spec = polygon(std::move(pts), h);
    } else if (kind == "random") {
      const double sides = need(number_list(rest, ',', text), 1)[0];
      if (sides != std::floor(sides) || sides < 3) throw UsageError("random polygon needs an integer side count >= 3");
      spec = random_convex_polygon(seed, static_cast<int>(sides), h);
    } else if (kind == "file") {
      TriMesh mesh = load_mesh(rest);
      spec = mesh.domain;
    } else {
      throw UsageError("unknown domain kind '" + kind + "'");
    }
    validate_domain(spec);
  } catch (const MeshError& e) {
    throw UsageError(std::string("invalid domain '") + text + "': " + e.what());
  }
  return spec;
}

std::vector<double> parse_grid(const std::string& text) {
  const auto v = number_list(text, ':', text);
  if (v.size() != 3) throw UsageError("grid must look like a:b:n, got '" + text + "'");
  const double a = v[0], b = v[1], nd = v[2];
  if (nd != std::floor(nd) || nd < 1) throw UsageError("grid count must be a positive integer");
  if (!(a > 0.0 && b > 0.0)) throw UsageError("grid values must be positive");
  const int n = static_cast<int>(nd);
  if (n == 1 && a != b) throw UsageError("a one-point grid needs a == b");
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = n == 1 ? a : a + (b - a) * i / (n - 1);
  return g;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.h > 0.0)) throw UsageError("--h must be positive");
  if (cfg.refine < 0 || cfg.refine > 6) throw UsageError("--refine must lie in [0, 6]");
  if (!(cfg.tol > 0.0 && cfg.tol < 1.0)) throw UsageError("--tol must lie in (0, 1)");
  if (cfg.jobs < 1) throw UsageError("--jobs must be at least 1");
  if (cfg.m && !(*cfg.m > 0.0)) throw UsageError("--m must be positive");
  for (double m : cfg.grid)
    if (!(m > 0.0)) throw UsageError("grid values must be positive");
  if (cfg.command == "solve") {
    if (!cfg.m) throw UsageError("solve needs --m");
    if (cfg.problem != "heat" && cfg.problem != "decay") throw UsageError("--problem must be heat or decay");
  }
  if (cfg.command == "oracle") {
    if (cfg.n < 2) throw UsageError("oracle needs dimension n >= 2");
    if (cfg.n > 10) throw UsageError("oracle supports n <= 10");
    if (!(cfg.radius > 0.0)) throw UsageError("--radius must be positive");
  }
}

TriMesh config_mesh(const RunConfig& cfg) {
  if (cfg.domain.rfind("file:", 0) == 0) {
    TriMesh mesh;
    try {
      mesh = load_mesh(cfg.domain.substr(5));
    } catch (const MeshError& e) {
      throw UsageError(e.what());
    }
    return refine(mesh, cfg.refine);
  }
  return refine(build_mesh(parse_domain(cfg.domain, cfg.h, cfg.seed)), cfg.refine);
}

int cmd_threshold_m1(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const TriMesh mesh = config_mesh(cfg);
  const heat::M1Report r = heat::threshold_m1(mesh);
  json doc = header(cfg, mesh);
  doc["report"] = report::m1_json(r);
  const double floor = m1_noise_floor(r.h, r.perimeter, r.area);
  doc["noise_floor"] = floor;
  doc["below_noise_floor"] = r.m1 < floor;

  json checks = json::object();
  checks["delta_nonnegative"] = check(r.delta >= -1e-12 * std::abs(r.boundary_mean), r.delta, 0.0);
  if (const Annulus* a = as_annulus(mesh.domain)) {
    const double exact = radial::annulus_torsion(a->inner, a->outer).m1();
    doc["exact"] = {{"m1", exact}, {"relative_error", std::abs(r.m1 - exact) / exact}};
  } else if (as_disk(mesh.domain)) {
    doc["exact"] = {{"m1", 0.0}};
  }
  doc["checks"] = checks;

  const Discretization disc(mesh);
  const ScalarField u0 = heat::solve_u0(disc);
  report::Plot plot{"u0 on the boundary", "arclength", "u0", trace_series(mesh, u0, "u0"), {}};
  emit(cfg, "threshold_m1.json", report::dump(doc), log);
  emit(cfg, "threshold_m1.svg", report::svg(plot), log);
  log << std::setprecision(10) << "m1 = " << r.m1 << "  (refined " << r.m1_refined << ", extrapolated "
      << r.m1_extrapolated << ", noise floor " << floor << ")\n";
  return exit_code(checks, log);
}

int cmd_threshold_m0(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const TriMesh mesh = config_mesh(cfg);
  const Discretization disc(mesh);
  const decay::M0Report r = decay::threshold_m0(disc, cfg.tol);
  json doc = header(cfg, mesh);
  doc["report"] = report::m0_json(r);
  doc["m0_mu2"] = r.m0 * r.mu2;
  doc["kappa1_equals_mu2"] = std::abs(r.kappa1 - r.mu2) <= 1e-2 * r.mu2;

  json checks = json::object();
  checks["kappa1_le_mu2"] = check(r.kappa1 <= r.mu2 * (1.0 + 1e-8), r.kappa1, r.mu2);
  checks["mu2_lt_lambda_d"] = check(r.mu2 < r.lambda_d, r.mu2, r.lambda_d);
  if (const Disk* d = as_disk(mesh.domain)) {
    const radial::BallThresholds b = radial::ball_thresholds(2, d->radius);
    doc["exact"] = report::ball_json(b);
    doc["relative_error"] = std::abs(r.m0 - b.m0) / b.m0;
    doc["m0_mu2_over_2pi"] = r.m0 * r.mu2 / kTwoPi;
  }
  doc["checks"] = checks;
  emit(cfg, "threshold_m0.json", report::dump(doc), log);
  log << std::setprecision(10) << "m0 = " << r.m0 << "  kappa1 = " << r.kappa1 << "  mu2 = " << r.mu2
      << "  m0*mu2 = " << r.m0 * r.mu2 << "\n";
  return exit_code(checks, log);
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  if (cfg.grid.empty()) throw UsageError("sweep needs a nonempty --m-grid");
  const TriMesh mesh = config_mesh(cfg);
  const Discretization disc(mesh);
  const auto rows = decay::breaking_scan(disc, cfg.grid, cfg.jobs);
  const decay::M0Report th = decay::threshold_m0(disc, cfg.tol);

  json checks = json::object();
  double worst_rise = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.size(); ++j)
      if (rows[i].m < rows[j].m) worst_rise = std::max(worst_rise, rows[j].lambda_m - rows[i].lambda_m);
  checks["lambda_nonincreasing"] = check(worst_rise <= 1e-8, worst_rise, 1e-8);

  json doc = header(cfg, mesh);
  doc["grid"] = cfg.grid;
  doc["m0"] = th.m0;
  doc["threshold"] = report::m0_json(th);
  doc["checks"] = checks;

  report::Series vanish{"vanishing measure", {}, {}};
  for (const auto& row : rows) {
    vanish.x.push_back(row.m);
    vanish.y.push_back(row.vanish_measure);
  }
  report::Plot plot{"vanishing set against m (dashed: m0)", "m", "measure", {vanish}, {th.m0}};
  emit(cfg, "sweep.csv", report::scan_csv(rows), log);
  emit(cfg, "sweep.svg", report::svg(plot), log);
  emit(cfg, "sweep.json", report::dump(doc), log);
  log << std::setprecision(10) << "m0 = " << th.m0 << "\n";
  return exit_code(checks, log);
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const double m = *cfg.m;
  const TriMesh mesh = config_mesh(cfg);
  const Discretization disc(mesh);
  json doc = header(cfg, mesh);
  doc["problem"] = cfg.problem;
  doc["m"] = m;
  json checks = json::object();
  ScalarField u;
  if (cfg.problem == "heat") {
    const heat::HeatMinimizerResult r = heat::minimize_heat_content(disc, m);
    const heat::LinearCandidate lc = heat::linear_candidate(disc, m);
    doc["objective"] = r.objective;
    doc["vanish_measure"] = r.vanishing.measure;
    doc["min_trace"] = disc.min_on_boundary(r.u);
    doc["linear_candidate_min"] = lc.boundary_min;
    if (lc.boundary_min > 0.0) {
      const heat::Certificate c = heat::certify_minimizer(disc, r.u, m, 100, cfg.seed);
      doc["certificate"] = {{"passed", c.passed}, {"trials", c.trials}, {"worst_margin", c.worst_margin}};
      checks["certificate"] = check(c.passed, c.worst_margin, 0.0);
    }
    doc["minimizer"] = report::minimizer_json(disc, r.u, m, r.vanishing, r.schedule);
    u = r.u;
  } else if (cfg.problem == "decay") {
    const decay::DecayMinimizerResult r = decay::minimize_lambda_m(disc, m);
    doc["lambda_m"] = r.lambda_m;
    doc["vanish_measure"] = r.vanishing.measure;
    doc["min_trace"] = r.min_trace;
    doc["source"] = r.source;
    const double bound = decay::constant_trial_bound(disc, m);
    checks["below_constant_bound"] = check(r.lambda_m <= bound * (1.0 + 1e-12), r.lambda_m, bound);
    if (const Disk* d = as_disk(mesh.domain)) {
      const radial::BallThresholds b = radial::ball_thresholds(2, d->radius);
      if (m >= b.m0) doc["exact_lambda_m"] = radial::lambda_m_disk(2, d->radius, m);
    }
    doc["minimizer"] = report::minimizer_json(disc, r.u, m, r.vanishing, r.schedule);
    u = r.u;
  } else {
    throw UsageError("--problem must be heat or decay");
  }
  doc["checks"] = checks;
  report::Plot plot{"minimiser on the boundary", "arclength", "u", trace_series(mesh, u, "u"), {}};
  emit(cfg, "solve.json", report::dump(doc), log);
  emit(cfg, "solve.svg", report::svg(plot), log);
  return exit_code(checks, log);
}

int cmd_oracle(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const radial::BallThresholds b = radial::ball_thresholds(cfg.n, cfg.radius);
  const double ratio = b.m0 * b.mu2 * b.volume / (b.perimeter * b.perimeter);
  const double expected = (cfg.n - 1.0) / cfg.n;

  // J_{-1/2}(z) = sqrt(2 / (pi z)) cos z lies outside the supported orders
  double recurrence = 0.0;
  for (double s : {0.5, 1.0, 1.5, 2.0}) {
    for (int k = 0; k < 300; ++k) {
      const double z = 0.1 + k * 0.1;
      const double below = s >= 1.0 ? radial::bessel_j(radial::BesselOrder(s - 1.0), z)
                                    : std::sqrt(2.0 / (kPi * z)) * std::cos(z);
      const double lhs = below + radial::bessel_j(radial::BesselOrder(s + 1.0), z);
      recurrence = std::max(recurrence, std::abs(lhs - 2.0 * s * radial::bessel_j(radial::BesselOrder(s), z) / z));
    }
  }

  std::ostream& o = log;
  o << std::setprecision(10);
  o << "n                     " << b.n << "\n";
  o << "R                     " << b.radius << "\n";
  o << "p                     " << b.p << "\n";
  o << "mu2                   " << b.mu2 << "\n";
  o << "lambda_d              " << b.lambda_d << "\n";
  o << "m0                    " << b.m0 << "\n";
  o << "m0*mu2                " << b.m0 * b.mu2 << "\n";
  o << "m0*mu2*|O|/P^2        " << std::setprecision(6) << std::fixed << ratio << std::defaultfloat
    << std::setprecision(10) << "\n";
  o << "recurrence residual   " << recurrence << "\n";

  bool ok = std::abs(ratio - expected) <= 1e-10 && recurrence < 1e-11;
  if (cfg.n == 2) {
    double worst = 0.0;
    for (double f : {1.0, 1.25, 1.5, 2.0, 3.0}) {
      const double m = f * b.m0;
      const double lam = f == 1.0 ? b.mu2 : radial::lambda_m_disk(2, b.radius, m);
      const double scale = std::max(1.0, m * lam) * kTwoPi * b.radius;
      worst = std::max(worst, std::abs(radial::identity_2bel_check(b.radius, m, lam)) / scale);
    }
    o << "2bel residual         " << worst << "\n";
    ok = ok && worst < 1e-8;
  }
  o << (ok ? "all residual checks passed" : "residual check FAILED") << "\n";
  return ok ? 0 : 1;
}

int cmd_mesh(const RunConfig& cfg, std::ostream& log) {
  validate(cfg);
  const TriMesh mesh = config_mesh(cfg);
  validate_mesh(mesh);
  std::ostringstream os;
  write_mesh(os, mesh);
  emit(cfg, "domain.mesh", os.str(), log);
  const Measures ms = measures(mesh);
  log << std::setprecision(10) << mesh.vertices.size() << " vertices, " << mesh.triangles.size()
      << " triangles, area " << ms.area << ", perimeter " << ms.perimeter << "\n";
  return 0;
}

int run(const RunConfig& cfg, std::ostream& log) {
  if (cfg.command == "threshold-m1") return cmd_threshold_m1(cfg, log);
  if (cfg.command == "threshold-m0") return cmd_threshold_m0(cfg, log);
  if (cfg.command == "sweep") return cmd_sweep(cfg, log);
  if (cfg.command == "solve") return cmd_solve(cfg, log);
  if (cfg.command == "oracle") return cmd_oracle(cfg, log);
  if (cfg.command == "mesh") return cmd_mesh(cfg, log);
  throw UsageError("unknown command '" + cfg.command + "'");
}

}  // namespace insulab::cli
