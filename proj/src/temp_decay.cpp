#include "insulab/temp_decay.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace insulab::decay {

namespace {

double reg_boundary(const Discretization& disc, std::span<const double> u, double delta) {
  double s = 0.0;
  for (int i : disc.boundary_vertices) {
    const double v = u[static_cast<std::size_t>(i)];
    s += disc.boundary_weights[static_cast<std::size_t>(i)] * std::sqrt(v * v + delta * delta);
  }
  return s;
}

void m_normalize(const Discretization& disc, ScalarField& u) {
  const double n2 = disc.mass.quadratic_form(u);
  if (!(n2 > 0.0)) throw std::invalid_argument("field has zero L2 norm");
  scale(u, 1.0 / std::sqrt(n2));
}

// Size of the rounding error in the quotient of u; the energy of a nearly
// constant field cancels almost completely.
double quotient_noise(const Discretization& disc, const Vector& kdiag, std::span<const double> u) {
  double s = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) s += std::abs(kdiag[i]) * u[i] * u[i];
  return 1e-12 * s / disc.mass.quadratic_form(u);
}

ScalarField default_perturbation(const Discretization& disc) {
  const auto& v = disc.mesh.vertices;
  ScalarField p(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) p[i] = v[i].x + 0.37 * v[i].y;
  const double shift = disc.integral(p) / disc.area;
  for (auto& x : p) x -= shift;
  return p;
}

}  // namespace

SpectralResult eig_dirichlet(const Discretization& disc) { return eig_smallest(disc, {}, true, 0); }

SpectralResult eig_neumann2(const Discretization& disc) { return eig_smallest(disc, {}, false, 1); }

SpectralResult eig_kappa1(const Discretization& disc) { return eig_smallest(disc, {disc.boundary_weights}, false, 0); }

double decay_quotient(const Discretization& disc, std::span<const double> u, double m) {
  return heat::heat_functional(disc, u, m) / disc.mass.quadratic_form(u);
}

double decay_quotient_regularized(const Discretization& disc, std::span<const double> u, double m, double delta) {
  return heat::heat_functional_regularized(disc, u, m, delta) / disc.mass.quadratic_form(u);
}

double constant_trial_bound(const Discretization& disc, double m) {
  const ScalarField one(disc.mesh.vertices.size(), 1.0);
  return decay_quotient(disc, one, m);
}

DecayMinimizerResult minimize_lambda_m(const Discretization& disc, double m, const DecayOptions& opts) {
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  if (opts.schedule.empty()) throw std::invalid_argument("delta schedule is empty");
  for (std::size_t k = 0; k < opts.schedule.size(); ++k) {
    if (!(opts.schedule[k] > 0.0)) throw std::invalid_argument("delta values must be positive");
    if (k > 0 && !(opts.schedule[k] < opts.schedule[k - 1])) throw std::invalid_argument("delta schedule must be strictly decreasing");
  }
  if (!(opts.damping > 0.0 && opts.damping < 1.0)) throw std::invalid_argument("damping must lie in (0, 1)");
  const std::size_t n = disc.mesh.vertices.size();
  const ScalarField& b = disc.boundary_weights;

  ScalarField u;
  if (opts.initial) {
    u = *opts.initial;
    if (u.size() != n) throw std::invalid_argument("initial field length differs from the vertex count");
  }
  const ScalarField perturbation = opts.perturbation ? *opts.perturbation : default_perturbation(disc);
  if (perturbation.size() != n) throw std::invalid_argument("perturbation length differs from the vertex count");
  if (!opts.initial) {
    const ScalarField& p = perturbation;
    double pmax = 0.0;
    for (double v : p) pmax = std::max(pmax, std::abs(v));
    u.assign(n, 1.0);
    if (pmax > 0.0) axpy(opts.perturbation_amplitude / pmax, p, u);
  }
  m_normalize(disc, u);

  DecayMinimizerResult res;
  res.m = m;
  res.schedule = opts.schedule;
  const SolveOptions inner{1e-11, 0, 1e-7};
  const Vector kdiag = disc.stiffness.diagonal();
  auto run_level = [&](double delta) {
    IterationRecord rec;
    rec.delta = delta;
    double objective = decay_quotient_regularized(disc, u, m, delta);
    bool converged = false;
    std::vector<double> recent;
    for (int it = 1; it <= opts.max_iterations; ++it) {
      const double s = reg_boundary(disc, u, delta);
      ScalarField d(n, 0.0);
      for (int i : disc.boundary_vertices) {
        const auto ii = static_cast<std::size_t>(i);
        d[ii] = s / m * b[ii] / std::sqrt(u[ii] * u[ii] + delta * delta);
      }
      const SparseOperator a = disc.stiffness.plus_diagonal(d);
      const ScalarField rhs = disc.mass * u;
      ScalarField guess = u;
      scale(guess, 1.0 / a.quadratic_form(u));
      ScalarField x = solve_spd(a, rhs, inner, nullptr, guess);
      m_normalize(disc, x);

      double theta = 1.0;
      ScalarField y = x;
      double fy = decay_quotient_regularized(disc, y, m, delta);
      int halvings = 0;
      while (fy > objective && halvings < 40) {
        theta *= opts.damping;
        ++halvings;
        for (std::size_t i = 0; i < n; ++i) y[i] = u[i] + theta * (x[i] - u[i]);
        m_normalize(disc, y);
        fy = decay_quotient_regularized(disc, y, m, delta);
      }
      if (halvings > 0) ++rec.damped_steps;
      recent.push_back(fy);
      if (recent.size() > 8) recent.erase(recent.begin());
      if (fy > objective) {
        if (fy - objective <= 1e-13 * std::abs(objective) + quotient_noise(disc, kdiag, u)) {
          rec.iterations = it;
          converged = true;
          break;
        }
        std::ostringstream os;
        os << "decay iteration failed to decrease at delta=" << delta << " iteration " << it << " after " << halvings
           << " dampings; recent objectives:";
        for (double v : recent) os << ' ' << v;
        throw StagnationError(os.str());
      }
      ScalarField diff = y;
      axpy(-1.0, u, diff);
      const double step = disc.l2_norm(diff);
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
      os << "decay iteration did not converge at delta=" << delta << " within " << opts.max_iterations
         << " iterations; recent objectives:";
      for (double v : recent) os << ' ' << v;
      throw StagnationError(os.str());
    }
    rec.objective = objective;
    res.log.push_back(rec);
  };
  for (double delta : opts.schedule) run_level(delta);

  if (disc.integral(u) < 0.0) scale(u, -1.0);
  double best = decay_quotient(disc, u, m);
  res.source = "iterate";
  {
    ScalarField a = u;
    for (auto& v : a) v = std::abs(v);
    m_normalize(disc, a);
    const double qa = decay_quotient(disc, a, m);
    if (qa < best) {
      best = qa;
      u = std::move(a);
    }
  }
  auto consider = [&](ScalarField c, const char* tag) {
    if (c.size() != n) throw std::invalid_argument("candidate length differs from the vertex count");
    if (disc.integral(c) < 0.0) scale(c, -1.0);
    m_normalize(disc, c);
    const double q = decay_quotient(disc, c, m);
    if (q < best) {
      best = q;
      u = std::move(c);
      res.source = tag;
    }
  };
  {
    const RefineResult rr = active_set_refine(disc, m, u, opts.vanishing_tol);
    res.refine_iterations = rr.iterations;
    res.refine_converged = rr.converged;
    consider(rr.u, "refined");
  }
  consider(ScalarField(n, 1.0), "constant");
  for (const auto& c : opts.candidates) consider(c, "candidate");

  res.u = std::move(u);
  res.lambda_m = decay_quotient(disc, res.u, m);
  res.trace = heat::boundary_trace(disc, res.u);
  res.vanishing = heat::vanishing_set(disc, res.u, opts.vanishing_tol);
  res.min_trace = disc.min_on_boundary(res.u);
  return res;
}

RefineResult active_set_refine(const Discretization& disc, double m, std::span<const double> start, double zero_tol,
                               int max_iterations) {
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  const std::size_t n = disc.mesh.vertices.size();
  if (start.size() != n) throw std::invalid_argument("start field length differs from the vertex count");
  const ScalarField& b = disc.boundary_weights;
  std::vector<Triplet> outer;
  outer.reserve(disc.boundary_vertices.size() * disc.boundary_vertices.size());
  for (int i : disc.boundary_vertices)
    for (int j : disc.boundary_vertices)
      outer.push_back({i, j, b[static_cast<std::size_t>(i)] * b[static_cast<std::size_t>(j)] / m});
  const SparseOperator q = disc.stiffness.plus_scaled(SparseOperator::from_triplets(static_cast<int>(n), std::move(outer)), 1.0);

  std::vector<bool> zero(n, false);
  const double cut = zero_tol * disc.max_abs_on_boundary(start);
  for (int i : disc.boundary_vertices) {
    const double v = start[static_cast<std::size_t>(i)];
    zero[static_cast<std::size_t>(i)] = v <= cut;
  }

  RefineResult rr;
  rr.lambda = std::numeric_limits<double>::infinity();
  ScalarField guess(start.begin(), start.end());
  std::vector<std::vector<bool>> seen;
  // best boundary-nonnegative state and its pending single releases
  std::vector<bool> best_zero;
  std::vector<int> pending;
  for (int it = 1; it <= max_iterations; ++it) {
    rr.iterations = it;
    seen.push_back(zero);
    EigenOptions eo;
    eo.fixed_zero = zero;
    eo.initial = {guess};
    const SpectralResult sr = eig_smallest(q, disc.mass, eo);
    ScalarField u = sr.eigenfunction;
    if (disc.boundary_integral(u) < 0.0 || (disc.boundary_integral(u) == 0.0 && disc.integral(u) < 0.0)) scale(u, -1.0);
    double umax = 0.0;
    for (double v : u) umax = std::max(umax, std::abs(v));
    std::vector<int> negative;
    for (int i : disc.boundary_vertices)
      if (!zero[static_cast<std::size_t>(i)] && u[static_cast<std::size_t>(i)] < -1e-12 * umax) negative.push_back(i);

    std::vector<bool> next = zero;
    if (negative.empty()) {
      const ScalarField qu = q * u;
      const ScalarField mu = disc.mass * u;
      double gscale = 0.0;
      for (double v : qu) gscale = std::max(gscale, std::abs(v));
      std::vector<std::pair<double, int>> release;  // multiplier of u_i >= 0 below zero
      for (int i : disc.boundary_vertices) {
        const auto ii = static_cast<std::size_t>(i);
        const double g = qu[ii] - sr.eigenvalue * mu[ii];
        if (zero[ii] && g < -1e-9 * gscale) release.emplace_back(g / gscale, i);
      }
      std::sort(release.begin(), release.end());
      const double value = decay_quotient(disc, u, m);
      if (value < rr.lambda) {
        rr.lambda = value;
        rr.u = u;
        rr.kkt_violation = release.empty() ? 0.0 : -release.front().first;
        best_zero = zero;
        pending.clear();
        for (const auto& r : release) pending.push_back(r.second);
      }
      if (release.empty()) {
        rr.converged = true;
        rr.u = u;
        rr.lambda = value;
        rr.kkt_violation = 0.0;
        break;
      }
      for (const auto& r : release) next[static_cast<std::size_t>(r.second)] = false;
      guess = u;
    } else if (best_zero.empty()) {
      for (int i : negative) next[static_cast<std::size_t>(i)] = true;
      guess = u;
    } else {
      next.clear();
    }
    if (next.empty() || std::find(seen.begin(), seen.end(), next) != seen.end()) {
      // bulk update failed; release one vertex of the best state at a time
      next.clear();
      while (!pending.empty() && next.empty()) {
        std::vector<bool> trial = best_zero;
        trial[static_cast<std::size_t>(pending.front())] = false;
        pending.erase(pending.begin());
        if (std::find(seen.begin(), seen.end(), trial) == seen.end()) next = std::move(trial);
      }
      if (next.empty()) break;
      guess = rr.u;
    }
    zero = std::move(next);
  }
  if (rr.u.empty()) {
    rr.u.assign(start.begin(), start.end());
    rr.lambda = decay_quotient(disc, rr.u, m);
  }
  return rr;
}

M0Report threshold_m0(const Discretization& disc, double tol, const DecayOptions& opts) {
  if (!(tol > 0.0 && tol < 1.0)) throw std::invalid_argument("tolerance must lie in (0, 1)");
  M0Report rep;
  rep.tol = tol;
  rep.h = max_edge_length(disc.mesh);
  const SpectralResult k1 = eig_kappa1(disc);
  rep.kappa1 = k1.eigenvalue;
  rep.mu2 = eig_neumann2(disc).eigenvalue;
  rep.lambda_d = eig_dirichlet(disc).eigenvalue;

  DecayOptions o = opts;
  if (!o.perturbation) o.perturbation = k1.eigenfunction;
  const double base = disc.perimeter * disc.perimeter / (rep.kappa1 * disc.area);
  double hi = 10.0 * base;
  double lo = 1e-2 * base;

  ScalarField u_lo;
  ScalarField u_hi;
  auto eval = [&](double m) {
    DecayOptions oo = o;
    if (!u_lo.empty()) oo.candidates.push_back(u_lo);
    if (!u_hi.empty()) oo.candidates.push_back(u_hi);
    return minimize_lambda_m(disc, m, oo);
  };

  // the constant field already certifies lambda < kappa1 at the top end
  const double top_bound = constant_trial_bound(disc, hi);
  if (!(top_bound < rep.kappa1)) {
    std::ostringstream os;
    os << "upper bracket m=" << hi << " has constant-trial bound " << top_bound << " >= kappa1 " << rep.kappa1;
    throw BracketError(os.str());
  }
  {
    const DecayMinimizerResult r = eval(hi);
    u_hi = r.u;
    rep.history.push_back({lo, hi, hi, r.lambda_m});
  }
  for (int attempt = 0;; ++attempt) {
    const DecayMinimizerResult r = eval(lo);
    rep.history.push_back({lo, hi, lo, r.lambda_m});
    if (r.lambda_m > rep.kappa1) {
      u_lo = r.u;
      break;
    }
    if (attempt == 4) {
      std::ostringstream os;
      os << "lambda_m never exceeds kappa1=" << rep.kappa1 << ": lambda(" << lo << ")=" << r.lambda_m
         << ", lambda(" << hi << ")=" << rep.history.front().lambda_m;
      throw BracketError(os.str());
    }
    lo *= 0.1;
  }
  while (hi - lo >= tol * std::sqrt(lo * hi)) {
    const double mid = std::sqrt(lo * hi);
    const DecayMinimizerResult r = eval(mid);
    rep.history.push_back({lo, hi, mid, r.lambda_m});
    if (r.lambda_m > rep.kappa1) {
      lo = mid;
      u_lo = r.u;
    } else {
      hi = mid;
      u_hi = r.u;
    }
  }
  rep.m0 = std::sqrt(lo * hi);
  return rep;
}

M0Report threshold_m0_pair(const TriMesh& mesh, double tol, const DecayOptions& opts) {
  M0Report coarse;
  {
    const Discretization disc(mesh);
    coarse = threshold_m0(disc, tol, opts);
  }
  const TriMesh fine_mesh = refine(mesh);
  const Discretization fine(fine_mesh);
  const M0Report f = threshold_m0(fine, tol, opts);
  coarse.m0_refined = f.m0;
  coarse.kappa1_refined = f.kappa1;
  coarse.mu2_refined = f.mu2;
  coarse.lambda_d_refined = f.lambda_d;
  coarse.h_refined = f.h;
  return coarse;
}

std::vector<ScanRow> breaking_scan(const Discretization& disc, const std::vector<double>& grid, int jobs,
                                   const DecayOptions& opts, std::vector<DecayMinimizerResult>* details) {
  for (double m : grid)
    if (!(m > 0.0)) throw std::invalid_argument("scan values of m must be positive");
  const std::size_t count = grid.size();
  std::vector<DecayMinimizerResult> results(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= count) return;
      try {
        results[k] = minimize_lambda_m(disc, grid[k], opts);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int threads = std::max(1, std::min<int>(jobs, static_cast<int>(count)));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  // a minimiser for smaller m is admissible for larger m and scores no worse there
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t c) { return grid[a] < grid[c]; });
  for (std::size_t j = 1; j < count; ++j) {
    const std::size_t prev = order[j - 1];
    const std::size_t cur = order[j];
    const double q = decay_quotient(disc, results[prev].u, grid[cur]);
    if (q < results[cur].lambda_m) {
      DecayMinimizerResult& r = results[cur];
      r.u = results[prev].u;
      r.lambda_m = q;
      r.source = "candidate";
      r.trace = heat::boundary_trace(disc, r.u);
      r.vanishing = heat::vanishing_set(disc, r.u, opts.vanishing_tol);
      r.min_trace = disc.min_on_boundary(r.u);
    }
  }

  std::vector<ScanRow> rows(count);
  for (std::size_t k = 0; k < count; ++k)
    rows[k] = {grid[k], results[k].lambda_m, results[k].vanishing.measure, results[k].min_trace};
  if (details) *details = std::move(results);
  return rows;
}

}  // namespace insulab::decay
