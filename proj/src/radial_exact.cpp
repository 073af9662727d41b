#include "insulab/radial_exact.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

namespace insulab::radial {

namespace {

constexpr double kPi = std::numbers::pi;

double series(double s, double z) {
  const double q = -0.25 * z * z;
  double term = std::pow(0.5 * z, s) / std::tgamma(s + 1.0);
  double sum = term;
  for (int k = 1; k < 200; ++k) {
    term *= q / (k * (k + s));
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum) && k > 0.5 * z) break;
  }
  return sum;
}

// Miller's backward recurrence normalised by J_0 + 2 sum J_{2k} = 1.
double miller(int order, double z) {
  const int start = 2 * ((std::max(order, static_cast<int>(z)) + 40) / 2);
  double jp1 = 0.0;
  double j = 1e-30;
  double norm = 0.0;
  double wanted = 0.0;
  for (int k = start; k >= 1; --k) {
    const double jm1 = 2.0 * k / z * j - jp1;
    jp1 = j;
    j = jm1;
    // j now holds J_{k-1}
    if (k - 1 == order) wanted = j;
    if ((k - 1) % 2 == 0 && k - 1 > 0) norm += 2.0 * j;
    if (std::abs(j) > 1e250) {
      j *= 1e-250;
      jp1 *= 1e-250;
      norm *= 1e-250;
      wanted *= 1e-250;
    }
  }
  norm += j;  // J_0
  return wanted / norm;
}

// Upward recurrence from the closed spherical forms at orders -1/2 and 1/2.
double half_integer_upward(double s, double z) {
  const double c = std::sqrt(2.0 / (kPi * z));
  double jm = c * std::cos(z);  // J_{-1/2}
  double j = c * std::sin(z);   // J_{1/2}
  for (double nu = 0.5; nu < s - 0.25; nu += 1.0) {
    const double jn = 2.0 * nu / z * j - jm;
    jm = j;
    j = jn;
  }
  return j;
}

// J of order s - 1 for the raised derivative form, including s - 1 < 0.
double lowered_order(double s, double z) {
  if (s >= 1.0) return bessel_j(BesselOrder(s - 1.0), z);
  if (s == 0.0) return -bessel_j(BesselOrder(1.0), z);
  return std::sqrt(2.0 / (kPi * z)) * std::cos(z);  // s = 1/2
}

template <class F>
double bisect(F&& f, double lo, double hi, double flo) {
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

template <class F>
double first_root(F&& f, double start, double stop, double step, const std::string& what) {
  double a = start;
  double fa = f(a);
  while (a < stop) {
    const double b = std::min(a + step, stop);
    const double fb = f(b);
    if (fa == 0.0) return a;
    if ((fa < 0.0) != (fb < 0.0)) return bisect(f, a, b, fa);
    a = b;
    fa = fb;
  }
  throw std::runtime_error("no sign change bracketing " + what + " in [" + std::to_string(start) + ", " + std::to_string(stop) + "]");
}

}  // namespace

BesselOrder::BesselOrder(double s) : s_(s) {
  if (!std::isfinite(s) || s < 0.0) throw std::invalid_argument("Bessel order must be finite and non-negative");
  if (std::abs(2.0 * s - std::round(2.0 * s)) > 1e-12) throw std::invalid_argument("Bessel order must be a multiple of 1/2");
  s_ = 0.5 * std::round(2.0 * s);
}

bool BesselOrder::is_integer() const { return s_ == std::round(s_); }

double bessel_j(BesselOrder order, double z) {
  const double s = order.value();
  if (!(z >= 0.0) || z > kMaxArgument) {
    std::ostringstream os;
    os << "Bessel argument " << z << " outside [0, " << kMaxArgument << "]";
    throw std::out_of_range(os.str());
  }
  if (z == 0.0) return s == 0.0 ? 1.0 : 0.0;
  if (z <= 8.0) return series(s, z);
  if (order.is_integer()) return miller(static_cast<int>(s), z);
  return half_integer_upward(s, z);
}

BesselDerivativePaths bessel_j_deriv_paths(BesselOrder order, double z) {
  const double s = order.value();
  if (!(z > 0.0)) throw std::domain_error("derivative paths need z > 0");
  const double js = bessel_j(order, z);
  return {-bessel_j(BesselOrder(s + 1.0), z) + s * js / z, lowered_order(s, z) - s * js / z};
}

double bessel_j_deriv(BesselOrder order, double z) {
  const double s = order.value();
  if (z == 0.0) {
    if (s == 0.0 || s > 1.0) return 0.0;
    if (s == 1.0) return 0.5;
    throw std::domain_error("J_s'(0) is unbounded for 0 < s < 1");
  }
  const auto d = bessel_j_deriv_paths(order, z);
  if (std::abs(d.lowered - d.raised) > 1e-11) {
    std::ostringstream os;
    os << "Bessel derivative routes disagree at s=" << s << " z=" << z << ": " << d.lowered << " vs " << d.raised;
    throw std::logic_error(os.str());
  }
  return d.lowered;
}

double bessel_zero(BesselOrder order) {
  return first_root([&](double t) { return bessel_j(order, t); }, 0.05, kMaxArgument, 0.05, "first zero of J_s");
}

double first_deriv_zero(int n) {
  if (n < 2) throw std::invalid_argument("dimension must be at least 2");
  const BesselOrder s(0.5 * n);
  auto f = [&](double t) { return (1.0 - 0.5 * n) * bessel_j(s, t) + t * bessel_j_deriv(s, t); };
  return first_root(f, 0.1, 20.0, 0.05, "p_{n/2,1}");
}

BallThresholds ball_thresholds(int n, double radius) {
  if (n < 2) throw std::invalid_argument("dimension must be at least 2");
  if (!(radius > 0.0)) throw std::invalid_argument("radius must be positive");
  BallThresholds bt;
  bt.n = n;
  bt.radius = radius;
  bt.p = first_deriv_zero(n);
  bt.mu2 = (bt.p / radius) * (bt.p / radius);
  const double j = bessel_zero(BesselOrder(0.5 * n - 1.0));
  bt.lambda_d = (j / radius) * (j / radius);
  const double omega = std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n + 1.0);
  bt.volume = omega * std::pow(radius, n);
  bt.perimeter = n * omega * std::pow(radius, n - 1);
  bt.m0 = (n - 1.0) / n * bt.perimeter * bt.perimeter / (bt.volume * bt.mu2);
  return bt;
}

double radial_profile(int n, double lambda, double r) {
  return std::pow(r, 1.0 - 0.5 * n) * bessel_j(BesselOrder(0.5 * n - 1.0), std::sqrt(lambda) * r);
}

double radial_profile_dr(int n, double lambda, double r) {
  const double k = std::sqrt(lambda);
  return -k * std::pow(r, 1.0 - 0.5 * n) * bessel_j(BesselOrder(0.5 * n), k * r);
}

double second_normal_derivative(int n, double lambda, double r) {
  const double k = std::sqrt(lambda);
  const BesselOrder s(0.5 * n);
  return -k * (1.0 - 0.5 * n) * std::pow(r, -0.5 * n) * bessel_j(s, k * r) - lambda * std::pow(r, 1.0 - 0.5 * n) * bessel_j_deriv(s, k * r);
}

double identity_2bel_check(double radius, double m, double lambda, double amplitude) {
  const double circumference = 2.0 * kPi * radius;
  const double u = amplitude * radial_profile(2, lambda, radius);
  const double urr = amplitude * second_normal_derivative(2, lambda, radius);
  return (m * lambda - 2.0 * kPi) * circumference * u + m * circumference * urr;
}

double lambda_m_disk(int n, double radius, double m) {
  const BallThresholds bt = ball_thresholds(n, radius);
  if (!(m > 0.0)) throw std::invalid_argument("m must be positive");
  if (m < bt.m0 * (1.0 - 1e-12)) {
    std::ostringstream os;
    os << "m = " << m << " is below the breaking threshold m0 = " << bt.m0 << "; the radial profile is not a minimiser";
    throw RegimeError(os.str());
  }
  const BesselOrder hi(0.5 * n);
  const BesselOrder lo(0.5 * n - 1.0);
  // scaled by t^{1-n/2} so the t -> 0 limit is finite and negative
  auto g = [&](double t) {
    return std::pow(t, 1.0 - 0.5 * n) * (t / radius * bessel_j(hi, t) - bt.perimeter / m * bessel_j(lo, t));
  };
  const double top = bt.p;
  if (g(top) < 0.0) return bt.mu2;  // m within round-off of m0
  const double t = bisect(g, 0.0, top, -1.0);
  return (t / radius) * (t / radius);
}

double AnnulusTorsion::value(double r) const { return -0.25 * r * r + a * std::log(r) + b; }

double AnnulusTorsion::boundary_mean() const {
  return (inner * value(inner) + outer * value(outer)) / (inner + outer);
}

double AnnulusTorsion::boundary_min() const { return std::min(value(inner), value(outer)); }

double AnnulusTorsion::delta() const { return boundary_mean() - boundary_min(); }

double AnnulusTorsion::m1() const {
  const double perimeter = 2.0 * kPi * (inner + outer);
  const double area = kPi * (outer * outer - inner * inner);
  return delta() * perimeter * perimeter / area;
}

AnnulusTorsion annulus_torsion(double inner, double outer) {
  if (!(inner > 0.0 && inner < outer)) throw std::invalid_argument("annulus radii must satisfy 0 < r_in < r_out");
  AnnulusTorsion t;
  t.inner = inner;
  t.outer = outer;
  // flux -|Omega|/P = -(r_out - r_in)/2 on both circles gives A = r_in r_out / 2
  t.a = 0.5 * inner * outer;
  auto prim = [](double r) { return 0.5 * r * r * std::log(r) - 0.25 * r * r; };
  const double quartic = (std::pow(outer, 4) - std::pow(inner, 4)) / 16.0;
  t.b = (quartic - t.a * (prim(outer) - prim(inner))) / (0.5 * (outer * outer - inner * inner));
  return t;
}

double annulus_u0(double inner, double outer, double r) {
  const AnnulusTorsion t = annulus_torsion(inner, outer);
  if (r < inner || r > outer) throw std::out_of_range("radius outside the annulus");
  return t.value(r);
}

double disk_u0(double radius, double r) { return radius * radius / 8.0 - 0.25 * r * r; }

}  // namespace insulab::radial
