#pragma once

#include <stdexcept>

namespace insulab::radial {

/// Requested m lies outside the radial regime of the decay problem.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Order of J_s. Supported orders are non-negative multiples of 1/2, which
/// covers n/2 - 1 and n/2 for every dimension n.
class BesselOrder {
 public:
  explicit BesselOrder(double s);
  double value() const { return s_; }
  bool is_integer() const;

 private:
  double s_;
};

inline constexpr double kMaxArgument = 60.0;

/// J_s(z) for 0 <= z <= 60, absolute error below 1e-12.
double bessel_j(BesselOrder s, double z);

/// Both evaluation routes of J_s'(z):
///   lowered = -J_{s+1}(z) + s J_s(z) / z
///   raised  =  J_{s-1}(z) - s J_s(z) / z
struct BesselDerivativePaths {
  double lowered;
  double raised;
};
BesselDerivativePaths bessel_j_deriv_paths(BesselOrder s, double z);

/// J_s'(z) from the lowering form, verified against the raising form to 1e-11.
/// At z = 0 the limit value is returned (0 < s < 1 has no finite limit and throws).
double bessel_j_deriv(BesselOrder s, double z);

/// First positive zero of J_s, bracketed by a 0.05 sign scan and bisected.
double bessel_zero(BesselOrder s);

/// p_{n/2,1}: first positive zero of d/dt [t^{1-n/2} J_{n/2}(t)], i.e. of
/// (1 - n/2) J_{n/2}(t) + t J_{n/2}'(t). Scans [0.1, 20].
double first_deriv_zero(int n);

struct BallThresholds {
  int n = 2;
  double radius = 1.0;
  double p = 0.0;          ///< p_{n/2,1}
  double mu2 = 0.0;        ///< second Neumann eigenvalue (p/R)^2
  double lambda_d = 0.0;   ///< first Dirichlet eigenvalue (j_{n/2-1,1}/R)^2
  double volume = 0.0;     ///< |B_R|
  double perimeter = 0.0;  ///< |dB_R|
  double m0 = 0.0;         ///< (n-1)/n * P^2 / (|B_R| mu2)
};
BallThresholds ball_thresholds(int n, double radius);

/// r^{1-n/2} J_{n/2-1}(sqrt(lambda) r)
double radial_profile(int n, double lambda, double r);
/// Radial derivative of radial_profile.
double radial_profile_dr(int n, double lambda, double r);
/// Second radial derivative of radial_profile at r.
double second_normal_derivative(int n, double lambda, double r);

/// Residual of (m lambda - 2 pi) int u + m int u_rr over the circle of radius
/// R, for u = amplitude * J_0(sqrt(lambda) r).
double identity_2bel_check(double radius, double m, double lambda, double amplitude = 1.0);

/// Decay rate of the radial minimiser on the ball of radius R for m >= m0:
/// root in (0, mu2] of sqrt(l) J_{n/2}(sqrt(l) R) = (P/m) J_{n/2-1}(sqrt(l) R).
/// Throws RegimeError for m < m0.
double lambda_m_disk(int n, double radius, double m);

/// Radial torsion-type function on the annulus: -Lap u = 1 with flux
/// -|Omega|/P on both circles, zero mean: u = -r^2/4 + A ln r + B.
struct AnnulusTorsion {
  double inner = 1.0;
  double outer = 2.0;
  double a = 0.0;
  double b = 0.0;
  double value(double r) const;
  double boundary_mean() const;
  double boundary_min() const;
  double delta() const;  ///< boundary mean minus boundary minimum
  double m1() const;     ///< delta * P^2 / |Omega|
};
AnnulusTorsion annulus_torsion(double inner, double outer);
double annulus_u0(double inner, double outer, double r);

/// Zero-mean torsion-type function on the disk: R^2/8 - r^2/4.
double disk_u0(double radius, double r);

}  // namespace insulab::radial
