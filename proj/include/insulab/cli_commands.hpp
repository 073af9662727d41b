#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "insulab/geometry.hpp"

namespace insulab::cli {

/// Bad flags or values; the CLI maps it to exit code 2.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct RunConfig {
  std::string command;
  std::string domain = "disk:1";
  double h = 0.25;
  int refine = 0;
  std::optional<double> m;
  std::vector<double> grid;
  std::string problem = "decay";  ///< solve: "heat" or "decay"
  double tol = 1e-3;
  std::string out = ".";
  int jobs = 1;
  std::uint64_t seed = 0;
  int n = 2;            ///< oracle dimension
  double radius = 1.0;  ///< oracle ball radius
};

/// disk:R, annulus:a,b, square:s, rectangle:w,h, ellipse:a,b,
/// polygon:x0,y0,x1,y1,..., random:sides (seeded by --seed) or file:PATH.
DomainSpec parse_domain(const std::string& text, double h, std::uint64_t seed = 0);
/// a:b:n, n evenly spaced values from a to b.
std::vector<double> parse_grid(const std::string& text);

void validate(const RunConfig& cfg);

/// Mesh of the configured domain after cfg.refine uniform refinements.
TriMesh config_mesh(const RunConfig& cfg);

/// Commands write their files under cfg.out and a summary to `log`. The
/// return value is the process exit code: 0 iff every internal check passed.
int cmd_threshold_m1(const RunConfig& cfg, std::ostream& log);
int cmd_threshold_m0(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_solve(const RunConfig& cfg, std::ostream& log);
int cmd_oracle(const RunConfig& cfg, std::ostream& log);
int cmd_mesh(const RunConfig& cfg, std::ostream& log);

int run(const RunConfig& cfg, std::ostream& log);

/// 1e-3 h^2 P^2 / |Omega|, the level below which a computed m1 is
/// indistinguishable from zero.
double m1_noise_floor(double h, double perimeter, double area);

}  // namespace insulab::cli
