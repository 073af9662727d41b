#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace insulab {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Disk of radius `radius` centred at the origin.
struct Disk {
  double radius = 1.0;
};

/// Annulus r_in < |x| < r_out centred at the origin.
struct Annulus {
  double inner = 1.0;
  double outer = 2.0;
};

/// Simple polygon, vertices in counterclockwise order.
struct Polygon {
  std::vector<Point> vertices;
};

/// Ellipse x^2/a^2 + y^2/b^2 < 1.
struct Ellipse {
  double a = 1.0;
  double b = 1.0;
};

using DomainShape = std::variant<Disk, Annulus, Polygon, Ellipse>;

struct DomainSpec {
  DomainShape shape;
  double target_edge_length = 0.25;
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct BoundaryEdge {
  std::array<int, 2> v{};  // oriented with the domain on the left
  int component = 0;       // 0 is the outer loop
};

/// Conforming P1 triangulation. Triangles are counterclockwise; boundary
/// edges are stored loop by loop in traversal order.
struct TriMesh {
  std::vector<Point> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  DomainSpec domain;

  int num_components() const;
};

struct Measures {
  double area = 0.0;
  double perimeter = 0.0;
  std::vector<double> component_perimeters;
};

// Domain helpers.
DomainSpec disk(double radius, double h);
DomainSpec annulus(double inner, double outer, double h);
DomainSpec ellipse(double a, double b, double h);
DomainSpec rectangle(double width, double height, double h);
DomainSpec square(double side, double h);
DomainSpec polygon(std::vector<Point> vertices, double h);
/// Random convex polygon with `sides` vertices inscribed in the unit circle;
/// deterministic for a given seed.
DomainSpec random_convex_polygon(std::uint64_t seed, int sides, double h);

/// Dilation of the domain (and its target edge length) by factor t > 0.
DomainSpec scaled(const DomainSpec& spec, double t);

/// Throws MeshError when the spec violates its invariants.
void validate_domain(const DomainSpec& spec);
std::string describe(const DomainSpec& spec);

TriMesh build_mesh(const DomainSpec& spec);
/// Uniform red refinement; boundary midpoints of curved domains are moved
/// onto the exact curve.
TriMesh refine(const TriMesh& mesh);
TriMesh refine(const TriMesh& mesh, int times);

Measures measures(const TriMesh& mesh);

/// Throws MeshError describing the first violated mesh invariant.
void validate_mesh(const TriMesh& mesh);

double max_edge_length(const TriMesh& mesh);
double diameter(const TriMesh& mesh);
int count_edges(const TriMesh& mesh);

double signed_area(const Point& a, const Point& b, const Point& c);

/// Per-vertex flag, true on the boundary.
std::vector<bool> boundary_mask(const TriMesh& mesh);
/// Boundary vertex ids in loop order, one list per component.
std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh);

}  // namespace insulab
