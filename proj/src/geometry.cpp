#include "insulab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <unordered_map>

namespace insulab {

namespace {

constexpr double kPi = std::numbers::pi;

std::uint64_t edge_key(int a, int b) {
  const auto lo = static_cast<std::uint64_t>(std::min(a, b));
  const auto hi = static_cast<std::uint64_t>(std::max(a, b));
  return (lo << 32) | hi;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

double polygon_signed_area(const std::vector<Point>& pts) {
  double s = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Point& p = pts[i];
    const Point& q = pts[(i + 1) % pts.size()];
    s += p.x * q.y - q.x * p.y;
  }
  return 0.5 * s;
}

bool segments_intersect(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  auto orient = [](const Point& a, const Point& b, const Point& c) {
    const double v = signed_area(a, b, c);
    return (v > 0.0) - (v < 0.0);
  };
  auto on_segment = [](const Point& a, const Point& b, const Point& c) {
    return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
           c.y <= std::max(a.y, b.y);
  };
  const int o1 = orient(p1, p2, q1);
  const int o2 = orient(p1, p2, q2);
  const int o3 = orient(q1, q2, p1);
  const int o4 = orient(q1, q2, p2);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(p1, p2, q1)) return true;
  if (o2 == 0 && on_segment(p1, p2, q2)) return true;
  if (o3 == 0 && on_segment(q1, q2, p1)) return true;
  if (o4 == 0 && on_segment(q1, q2, p2)) return true;
  return false;
}

double min_angle(const Point& a, const Point& b, const Point& c) {
  const double la = distance(b, c);
  const double lb = distance(a, c);
  const double lc = distance(a, b);
  auto angle = [](double opp, double s1, double s2) {
    return std::acos(std::clamp((s1 * s1 + s2 * s2 - opp * opp) / (2.0 * s1 * s2), -1.0, 1.0));
  };
  return std::min({angle(la, lb, lc), angle(lb, la, lc), angle(lc, la, lb)});
}

bool point_in_triangle(const Point& p, const Point& a, const Point& b, const Point& c) {
  return signed_area(a, b, p) >= 0.0 && signed_area(b, c, p) >= 0.0 && signed_area(c, a, p) >= 0.0;
}

// Ear clipping; at each step the ear with the largest minimum angle is cut.
std::vector<std::array<int, 3>> ear_clip(const std::vector<Point>& pts) {
  std::vector<int> idx(pts.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<int>(i);
  std::vector<std::array<int, 3>> tris;
  while (idx.size() > 3) {
    const std::size_t n = idx.size();
    double best_quality = -1.0;
    std::size_t best = n;
    for (std::size_t i = 0; i < n; ++i) {
      const int ia = idx[(i + n - 1) % n];
      const int ib = idx[i];
      const int ic = idx[(i + 1) % n];
      if (signed_area(pts[ia], pts[ib], pts[ic]) <= 0.0) continue;
      bool blocked = false;
      for (std::size_t j = 0; j < n && !blocked; ++j) {
        const int k = idx[j];
        if (k == ia || k == ib || k == ic) continue;
        blocked = point_in_triangle(pts[k], pts[ia], pts[ib], pts[ic]);
      }
      if (blocked) continue;
      const double q = min_angle(pts[ia], pts[ib], pts[ic]);
      if (q > best_quality) {
        best_quality = q;
        best = i;
      }
    }
    if (best == n) throw MeshError("ear clipping failed: polygon is not simple");
    tris.push_back({idx[(best + n - 1) % n], idx[best], idx[(best + 1) % n]});
    idx.erase(idx.begin() + static_cast<std::ptrdiff_t>(best));
  }
  tris.push_back({idx[0], idx[1], idx[2]});
  return tris;
}

// Rebuilds boundary_edges from the triangle list: edges used once, grouped into
// loops, components ordered by decreasing enclosed area (outer loop first).
void finalize_boundary(TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> count;
  count.reserve(mesh.triangles.size() * 3);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) ++count[edge_key(t[k], t[(k + 1) % 3])];

  std::unordered_map<int, int> next;  // boundary vertex -> successor
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      if (count[edge_key(a, b)] == 1) {
        if (!next.emplace(a, b).second) throw MeshError("boundary is not a manifold curve");
      }
    }

  std::vector<int> starts;
  starts.reserve(next.size());
  for (const auto& [a, b] : next) starts.push_back(a);
  std::sort(starts.begin(), starts.end());

  std::vector<std::vector<int>> loops;
  std::unordered_map<int, bool> visited;
  for (int s : starts) {
    if (visited[s]) continue;
    std::vector<int> loop;
    int v = s;
    do {
      visited[v] = true;
      loop.push_back(v);
      v = next.at(v);
    } while (v != s);
    loops.push_back(std::move(loop));
  }

  auto loop_area = [&](const std::vector<int>& loop) {
    std::vector<Point> pts;
    pts.reserve(loop.size());
    for (int v : loop) pts.push_back(mesh.vertices[static_cast<std::size_t>(v)]);
    return std::abs(polygon_signed_area(pts));
  };
  std::stable_sort(loops.begin(), loops.end(), [&](const auto& l, const auto& r) { return loop_area(l) > loop_area(r); });

  mesh.boundary_edges.clear();
  for (std::size_t c = 0; c < loops.size(); ++c) {
    const auto& loop = loops[c];
    for (std::size_t i = 0; i < loop.size(); ++i)
      mesh.boundary_edges.push_back({{loop[i], loop[(i + 1) % loop.size()]}, static_cast<int>(c)});
  }
}

// Triangulates the strip between two concentric point rings, both ordered by
// increasing polar angle starting at angle 0.
void stitch_rings(const std::vector<int>& inner, const std::vector<double>& inner_angle, const std::vector<int>& outer,
                  const std::vector<double>& outer_angle, std::vector<std::array<int, 3>>& tris) {
  const std::size_t ni = inner.size();
  const std::size_t no = outer.size();
  if (ni == 1) {
    for (std::size_t j = 0; j < no; ++j) tris.push_back({inner[0], outer[j], outer[(j + 1) % no]});
    return;
  }
  auto angle_at = [](const std::vector<double>& a, std::size_t i) { return i < a.size() ? a[i] : a[i - a.size()] + 2.0 * kPi; };
  std::size_t i = 0;
  std::size_t o = 0;
  while (i < ni || o < no) {
    const bool advance_outer = (i == ni) || (o < no && angle_at(outer_angle, o + 1) <= angle_at(inner_angle, i + 1));
    if (advance_outer) {
      tris.push_back({inner[i % ni], outer[o % no], outer[(o + 1) % no]});
      ++o;
    } else {
      tris.push_back({inner[i % ni], outer[o % no], inner[(i + 1) % ni]});
      ++i;
    }
  }
}

TriMesh ring_mesh(const std::vector<double>& radii, const std::vector<int>& counts) {
  TriMesh mesh;
  std::vector<std::vector<int>> rings;
  std::vector<std::vector<double>> angles;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    std::vector<int> ids;
    std::vector<double> ang;
    const int n = counts[k];
    for (int j = 0; j < n; ++j) {
      const double theta = 2.0 * kPi * j / n;
      ids.push_back(static_cast<int>(mesh.vertices.size()));
      ang.push_back(theta);
      if (radii[k] == 0.0) {
        mesh.vertices.push_back({0.0, 0.0});
      } else {
        mesh.vertices.push_back({radii[k] * std::cos(theta), radii[k] * std::sin(theta)});
      }
    }
    rings.push_back(std::move(ids));
    angles.push_back(std::move(ang));
  }
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) stitch_rings(rings[k], angles[k], rings[k + 1], angles[k + 1], mesh.triangles);
  return mesh;
}

TriMesh unit_disk_rings(int layers) {
  std::vector<double> radii;
  std::vector<int> counts;
  for (int k = 0; k <= layers; ++k) {
    radii.push_back(static_cast<double>(k) / layers);
    counts.push_back(k == 0 ? 1 : 6 * k);
  }
  return ring_mesh(radii, counts);
}

// Every ring carries the same number of points, alternately offset by half a
// step, so the mesh is invariant under rotation by 2 pi / count. A leading
// zero radius becomes a single centre vertex.
TriMesh web_rings(const std::vector<double>& radii, int count) {
  TriMesh mesh;
  std::vector<std::vector<int>> rings;
  std::vector<std::vector<double>> angles;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    std::vector<int> ids;
    std::vector<double> ang;
    if (radii[k] == 0.0) {
      ids.push_back(static_cast<int>(mesh.vertices.size()));
      ang.push_back(0.0);
      mesh.vertices.push_back({0.0, 0.0});
    } else {
      for (int j = 0; j < count; ++j) {
        const double theta = 2.0 * kPi * (j + 0.5 * static_cast<double>(k % 2)) / count;
        ids.push_back(static_cast<int>(mesh.vertices.size()));
        ang.push_back(theta);
        mesh.vertices.push_back({radii[k] * std::cos(theta), radii[k] * std::sin(theta)});
      }
    }
    rings.push_back(std::move(ids));
    angles.push_back(std::move(ang));
  }
  for (std::size_t k = 0; k + 1 < rings.size(); ++k) stitch_rings(rings[k], angles[k], rings[k + 1], angles[k + 1], mesh.triangles);
  return mesh;
}

TriMesh mesh_polygon(const std::vector<Point>& pts, double h) {
  const auto coarse = ear_clip(pts);
  double longest = 0.0;
  for (const auto& t : coarse)
    for (int k = 0; k < 3; ++k) longest = std::max(longest, distance(pts[static_cast<std::size_t>(t[k])], pts[static_cast<std::size_t>(t[(k + 1) % 3])]));
  const int n = std::max(1, static_cast<int>(std::ceil(longest / h - 1e-9)));

  TriMesh mesh;
  mesh.vertices = pts;
  std::map<std::tuple<int, int, int>, int> edge_points;
  auto on_edge = [&](int g1, int g2, int pos) {
    if (pos == 0) return g1;
    if (pos == n) return g2;
    if (g1 > g2) {
      std::swap(g1, g2);
      pos = n - pos;
    }
    const auto key = std::make_tuple(g1, g2, pos);
    if (auto it = edge_points.find(key); it != edge_points.end()) return it->second;
    const Point& a = pts[static_cast<std::size_t>(g1)];
    const Point& b = pts[static_cast<std::size_t>(g2)];
    const double s = static_cast<double>(pos) / n;
    const int id = static_cast<int>(mesh.vertices.size());
    mesh.vertices.push_back({a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)});
    edge_points.emplace(key, id);
    return id;
  };

  for (const auto& t : coarse) {
    const Point& A = pts[static_cast<std::size_t>(t[0])];
    const Point& B = pts[static_cast<std::size_t>(t[1])];
    const Point& C = pts[static_cast<std::size_t>(t[2])];
    // lattice (i, j): A + i/n (B - A) + j/n (C - A)
    std::vector<std::vector<int>> lat(static_cast<std::size_t>(n + 1));
    for (int i = 0; i <= n; ++i) {
      lat[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(n + 1 - i));
      for (int j = 0; i + j <= n; ++j) {
        int id;
        if (j == 0) {
          id = on_edge(t[0], t[1], i);
        } else if (i == 0) {
          id = on_edge(t[0], t[2], j);
        } else if (i + j == n) {
          id = on_edge(t[1], t[2], j);
        } else {
          const double s = static_cast<double>(i) / n;
          const double r = static_cast<double>(j) / n;
          id = static_cast<int>(mesh.vertices.size());
          mesh.vertices.push_back({A.x + s * (B.x - A.x) + r * (C.x - A.x), A.y + s * (B.y - A.y) + r * (C.y - A.y)});
        }
        lat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = id;
      }
    }
    auto at = [&](int i, int j) { return lat[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]; };
    for (int i = 0; i < n; ++i)
      for (int j = 0; i + j < n; ++j) {
        mesh.triangles.push_back({at(i, j), at(i + 1, j), at(i, j + 1)});
        if (i + j < n - 1) mesh.triangles.push_back({at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
      }
  }
  return mesh;
}

Point project_to_curve(const DomainSpec& spec, const Point& p, int component) {
  return std::visit(
      [&](const auto& s) -> Point {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          const double r = std::hypot(p.x, p.y);
          return {p.x * s.radius / r, p.y * s.radius / r};
        } else if constexpr (std::is_same_v<T, Annulus>) {
          const double target = component == 0 ? s.outer : s.inner;
          const double r = std::hypot(p.x, p.y);
          return {p.x * target / r, p.y * target / r};
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const double f = std::sqrt(p.x * p.x / (s.a * s.a) + p.y * p.y / (s.b * s.b));
          return {p.x / f, p.y / f};
        } else {
          return p;
        }
      },
      spec.shape);
}

}  // namespace

int TriMesh::num_components() const {
  int c = 0;
  for (const auto& e : boundary_edges) c = std::max(c, e.component + 1);
  return c;
}

double signed_area(const Point& a, const Point& b, const Point& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

DomainSpec disk(double radius, double h) { return {Disk{radius}, h}; }
DomainSpec annulus(double inner, double outer, double h) { return {Annulus{inner, outer}, h}; }
DomainSpec ellipse(double a, double b, double h) { return {Ellipse{a, b}, h}; }
DomainSpec rectangle(double width, double height, double h) {
  return {Polygon{{{0.0, 0.0}, {width, 0.0}, {width, height}, {0.0, height}}}, h};
}
DomainSpec square(double side, double h) { return rectangle(side, side, h); }
DomainSpec polygon(std::vector<Point> vertices, double h) { return {Polygon{std::move(vertices)}, h}; }

DomainSpec random_convex_polygon(std::uint64_t seed, int sides, double h) {
  if (sides < 3) throw MeshError("random polygon needs at least 3 sides");
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  for (int k = 0; k < sides; ++k) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double theta = 2.0 * kPi * (k + 0.7 * u) / sides;
    pts.push_back({std::cos(theta), std::sin(theta)});
  }
  return {Polygon{std::move(pts)}, h};
}

DomainSpec scaled(const DomainSpec& spec, double t) {
  DomainSpec out = spec;
  out.target_edge_length *= t;
  std::visit(
      [&](auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          s.radius *= t;
        } else if constexpr (std::is_same_v<T, Annulus>) {
          s.inner *= t;
          s.outer *= t;
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          s.a *= t;
          s.b *= t;
        } else {
          for (auto& p : s.vertices) {
            p.x *= t;
            p.y *= t;
          }
        }
      },
      out.shape);
  return out;
}

void validate_domain(const DomainSpec& spec) {
  if (!(spec.target_edge_length > 0.0) || !std::isfinite(spec.target_edge_length))
    throw MeshError("target edge length must be positive");
  std::visit(
      [](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          if (!(s.radius > 0.0)) throw MeshError("disk radius must be positive");
        } else if constexpr (std::is_same_v<T, Annulus>) {
          if (!(s.inner > 0.0 && s.inner < s.outer)) throw MeshError("annulus needs 0 < r_in < r_out");
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          if (!(s.a > 0.0 && s.b > 0.0)) throw MeshError("ellipse semi-axes must be positive");
        } else {
          const auto& v = s.vertices;
          const std::size_t n = v.size();
          if (n < 3) throw MeshError("polygon needs at least 3 vertices");
          for (const auto& p : v)
            if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw MeshError("polygon vertex is not finite");
          const double area = polygon_signed_area(v);
          if (area == 0.0) throw MeshError("polygon has zero area");
          if (area < 0.0) throw MeshError("polygon vertices must be counterclockwise");
          for (std::size_t i = 0; i < n; ++i) {
            if (distance(v[i], v[(i + 1) % n]) == 0.0) throw MeshError("polygon has repeated vertex " + std::to_string(i));
            for (std::size_t j = i + 1; j < n; ++j) {
              const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
              if (adjacent) continue;
              if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) {
                std::ostringstream os;
                os << "polygon is self-intersecting: edges " << i << " and " << j << " cross";
                throw MeshError(os.str());
              }
            }
          }
        }
      },
      spec.shape);
}

std::string describe(const DomainSpec& spec) {
  std::ostringstream os;
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          os << "disk(" << s.radius << ")";
        } else if constexpr (std::is_same_v<T, Annulus>) {
          os << "annulus(" << s.inner << "," << s.outer << ")";
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          os << "ellipse(" << s.a << "," << s.b << ")";
        } else {
          os << "polygon(" << s.vertices.size() << " vertices)";
        }
      },
      spec.shape);
  os << " h=" << spec.target_edge_length;
  return os.str();
}

TriMesh build_mesh(const DomainSpec& spec) {
  validate_domain(spec);
  const double h = spec.target_edge_length;
  TriMesh mesh = std::visit(
      [h](const auto& s) -> TriMesh {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          const int layers = std::max(1, static_cast<int>(std::ceil(s.radius / h - 1e-9)));
          const int count = std::max(6, static_cast<int>(std::ceil(2.0 * kPi * s.radius / h - 1e-9)));
          std::vector<double> radii;
          for (int k = 0; k <= layers; ++k) radii.push_back(s.radius * k / layers);
          return web_rings(radii, count);
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          const int layers = std::max(1, static_cast<int>(std::ceil(std::max(s.a, s.b) / h - 1e-9)));
          TriMesh m = unit_disk_rings(layers);
          for (auto& p : m.vertices) {
            p.x *= s.a;
            p.y *= s.b;
          }
          return m;
        } else if constexpr (std::is_same_v<T, Annulus>) {
          const int layers = std::max(1, static_cast<int>(std::ceil((s.outer - s.inner) / h - 1e-9)));
          std::vector<double> radii;
          std::vector<int> counts;
          for (int k = 0; k <= layers; ++k) {
            const double r = s.inner + (s.outer - s.inner) * k / layers;
            radii.push_back(r);
            counts.push_back(std::max(6, static_cast<int>(std::ceil(2.0 * kPi * r / h - 1e-9))));
          }
          // thin inner cells are tolerable up to a radius ratio of 4
          if (s.outer <= 4.0 * s.inner) return web_rings(radii, counts.back());
          return ring_mesh(radii, counts);
        } else {
          return mesh_polygon(s.vertices, h);
        }
      },
      spec.shape);
  mesh.domain = spec;
  finalize_boundary(mesh);
  return mesh;
}

TriMesh refine(const TriMesh& mesh) {
  TriMesh out;
  out.domain = mesh.domain;
  out.vertices = mesh.vertices;
  std::unordered_map<std::uint64_t, int> boundary_component;
  for (const auto& e : mesh.boundary_edges) boundary_component[edge_key(e.v[0], e.v[1])] = e.component;

  std::unordered_map<std::uint64_t, int> midpoint;
  midpoint.reserve(mesh.triangles.size() * 2);
  auto mid = [&](int a, int b) {
    const auto key = edge_key(a, b);
    if (auto it = midpoint.find(key); it != midpoint.end()) return it->second;
    const Point& pa = mesh.vertices[static_cast<std::size_t>(a)];
    const Point& pb = mesh.vertices[static_cast<std::size_t>(b)];
    Point m{0.5 * (pa.x + pb.x), 0.5 * (pa.y + pb.y)};
    if (auto bc = boundary_component.find(key); bc != boundary_component.end()) m = project_to_curve(mesh.domain, m, bc->second);
    const int id = static_cast<int>(out.vertices.size());
    out.vertices.push_back(m);
    midpoint.emplace(key, id);
    return id;
  };

  out.triangles.reserve(mesh.triangles.size() * 4);
  for (const auto& t : mesh.triangles) {
    const int ab = mid(t[0], t[1]);
    const int bc = mid(t[1], t[2]);
    const int ca = mid(t[2], t[0]);
    out.triangles.push_back({t[0], ab, ca});
    out.triangles.push_back({ab, t[1], bc});
    out.triangles.push_back({ca, bc, t[2]});
    out.triangles.push_back({ab, bc, ca});
  }
  out.boundary_edges.reserve(mesh.boundary_edges.size() * 2);
  for (const auto& e : mesh.boundary_edges) {
    const int m = midpoint.at(edge_key(e.v[0], e.v[1]));
    out.boundary_edges.push_back({{e.v[0], m}, e.component});
    out.boundary_edges.push_back({{m, e.v[1]}, e.component});
  }
  return out;
}

TriMesh refine(const TriMesh& mesh, int times) {
  TriMesh out = mesh;
  for (int i = 0; i < times; ++i) out = refine(out);
  return out;
}

Measures measures(const TriMesh& mesh) {
  Measures m;
  for (const auto& t : mesh.triangles)
    m.area += signed_area(mesh.vertices[static_cast<std::size_t>(t[0])], mesh.vertices[static_cast<std::size_t>(t[1])],
                          mesh.vertices[static_cast<std::size_t>(t[2])]);
  m.component_perimeters.assign(static_cast<std::size_t>(mesh.num_components()), 0.0);
  for (const auto& e : mesh.boundary_edges) {
    const double len = distance(mesh.vertices[static_cast<std::size_t>(e.v[0])], mesh.vertices[static_cast<std::size_t>(e.v[1])]);
    m.perimeter += len;
    m.component_perimeters[static_cast<std::size_t>(e.component)] += len;
  }
  return m;
}

void validate_mesh(const TriMesh& mesh) {
  const auto nv = static_cast<int>(mesh.vertices.size());
  if (nv < 3 || mesh.triangles.empty()) throw MeshError("mesh is empty");
  for (const auto& p : mesh.vertices)
    if (!std::isfinite(p.x) || !std::isfinite(p.y)) throw MeshError("non-finite vertex coordinate");

  std::unordered_map<std::uint64_t, int> directed;
  std::unordered_map<std::uint64_t, int> undirected;
  for (std::size_t ti = 0; ti < mesh.triangles.size(); ++ti) {
    const auto& t = mesh.triangles[ti];
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || t[k] >= nv) throw MeshError("triangle " + std::to_string(ti) + " has an out-of-range vertex");
    if (!(signed_area(mesh.vertices[static_cast<std::size_t>(t[0])], mesh.vertices[static_cast<std::size_t>(t[1])],
                      mesh.vertices[static_cast<std::size_t>(t[2])]) > 0.0))
      throw MeshError("triangle " + std::to_string(ti) + " has non-positive signed area");
    for (int k = 0; k < 3; ++k) {
      const int a = t[k];
      const int b = t[(k + 1) % 3];
      const auto dkey = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint64_t>(b);
      if (++directed[dkey] > 1) throw MeshError("inconsistent triangle orientation");
      ++undirected[edge_key(a, b)];
    }
  }
  std::size_t boundary_count = 0;
  for (const auto& [key, c] : undirected) {
    if (c > 2) throw MeshError("edge shared by more than two triangles");
    if (c == 1) ++boundary_count;
  }
  if (boundary_count != mesh.boundary_edges.size()) throw MeshError("boundary edge list does not match single-use edges");

  std::unordered_map<int, int> next;
  for (const auto& e : mesh.boundary_edges) {
    const auto dkey = (static_cast<std::uint64_t>(e.v[0]) << 32) | static_cast<std::uint64_t>(e.v[1]);
    if (directed.find(dkey) == directed.end()) throw MeshError("boundary edge is not oriented with the domain on its left");
    if (undirected.at(edge_key(e.v[0], e.v[1])) != 1) throw MeshError("boundary edge belongs to two triangles");
    if (!next.emplace(e.v[0], e.v[1]).second) throw MeshError("boundary vertex with two outgoing edges");
  }
  // Each component must form one closed loop.
  std::map<int, std::vector<const BoundaryEdge*>> by_component;
  for (const auto& e : mesh.boundary_edges) by_component[e.component].push_back(&e);
  for (const auto& [comp, edges] : by_component) {
    const int start = edges.front()->v[0];
    int v = start;
    std::size_t steps = 0;
    do {
      v = next.at(v);
      ++steps;
    } while (v != start && steps <= edges.size());
    if (v != start || steps != edges.size())
      throw MeshError("boundary component " + std::to_string(comp) + " is not a single closed loop");
  }

  double diam = diameter(mesh);
  std::vector<int> order(static_cast<std::size_t>(nv));
  for (int i = 0; i < nv; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) { return mesh.vertices[static_cast<std::size_t>(a)].x < mesh.vertices[static_cast<std::size_t>(b)].x; });
  const double tol = 1e-12 * diam;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Point& p = mesh.vertices[static_cast<std::size_t>(order[i])];
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Point& q = mesh.vertices[static_cast<std::size_t>(order[j])];
      if (q.x - p.x > tol) break;
      if (distance(p, q) <= tol) throw MeshError("duplicate vertices " + std::to_string(order[i]) + " and " + std::to_string(order[j]));
    }
  }
}

double max_edge_length(const TriMesh& mesh) {
  double m = 0.0;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k)
      m = std::max(m, distance(mesh.vertices[static_cast<std::size_t>(t[k])], mesh.vertices[static_cast<std::size_t>(t[(k + 1) % 3])]));
  return m;
}

double diameter(const TriMesh& mesh) {
  // bounding-box diagonal; adequate as a length scale
  double xmin = mesh.vertices.front().x, xmax = xmin, ymin = mesh.vertices.front().y, ymax = ymin;
  for (const auto& p : mesh.vertices) {
    xmin = std::min(xmin, p.x);
    xmax = std::max(xmax, p.x);
    ymin = std::min(ymin, p.y);
    ymax = std::max(ymax, p.y);
  }
  return std::hypot(xmax - xmin, ymax - ymin);
}

int count_edges(const TriMesh& mesh) {
  std::unordered_map<std::uint64_t, int> edges;
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) edges[edge_key(t[k], t[(k + 1) % 3])] = 1;
  return static_cast<int>(edges.size());
}

std::vector<bool> boundary_mask(const TriMesh& mesh) {
  std::vector<bool> mask(mesh.vertices.size(), false);
  for (const auto& e : mesh.boundary_edges) {
    mask[static_cast<std::size_t>(e.v[0])] = true;
    mask[static_cast<std::size_t>(e.v[1])] = true;
  }
  return mask;
}

std::vector<std::vector<int>> boundary_loops(const TriMesh& mesh) {
  std::vector<std::vector<int>> loops(static_cast<std::size_t>(mesh.num_components()));
  std::unordered_map<int, int> next;
  for (const auto& e : mesh.boundary_edges) next[e.v[0]] = e.v[1];
  std::vector<bool> started(loops.size(), false);
  for (const auto& e : mesh.boundary_edges) {
    auto c = static_cast<std::size_t>(e.component);
    if (started[c]) continue;
    started[c] = true;
    int v = e.v[0];
    do {
      loops[c].push_back(v);
      v = next.at(v);
    } while (v != e.v[0]);
  }
  return loops;
}

}  // namespace insulab
