#include "insulab/mesh_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

namespace insulab {

namespace {

std::string next_content_line(std::istream& is, const char* what) {
  std::string line;
  while (std::getline(is, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    return line;
  }
  throw MeshError(std::string("unexpected end of mesh file while reading ") + what);
}

double parse_double(const std::string& tok) {
  double v = 0.0;
  const auto* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, v);
  if (ec != std::errc() || ptr != end) throw MeshError("malformed number '" + tok + "'");
  return v;
}

long parse_count(const std::string& line, const char* what) {
  std::istringstream ls(line);
  long n = -1;
  std::string extra;
  if (!(ls >> n) || n < 0 || (ls >> extra)) throw MeshError(std::string("malformed ") + what + " count: '" + line + "'");
  return n;
}

void write_domain_line(std::ostream& os, const DomainSpec& spec) {
  os << "domain ";
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Disk>) {
          os << "disk " << format_double(s.radius);
        } else if constexpr (std::is_same_v<T, Annulus>) {
          os << "annulus " << format_double(s.inner) << ' ' << format_double(s.outer);
        } else if constexpr (std::is_same_v<T, Ellipse>) {
          os << "ellipse " << format_double(s.a) << ' ' << format_double(s.b);
        } else {
          os << "polygon " << s.vertices.size();
          for (const auto& p : s.vertices) os << ' ' << format_double(p.x) << ' ' << format_double(p.y);
        }
      },
      spec.shape);
  os << " h " << format_double(spec.target_edge_length) << '\n';
}

DomainSpec parse_domain_line(const std::string& line) {
  std::istringstream ls(line);
  std::string tag, kind;
  ls >> tag >> kind;
  auto num = [&]() {
    std::string tok;
    if (!(ls >> tok)) throw MeshError("truncated domain line");
    return parse_double(tok);
  };
  DomainSpec spec;
  if (kind == "disk") {
    spec.shape = Disk{num()};
  } else if (kind == "annulus") {
    const double a = num();
    spec.shape = Annulus{a, num()};
  } else if (kind == "ellipse") {
    const double a = num();
    spec.shape = Ellipse{a, num()};
  } else if (kind == "polygon") {
    const auto n = static_cast<long>(num());
    Polygon poly;
    for (long i = 0; i < n; ++i) {
      const double x = num();
      poly.vertices.push_back({x, num()});
    }
    spec.shape = std::move(poly);
  } else {
    throw MeshError("unknown domain kind '" + kind + "'");
  }
  std::string htag;
  if (!(ls >> htag) || htag != "h") throw MeshError("domain line lacks target edge length");
  spec.target_edge_length = num();
  return spec;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_mesh(std::ostream& os, const TriMesh& mesh) {
  os << kMeshHeader << '\n';
  write_domain_line(os, mesh.domain);
  os << mesh.vertices.size() << '\n';
  for (const auto& p : mesh.vertices) os << format_double(p.x) << ' ' << format_double(p.y) << '\n';
  os << mesh.triangles.size() << '\n';
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  os << mesh.boundary_edges.size() << '\n';
  for (const auto& e : mesh.boundary_edges) os << e.v[0] << ' ' << e.v[1] << ' ' << e.component << '\n';
}

TriMesh read_mesh(std::istream& is) {
  std::string header = next_content_line(is, "header");
  while (!header.empty() && (header.back() == '\r' || header.back() == ' ')) header.pop_back();
  if (header != kMeshHeader) throw MeshError("unsupported mesh header '" + header + "'");

  TriMesh mesh;
  std::string line = next_content_line(is, "vertex count");
  bool has_domain = false;
  if (line.rfind("domain", 0) == 0) {
    mesh.domain = parse_domain_line(line);
    has_domain = true;
    line = next_content_line(is, "vertex count");
  }
  const long nv = parse_count(line, "vertex");
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    std::istringstream ls(next_content_line(is, "vertex"));
    std::string xs, ys;
    if (!(ls >> xs >> ys)) throw MeshError("malformed vertex line " + std::to_string(i));
    mesh.vertices.push_back({parse_double(xs), parse_double(ys)});
  }
  const long nt = parse_count(next_content_line(is, "triangle count"), "triangle");
  for (long i = 0; i < nt; ++i) {
    std::istringstream ls(next_content_line(is, "triangle"));
    std::array<int, 3> t{};
    if (!(ls >> t[0] >> t[1] >> t[2])) throw MeshError("malformed triangle line " + std::to_string(i));
    mesh.triangles.push_back(t);
  }
  const long ne = parse_count(next_content_line(is, "boundary edge count"), "boundary edge");
  for (long i = 0; i < ne; ++i) {
    std::istringstream ls(next_content_line(is, "boundary edge"));
    BoundaryEdge e;
    if (!(ls >> e.v[0] >> e.v[1] >> e.component) || e.component < 0) throw MeshError("malformed boundary edge line " + std::to_string(i));
    mesh.boundary_edges.push_back(e);
  }
  if (!has_domain) {
    // Polygonal fallback: the outer loop as written.
    Polygon poly;
    for (const auto& e : mesh.boundary_edges)
      if (e.component == 0) poly.vertices.push_back(mesh.vertices.at(static_cast<std::size_t>(e.v[0])));
    mesh.domain = DomainSpec{std::move(poly), max_edge_length(mesh)};
  }
  validate_mesh(mesh);
  return mesh;
}

void save_mesh(const std::string& path, const TriMesh& mesh) {
  std::ofstream os(path);
  if (!os) throw MeshError("cannot open '" + path + "' for writing");
  write_mesh(os, mesh);
}

TriMesh load_mesh(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw MeshError("cannot open '" + path + "'");
  return read_mesh(is);
}

}  // namespace insulab
