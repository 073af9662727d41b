#pragma once

#include <iosfwd>
#include <string>

#include "insulab/geometry.hpp"

namespace insulab {

// Text format, version 1:
//
//   insulab-mesh v1
//   domain <kind> <params...> h <target edge length>      (optional)
//   <V>
//   x y                                                    (V lines)
//   <T>
//   i j k                                                  (T lines, 0-based)
//   <E>
//   i j comp                                               (E lines)
//
// Coordinates are written in shortest round-trip form, so write/read is
// bit-exact. Without a domain line the mesh is treated as a polygonal domain
// and refinement never moves boundary midpoints.

inline constexpr const char* kMeshHeader = "insulab-mesh v1";

void write_mesh(std::ostream& os, const TriMesh& mesh);
TriMesh read_mesh(std::istream& is);

void save_mesh(const std::string& path, const TriMesh& mesh);
TriMesh load_mesh(const std::string& path);

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

}  // namespace insulab
