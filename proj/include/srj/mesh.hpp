#pragma once

/// \file mesh.hpp
/// \brief Triangle meshes, the plain-text mesh format, and P1 FEM assembly of -lap(u) = 1.
///
/// Mesh file (v1):
///
///     mesh v1 L=<characteristic length>
///     <num_nodes> <num_triangles>
///     x y boundary_flag          (num_nodes lines, flag 0 or 1)
///     i j k                      (num_triangles lines, 0-based, counterclockwise)

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "srj/problems.hpp"
#include "srj/rng.hpp"
#include "srj/sparse_matrix.hpp"

namespace srj {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

using Triangle = std::array<std::size_t, 3>;

struct Mesh {
  std::vector<Point2> nodes;
  std::vector<Triangle> triangles;
  std::vector<std::uint8_t> boundary;  ///< 1 for Dirichlet nodes
  double length_scale = 1.0;           ///< L in the CJM bound cos(pi h / L)
};

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kMinTriangleArea = 1e-14;

inline double signed_area(const Point2& a, const Point2& b, const Point2& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

inline double signed_area(const Mesh& mesh, const Triangle& t) {
  return signed_area(mesh.nodes[t[0]], mesh.nodes[t[1]], mesh.nodes[t[2]]);
}

namespace detail {
inline std::map<std::pair<std::size_t, std::size_t>, int> edge_use_counts(const Mesh& mesh) {
  std::map<std::pair<std::size_t, std::size_t>, int> counts;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = t[static_cast<std::size_t>(e)];
      const std::size_t b = t[static_cast<std::size_t>((e + 1) % 3)];
      ++counts[{std::min(a, b), std::max(a, b)}];
    }
  }
  return counts;
}
}  // namespace detail

/// Throws MeshError describing the first violated invariant.
inline void validate(const Mesh& mesh) {
  const std::size_t n = mesh.nodes.size();
  if (mesh.boundary.size() != n) throw MeshError("mesh: boundary flag count does not match node count");
  if (!(mesh.length_scale > 0.0)) throw MeshError("mesh: length scale must be positive");
  for (std::size_t e = 0; e < mesh.triangles.size(); ++e) {
    const auto& t = mesh.triangles[e];
    for (std::size_t v : t) {
      if (v >= n) throw MeshError("mesh: triangle " + std::to_string(e) + " references node " + std::to_string(v));
    }
    if (!(signed_area(mesh, t) > kMinTriangleArea)) {
      throw MeshError("mesh: triangle " + std::to_string(e) + " is degenerate or clockwise");
    }
  }
  for (const auto& [edge, count] : detail::edge_use_counts(mesh)) {
    if (count > 2) {
      throw MeshError("mesh: edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                      ") shared by more than two triangles");
    }
    if (count == 1 && !(mesh.boundary[edge.first] && mesh.boundary[edge.second])) {
      throw MeshError("mesh: boundary edge (" + std::to_string(edge.first) + "," + std::to_string(edge.second) +
                      ") has an unflagged endpoint");
    }
  }
}

inline Mesh parse_mesh(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw MeshError("mesh: empty input");
  std::istringstream head(line);
  std::string magic, version, length;
  head >> magic >> version >> length;
  if (magic != "mesh" || version != "v1" || length.rfind("L=", 0) != 0) {
    throw MeshError("mesh: expected header 'mesh v1 L=<real>'");
  }
  Mesh mesh;
  try {
    mesh.length_scale = std::stod(length.substr(2));
  } catch (const std::exception&) {
    throw MeshError("mesh: bad length scale '" + length + "'");
  }
  std::size_t num_nodes = 0, num_tris = 0;
  if (!(is >> num_nodes >> num_tris)) throw MeshError("mesh: bad count line");
  mesh.nodes.resize(num_nodes);
  mesh.boundary.resize(num_nodes);
  for (std::size_t i = 0; i < num_nodes; ++i) {
    int flag = 0;
    if (!(is >> mesh.nodes[i].x >> mesh.nodes[i].y >> flag) || (flag != 0 && flag != 1)) {
      throw MeshError("mesh: bad node line " + std::to_string(i));
    }
    mesh.boundary[i] = static_cast<std::uint8_t>(flag);
  }
  mesh.triangles.resize(num_tris);
  for (std::size_t e = 0; e < num_tris; ++e) {
    auto& t = mesh.triangles[e];
    if (!(is >> t[0] >> t[1] >> t[2])) throw MeshError("mesh: bad triangle line " + std::to_string(e));
  }
  validate(mesh);
  return mesh;
}

inline Mesh read_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("mesh: cannot open '" + path + "'");
  return parse_mesh(in);
}

inline void write_mesh(std::ostream& os, const Mesh& mesh) {
  os << std::setprecision(std::numeric_limits<double>::max_digits10);
  os << "mesh v1 L=" << mesh.length_scale << '\n' << mesh.nodes.size() << ' ' << mesh.triangles.size() << '\n';
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    os << mesh.nodes[i].x << ' ' << mesh.nodes[i].y << ' ' << int(mesh.boundary[i]) << '\n';
  }
  for (const auto& t : mesh.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

/// Structured triangulation of the unit square (nx by ny cells, each split
/// along its rising diagonal) with interior nodes moved by uniform(-jitter,
/// jitter) times the cell size. A draw that produces a degenerate element is
/// retried with the next stream, at most 100 times.
inline Mesh perturbed_mesh(std::size_t nx, std::size_t ny, double jitter, std::uint64_t seed) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("perturbed_mesh: nx and ny must be >= 2");
  if (!(jitter >= 0.0 && jitter <= 0.49)) throw std::invalid_argument("perturbed_mesh: jitter must be in [0, 0.49]");
  const double hx = 1.0 / static_cast<double>(nx);
  const double hy = 1.0 / static_cast<double>(ny);
  auto id = [nx](std::size_t i, std::size_t j) { return j * (nx + 1) + i; };

  Mesh mesh;
  mesh.length_scale = 1.0;
  for (std::size_t j = 0; j <= ny; ++j) {
    for (std::size_t i = 0; i <= nx; ++i) {
      mesh.nodes.push_back({static_cast<double>(i) * hx, static_cast<double>(j) * hy});
      mesh.boundary.push_back(static_cast<std::uint8_t>(i == 0 || j == 0 || i == nx || j == ny));
    }
  }
  for (std::size_t j = 0; j < ny; ++j) {
    for (std::size_t i = 0; i < nx; ++i) {
      mesh.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      mesh.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  if (jitter == 0.0) return mesh;

  const std::vector<Point2> base = mesh.nodes;
  for (std::uint64_t attempt = 0; attempt < 100; ++attempt) {
    SplitMix64 rng(derive_seed(seed, attempt));
    for (std::size_t k = 0; k < base.size(); ++k) {
      mesh.nodes[k] = base[k];
      if (mesh.boundary[k]) continue;
      mesh.nodes[k].x += (2.0 * rng.uniform() - 1.0) * jitter * hx;
      mesh.nodes[k].y += (2.0 * rng.uniform() - 1.0) * jitter * hy;
    }
    const bool ok = std::all_of(mesh.triangles.begin(), mesh.triangles.end(),
                                [&](const Triangle& t) { return signed_area(mesh, t) > kMinTriangleArea; });
    if (ok) return mesh;
  }
  throw MeshError("perturbed_mesh: no valid jittered mesh after 100 attempts");
}

/// P1 element stiffness: K_ab = area * grad(phi_a) . grad(phi_b).
inline std::array<std::array<double, 3>, 3> p1_local_stiffness(const Point2& p0, const Point2& p1, const Point2& p2) {
  const double area = signed_area(p0, p1, p2);
  if (!(std::abs(area) > kMinTriangleArea)) throw MeshError("p1_local_stiffness: degenerate triangle");
  // grad(phi_a) = (y_b - y_c, x_c - x_b) / (2 area) over the cyclic successor pair (b, c).
  const std::array<Point2, 3> p{p0, p1, p2};
  std::array<double, 3> gx{}, gy{};
  for (std::size_t a = 0; a < 3; ++a) {
    const Point2& b = p[(a + 1) % 3];
    const Point2& c = p[(a + 2) % 3];
    gx[a] = (b.y - c.y) / (2.0 * area);
    gy[a] = (c.x - b.x) / (2.0 * area);
  }
  std::array<std::array<double, 3>, 3> k{};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) k[a][b] = std::abs(area) * (gx[a] * gx[b] + gy[a] * gy[b]);
  }
  return k;
}

/// Global stiffness over all nodes, before Dirichlet elimination.
inline SparseMatrix assemble_p1_stiffness(const Mesh& mesh) {
  std::vector<Triplet<double>> t;
  t.reserve(9 * mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    const auto k = p1_local_stiffness(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) t.push_back({tri[a], tri[b], k[a][b]});
    }
  }
  return SparseMatrix(mesh.nodes.size(), std::move(t), SymmetryCheck::require, 1e-10);
}

struct EdgeLengthStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
};

inline EdgeLengthStats edge_length_stats(const Mesh& mesh) {
  EdgeLengthStats s{std::numeric_limits<double>::infinity(), 0.0, 0.0};
  const auto edges = detail::edge_use_counts(mesh);
  if (edges.empty()) throw MeshError("mesh: no edges");
  for (const auto& entry : edges) {
    const auto& [a, b] = entry.first;
    const double len = std::hypot(mesh.nodes[a].x - mesh.nodes[b].x, mesh.nodes[a].y - mesh.nodes[b].y);
    s.min = std::min(s.min, len);
    s.max = std::max(s.max, len);
    s.mean += len;
  }
  s.mean /= static_cast<double>(edges.size());
  return s;
}

/// -lap(u) = 1 with u = 0 on flagged nodes; the system is over interior nodes only.
inline ProblemInstance assemble_fem_poisson(const Mesh& mesh, std::string label = "mesh") {
  validate(mesh);
  std::vector<std::size_t> unknown(mesh.nodes.size(), std::numeric_limits<std::size_t>::max());
  std::size_t n = 0;
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    if (!mesh.boundary[i]) unknown[i] = n++;
  }
  if (n == 0) throw MeshError("assemble_fem_poisson: mesh has no interior nodes");

  std::vector<Triplet<double>> t;
  Vector b(n, 0.0);
  for (const auto& tri : mesh.triangles) {
    const auto k = p1_local_stiffness(mesh.nodes[tri[0]], mesh.nodes[tri[1]], mesh.nodes[tri[2]]);
    const double load = signed_area(mesh, tri) / 3.0;
    for (std::size_t a = 0; a < 3; ++a) {
      const std::size_t ra = unknown[tri[a]];
      if (ra == std::numeric_limits<std::size_t>::max()) continue;
      b[ra] += load;
      for (std::size_t c = 0; c < 3; ++c) {
        const std::size_t rc = unknown[tri[c]];
        if (rc != std::numeric_limits<std::size_t>::max()) t.push_back({ra, rc, k[a][c]});
      }
    }
  }
  const auto stats = edge_length_stats(mesh);
  const double pi_over_l = std::numbers::pi / mesh.length_scale;
  std::vector<CjmBounds> bounds;
  for (const auto& [h, name] : {std::pair{stats.min, "min"}, std::pair{stats.max, "max"}, std::pair{stats.mean, "mean"}}) {
    const double mu = std::cos(pi_over_l * h);
    bounds.push_back({-mu, mu, name});
  }
  return {SparseMatrix(n, std::move(t), SymmetryCheck::require, 1e-10), std::move(b), Vector(n, 0.0),
          StoppingNorm::absolute_l2, std::move(bounds), std::move(label)};
}

}  // namespace srj
