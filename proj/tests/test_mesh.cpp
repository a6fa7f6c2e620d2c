#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "srj/mesh.hpp"
#include "srj/spectral.hpp"

namespace {

srj::Mesh unit_square_h_half() {
  // 3x3 nodes, single interior node (index 4).
  return srj::perturbed_mesh(2, 2, 0.0, 0);
}

std::uint64_t mesh_digest(const srj::Mesh& m) {
  std::ostringstream ss;
  srj::write_mesh(ss, m);
  return std::hash<std::string>{}(ss.str());
}

}  // namespace

TEST(MeshElement, RightTriangleLocalStiffness) {
  const auto k = srj::p1_local_stiffness({0, 0}, {1, 0}, {0, 1});
  const double want[3][3] = {{1, -0.5, -0.5}, {-0.5, 0.5, 0}, {-0.5, 0, 0.5}};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) EXPECT_NEAR(k[a][b], want[a][b], 1e-15);
  EXPECT_THROW(srj::p1_local_stiffness({0, 0}, {1, 1}, {2, 2}), srj::MeshError);
}

TEST(MeshAssembly, GlobalStiffnessRowsSumToZero) {
  const auto m = srj::perturbed_mesh(5, 4, 0.3, 17);
  const auto k = srj::assemble_p1_stiffness(m);
  const auto y = srj::matvec(k, srj::Vector(m.nodes.size(), 1.0));
  for (double v : y) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(MeshAssembly, SingleInteriorNodeDiagonalFour) {
  const auto p = srj::assemble_fem_poisson(unit_square_h_half());
  ASSERT_EQ(p.size(), 1u);
  EXPECT_NEAR(p.A.diagonal(0), 4.0, 1e-14);
  // Six triangles of area 1/8 touch the centre node: load 6 * (1/8) / 3.
  EXPECT_NEAR(p.b[0], 0.25, 1e-15);
}

TEST(MeshAssembly, StructuredGridMatchesFivePointStencil) {
  const auto p = srj::assemble_fem_poisson(srj::perturbed_mesh(6, 6, 0.0, 0));
  ASSERT_EQ(p.size(), 25u);
  const std::size_t c = 12;  // centre of the 5x5 interior block
  EXPECT_NEAR(p.A.at(c, c), 4.0, 1e-13);
  for (std::size_t nb : {c - 1, c + 1, c - 5, c + 5}) EXPECT_NEAR(p.A.at(c, nb), -1.0, 1e-13);
  EXPECT_NEAR(p.A.at(c, c + 6), 0.0, 1e-13);
}

TEST(MeshAssembly, BoundsAndSpectrum) {
  const auto m = srj::perturbed_mesh(8, 7, 0.25, 4);
  const auto p = srj::assemble_fem_poisson(m);
  EXPECT_TRUE(p.A.is_symmetric(1e-12));
  EXPECT_EQ(p.x0, srj::Vector(p.size(), 0.0));
  ASSERT_EQ(p.cjm_bounds.size(), 3u);
  const auto stats = srj::edge_length_stats(m);
  EXPECT_EQ(p.cjm_bounds[0].name, "min");
  EXPECT_NEAR(p.cjm_bounds[0].hi, std::cos(std::numbers::pi * stats.min / m.length_scale), 1e-15);
  for (const auto& b : p.cjm_bounds) {
    EXPECT_GE(b.lo, -1.0);
    EXPECT_LT(b.hi, 1.0);
  }
  const auto e = srj::dense_jacobi_eigenvalues(p.A);
  EXPECT_GT(e.front(), -1.0);
  EXPECT_LT(e.back(), 1.0);
}

TEST(MeshFormat, RoundTripAndValidation) {
  const auto m = srj::perturbed_mesh(4, 3, 0.2, 9);
  std::stringstream ss;
  srj::write_mesh(ss, m);
  const auto back = srj::parse_mesh(ss);
  ASSERT_EQ(back.nodes.size(), m.nodes.size());
  for (std::size_t i = 0; i < m.nodes.size(); ++i) {
    EXPECT_EQ(back.nodes[i].x, m.nodes[i].x);
    EXPECT_EQ(back.nodes[i].y, m.nodes[i].y);
    EXPECT_EQ(back.boundary[i], m.boundary[i]);
  }
  EXPECT_EQ(back.triangles, m.triangles);

  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return srj::parse_mesh(in);
  };
  EXPECT_THROW(parse(""), srj::MeshError);
  EXPECT_THROW(parse("mesh v2 L=1\n"), srj::MeshError);
  // Clockwise triangle.
  EXPECT_THROW(parse("mesh v1 L=1\n3 1\n0 0 1\n1 0 1\n0 1 1\n0 2 1\n"), srj::MeshError);
  // Index out of range.
  EXPECT_THROW(parse("mesh v1 L=1\n3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 3\n"), srj::MeshError);
  // Boundary edge with an unflagged endpoint.
  EXPECT_THROW(parse("mesh v1 L=1\n3 1\n0 0 1\n1 0 0\n0 1 1\n0 1 2\n"), srj::MeshError);
  EXPECT_NO_THROW(parse("mesh v1 L=1\n3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 2\n"));
  EXPECT_THROW(srj::read_mesh("/nonexistent/file.mesh"), srj::MeshError);
  EXPECT_THROW(srj::assemble_fem_poisson(parse("mesh v1 L=1\n3 1\n0 0 1\n1 0 1\n0 1 1\n0 1 2\n")), srj::MeshError);
}

TEST(PerturbedMesh, DeterministicAndValid) {
  EXPECT_EQ(mesh_digest(srj::perturbed_mesh(6, 5, 0.4, 21)), mesh_digest(srj::perturbed_mesh(6, 5, 0.4, 21)));
  EXPECT_NE(mesh_digest(srj::perturbed_mesh(6, 5, 0.4, 21)), mesh_digest(srj::perturbed_mesh(6, 5, 0.4, 22)));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto m = srj::perturbed_mesh(7, 7, 0.45, seed);
    EXPECT_NO_THROW(srj::validate(m));
    for (std::size_t i = 0; i < m.nodes.size(); ++i) {
      if (!m.boundary[i]) continue;
      const double x = m.nodes[i].x, y = m.nodes[i].y;
      EXPECT_TRUE(x == 0.0 || x == 1.0 || y == 0.0 || y == 1.0);
    }
  }
  const auto flat = srj::perturbed_mesh(3, 2, 0.0, 5);
  EXPECT_DOUBLE_EQ(flat.nodes[6].x, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(flat.nodes[6].y, 0.5);
  EXPECT_THROW(srj::perturbed_mesh(1, 3, 0.1, 0), std::invalid_argument);
  EXPECT_THROW(srj::perturbed_mesh(3, 3, 0.5, 0), std::invalid_argument);
}

TEST(BundledMeshes, LoadAndAssemble) {
  for (const char* name : {"disk", "plate_hole", "airfoil"}) {
    std::size_t prev = 0;
    for (const char* suffix : {"", ".r1", ".r2"}) {
      const std::string path = std::string(SRJ_ASSET_DIR) + "/" + name + suffix + ".mesh";
      const auto m = srj::read_mesh(path);
      EXPECT_DOUBLE_EQ(m.length_scale, 2.0);
      const auto p = srj::assemble_fem_poisson(m, path);
      EXPECT_GT(p.size(), 3 * prev) << path;
      prev = p.size();
    }
  }
}
