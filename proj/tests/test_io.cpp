#include "doctest.h"

#include "mmpde/mesh_io.hpp"
#include "mmpde/scenarios.hpp"

using namespace mmpde;

TEST_CASE("read a minimal triangle file") {
  const std::string node =
      "# tiny mesh\n"
      "3 2 0 1\n"
      "1 0.0 0.0 1\n"
      "2 1.0 0.0 1\n"
      "3 0.0 1.0 1\n";
  const std::string ele =
      "1 3 0\n"
      "1 1 2 3\n";
  SimplicialMesh mesh = read_mesh(node, ele);
  CHECK(mesh.n_vertices() == 3);
  CHECK(mesh.n_elements() == 1);
  CHECK(mesh.dim == 2);
  CHECK(mesh.vertices[1][0] == 1.0);
  CHECK(mesh.elements[0][2] == 2);
  CHECK(mesh.markers.size() == 3);
  mesh.validate();
}

TEST_CASE("zero-based and one-based encodings agree") {
  const std::string node0 =
      "3 2 0 0\n"
      "0 0.25 0.5\n"
      "1 1.5 0.125\n"
      "2 0.0 1.0\n";
  const std::string ele0 = "1 3 0\n0 0 1 2\n";
  const std::string node1 =
      "3 2 0 0\n"
      "1 0.25 0.5\n"
      "2 1.5 0.125\n"
      "3 0.0 1.0\n";
  const std::string ele1 = "1 3 0\n1 1 2 3\n";
  SimplicialMesh a = read_mesh(node0, ele0);
  SimplicialMesh b = read_mesh(node1, ele1);
  REQUIRE(a.n_vertices() == b.n_vertices());
  for (int i = 0; i < a.n_vertices(); ++i)
    CHECK((a.vertices[i] - b.vertices[i]).inf_norm() == 0.0);
  CHECK(a.elements[0] == b.elements[0]);
}

TEST_CASE("write/read round trip is lossless") {
  SimplicialMesh mesh = make_uniform_grid_3d(2);
  mesh = perturb_mesh(mesh, 0.07, 3);  // no constraints: every vertex moves
  mesh.markers.assign(mesh.n_vertices(), 0);
  const auto boundary = boundary_vertex_flags(mesh);
  for (int i = 0; i < mesh.n_vertices(); ++i) mesh.markers[i] = boundary[i] ? 1 : 0;

  const std::string node = write_node(mesh);
  const std::string ele = write_ele(mesh);
  SimplicialMesh back = read_mesh(node, ele);
  REQUIRE(back.n_vertices() == mesh.n_vertices());
  REQUIRE(back.n_elements() == mesh.n_elements());
  for (int i = 0; i < mesh.n_vertices(); ++i) {
    for (int c = 0; c < 3; ++c) CHECK(back.vertices[i][c] == mesh.vertices[i][c]);
    CHECK(back.markers[i] == mesh.markers[i]);
  }
  for (int k = 0; k < mesh.n_elements(); ++k) CHECK(back.elements[k] == mesh.elements[k]);

  // write(read(text)) is idempotent
  CHECK(write_node(back) == node);
  CHECK(write_ele(back) == ele);
}

TEST_CASE("parse errors carry line numbers") {
  CHECK_THROWS_AS(read_mesh("3 2 0 0\n1 0 0\n2 oops 0\n3 0 1\n", "1 3 0\n1 1 2 3\n"), ParseError);
  try {
    read_mesh("3 2 0 0\n1 0 0\n2 oops 0\n3 0 1\n", "1 3 0\n1 1 2 3\n");
  } catch (const ParseError& e) {
    CHECK(e.line_number == 3);
  }
  CHECK_THROWS_AS(read_mesh("3 9 0 0\n", ""), ParseError);
}

TEST_CASE("index base errors") {
  // first index neither 0 nor 1
  CHECK_THROWS_AS(read_mesh("2 2 0 0\n2 0 0\n3 1 0\n", "1 3 0\n1 1 2 3\n"), IndexBaseError);
  // element references a vertex inconsistent with the 1-based node numbering
  const std::string node1 = "3 2 0 0\n1 0 0\n2 1 0\n3 0 1\n";
  CHECK_THROWS_AS(read_mesh(node1, "1 3 0\n1 0 1 2\n"), IndexBaseError);
}

TEST_CASE("vertex field reader") {
  const std::vector<double> v = read_vertex_field("# comment\n1.5 2.5\n3.5\n", 3);
  REQUIRE(v.size() == 3);
  CHECK(v[0] == 1.5);
  CHECK(v[2] == 3.5);
  CHECK_THROWS_AS(read_vertex_field("1.0 2.0\n", 3), ParseError);
}
