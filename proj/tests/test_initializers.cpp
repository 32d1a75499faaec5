#include <catch_amalgamated.hpp>

#include <random>

#include "nvb/nvb.hpp"

using namespace nvb;

namespace {

using P = Point<Dyadic>;

UntaggedMesh<Dyadic> two_triangles() {
  UntaggedMesh<Dyadic> u;
  u.dim = 2;
  u.vertices = {P{0, 0}, P{6, 0}, P{3, 3}, P{9, 3}};
  u.cells = {{0, 1, 2}, {1, 2, 3}};
  return u;
}

template <class S>
Rational total_volume(const std::vector<std::vector<Point<S>>>& cells) {
  Rational v = 0;
  for (const auto& c : cells) v += simplex_volume(c);
  return v;
}

template <class S>
std::vector<std::vector<Point<S>>> cells_of(const UntaggedMesh<S>& u) {
  std::vector<std::vector<Point<S>>> r;
  for (const auto& c : u.cells) {
    std::vector<Point<S>> p;
    for (int id : c) p.push_back(u.vertices[static_cast<std::size_t>(id)]);
    r.push_back(p);
  }
  return r;
}

template <class S>
std::vector<std::vector<Point<S>>> leaves_of(const Mesh<S>& m) {
  std::vector<std::vector<Point<S>>> r;
  for (int l : m.leaves()) r.push_back(m.points(l));
  return r;
}

// Random untagged Kuhn-type mesh with shuffled vertex order per cell.
UntaggedMesh<Dyadic> shuffled(UntaggedMesh<Dyadic> u, std::mt19937_64& rng) {
  for (auto& c : u.cells) std::shuffle(c.begin(), c.end(), rng);
  return u;
}

}  // namespace

TEST_CASE("initial division of two triangles by interior points") {
  const auto u = two_triangles();
  const P q1{3, 1}, q2{6, 2};
  PointMarking<Dyadic> mk;
  mk.points_by_type[2] = {q1, q2};
  const Mesh<Dyadic> m = initial_division(u, mk);
  const auto& p = u.vertices;
  const std::vector<std::vector<P>> expect{{p[1], p[2], q1}, {p[2], p[0], q1}, {p[0], p[1], q1},
                                           {p[2], p[3], q2}, {p[3], p[1], q2}, {p[1], p[2], q2}};
  REQUIRE(m.leaf_count() == 6);
  for (std::size_t i = 0; i < expect.size(); ++i) {
    CHECK(m.points(static_cast<int>(i)) == expect[i]);
    CHECK(m.cell(static_cast<int>(i)).type == 1);
  }
  CHECK(check_sic(m).ok());
  CHECK(check_conforming(m).ok());
}

TEST_CASE("marked points on original vertices give no division") {
  const auto u = two_triangles();
  PointMarking<Dyadic> mk;
  mk.points_by_type[2] = {u.vertices[0], u.vertices[3]};
  const Mesh<Dyadic> m = initial_division(u, mk);
  CHECK(m.leaf_count() == 2);
  CHECK(m.vertex_count() == 4);
  for (int n = 2; n <= 3; ++n) {
    const auto k = untagged(kuhn_cube_mesh<Dyadic>(n, 1));
    const Mesh<Dyadic> g = initial_division(k, greedy_marking(k));
    CHECK(g.leaf_count() == static_cast<int>(k.cells.size()));
    CHECK(g.vertex_count() == static_cast<int>(k.vertices.size()));
    CHECK(check_conforming(g).ok());
    CHECK(total_volume(leaves_of(g)) == total_volume(cells_of(k)));
  }
}

TEST_CASE("barycentre marking divides each simplex into (n+1)!/2 cells") {
  for (int n = 2; n <= 3; ++n) {
    const auto u = untagged(kuhn_cube_mesh<Rational>(n, 1));
    const Mesh<Rational> m = initial_division(u, barycentre_marking(u));
    const long per = factorial(static_cast<unsigned>(n + 1)).get_si() / 2;
    CHECK(m.leaf_count() == per * static_cast<long>(u.cells.size()));
    for (int l : m.leaves()) CHECK(m.cell(l).type == 1);
    CHECK(total_volume(leaves_of(m)) == total_volume(cells_of(u)));
    CHECK(check_conforming(m).ok());
    CHECK(check_sic(m).ok());
    CHECK(check_retaco(m).ok());
  }
  // A single simplex in four dimensions.
  const auto u4 = untagged(kuhn_simplex_mesh<Rational>(4));
  const Mesh<Rational> m4 = initial_division(u4, barycentre_marking(u4));
  CHECK(m4.leaf_count() == 60);
  CHECK(check_conforming(m4).ok());
}

TEST_CASE("invalid markings are rejected") {
  const auto u = two_triangles();
  PointMarking<Dyadic> missing;
  missing.points_by_type[2] = {P{3, 1}};
  CHECK_THROWS_AS(initial_division(u, missing), InitError);
  PointMarking<Dyadic> outside;
  outside.points_by_type[2] = {P{3, 1}, P{6, 2}, P{100, 100}};
  CHECK_THROWS_AS(initial_division(u, outside), InitError);
  PointMarking<Dyadic> wrong_type;
  wrong_type.points_by_type[3] = {P{3, 1}};
  CHECK_THROWS_AS(initial_division(u, wrong_type), InitError);
}

TEST_CASE("AGK tagging") {
  const auto u = untagged(kuhn_cube_mesh<Dyadic>(2, 2));
  const int nv = static_cast<int>(u.vertices.size());
  VertexPartition all1;
  for (int v = 0; v < nv; ++v) all1.v1.push_back(v);
  const Mesh<Dyadic> m1 = agk_init(u, all1);
  for (int l : m1.leaves()) {
    CHECK(m1.cell(l).type == 2);
    CHECK(m1.cell(l).hyper == 1);
  }
  CHECK(check_retahyco(m1).ok());
  const auto s = untagged(kuhn_simplex_mesh<Dyadic>(3));
  VertexPartition all0;
  all0.v0 = {0, 1, 2, 3};
  const Mesh<Dyadic> m0 = agk_init(s, all0);
  CHECK(m0.cell(0).type == 3);
  CHECK(m0.cell(0).hyper == 0);
  // Mixed partition on the square.
  VertexPartition mixed;
  for (int v = 0; v < nv; ++v) (v % 2 ? mixed.v1 : mixed.v0).push_back(v);
  const Mesh<Dyadic> mm = agk_init(u, mixed);
  CHECK(check_retahyco(mm).ok());
  for (int l : mm.leaves()) {
    int h = 0;
    for (int v : mm.cell(l).v) h += v % 2 == 0;
    CHECK(mm.cell(l).type == (h ? h - 1 : 2));
    CHECK(mm.cell(l).hyper == (h ? 0 : 1));
  }
  VertexPartition overlap = mixed;
  overlap.v1.push_back(0);
  CHECK_THROWS_AS(agk_init(u, overlap), InitError);
  VertexPartition partial;
  partial.v0 = {0};
  CHECK_THROWS_AS(agk_init(u, partial), InitError);
}

TEST_CASE("random AGK partitions pass ReTaHyCo and IsoCoChange") {
  std::mt19937_64 rng(13);
  for (int t = 0; t < 30; ++t) {
    const int n = 2 + t % 2;
    const auto u = shuffled(untagged(kuhn_cube_mesh<Dyadic>(n, n == 2 ? 3 : 2, t % 4 < 2)), rng);
    const auto part = random_partition(static_cast<int>(u.vertices.size()), rng);
    const Mesh<Dyadic> m = agk_init(u, part);
    CHECK(check_retahyco(m).ok());
    CHECK(check_isocochange(m).ok());
    CHECK(check_conforming(m).ok());
  }
}

TEST_CASE("SIC verifier") {
  for (int n = 2; n <= 4; ++n) CHECK(check_sic(kuhn_cube_mesh<Dyadic>(n, n == 4 ? 1 : 2)).ok());
  // The diagonal is the refinement edge of only the first triangle.
  Mesh<Dyadic> bad(2);
  add_cell(bad, {P{0, 0}, P{1, 0}, P{1, 1}}, 2, 0);
  add_cell(bad, {P{0, 1}, P{0, 0}, P{1, 1}}, 2, 0);
  const Report r = check_sic(bad);
  CHECK_FALSE(r.ok());
  CHECK_FALSE(r.notes.empty());
  // Differing types.
  Mesh<Dyadic> mixed(2);
  add_cell(mixed, {P{0, 0}, P{1, 0}, P{1, 1}}, 2, 0);
  add_cell(mixed, {P{0, 0}, P{1, 1}, P{0, 1}}, 1, 0);
  CHECK_FALSE(check_sic(mixed).ok());
}

TEST_CASE("ReTaCo verifier") {
  CHECK(check_retaco(kuhn_cube_mesh<Dyadic>(3, 2)).ok());
  // Two tetrahedra over the face xyz listing it in different orders.
  Mesh<Dyadic> bad(3);
  const P x{0, 0, 0}, y{1, 0, 0}, z{0, 1, 0}, w{0, 0, 1}, w2{0, 0, -1};
  add_cell(bad, {x, y, z, w}, 3, 0);
  add_cell(bad, {x, z, y, w2}, 3, 0);
  REQUIRE(check_conforming(bad).ok());
  CHECK_FALSE(check_retaco(bad).ok());
  // Splitting the face between horizontal and vertical parts also differs.
  Mesh<Dyadic> split(3);
  add_cell(split, {x, y, z, w}, 3, 0);
  add_cell(split, {x, y, w2, z}, 1, 0);
  CHECK_FALSE(check_retaco(split).ok());
}

TEST_CASE("PC verifier") {
  CHECK(check_pc(kuhn_cube_mesh<Dyadic>(3, 1)).ok());
  const P x{0, 0, 0}, y{1, 0, 0}, z{0, 1, 0}, w{0, 0, 1}, w2{0, 0, -1};
  Mesh<Dyadic> pc(3);
  add_cell(pc, {x, y, z, w}, 1, 0);    // refinement edge xy
  add_cell(pc, {y, z, x, w2}, 1, 0);   // refinement edge yz
  CHECK_FALSE(check_pc(pc).ok());
}

TEST_CASE("IsoCoChange on two-dimensional hyperlevel-0 taggings") {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 20; ++t) {
    const auto u = shuffled(untagged(kuhn_cube_mesh<Dyadic>(2, 3, t % 2 == 1)), rng);
    Mesh<Dyadic> m(2);
    for (const auto& p : u.vertices) m.add_vertex(p);
    for (const auto& c : u.cells) {
      TArray a;
      a.v = c;
      a.type = 2;
      m.add_root(a);
    }
    CHECK(check_isocochange(m).ok());
  }
}
