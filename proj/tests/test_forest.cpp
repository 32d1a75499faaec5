#include <catch_amalgamated.hpp>

#include <random>

#include "nvb/nvb.hpp"
#include "oracles.hpp"

using namespace nvb;

namespace {

Mesh<Dyadic> square() { return kuhn_cube_mesh<Dyadic>(2, 1); }

void random_refine(Mesh<Dyadic>& m, int rounds, std::mt19937_64& rng) {
  for (int i = 0; i < rounds; ++i) {
    const auto& ls = m.leaves();
    refine(m, ls[rng() % ls.size()]);
  }
}

long leaf_count_of(const std::set<NodeKey>& keys, int roots) { return roots + static_cast<long>(keys.size()); }

}  // namespace

TEST_CASE("counting identity") {
  Mesh<Dyadic> m = kuhn_simplex_mesh<Dyadic>(2);
  auto c = forest_size_identity(m);
  CHECK(c.cells_minus_initial == 0);
  CHECK(c.nonleaves == 0);
  CHECK(c.half_nonroot == 0);
  m.bisect(0);
  c = forest_size_identity(m);
  CHECK(c.cells_minus_initial == 1);
  CHECK(c.nonleaves == 1);
  CHECK(c.half_nonroot == 1);
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 3; ++n) {
    Mesh<Dyadic> k = kuhn_cube_mesh<Dyadic>(n, 1);
    for (int r = 0; r < 40; ++r) {
      random_refine(k, 1, rng);
      CHECK(forest_size_identity(k).consistent());
    }
  }
}

TEST_CASE("finer") {
  const Mesh<Dyadic> t0 = square();
  Mesh<Dyadic> a = t0, b = t0;
  CHECK(finer(t0, t0));
  refine(a, 0);
  CHECK(finer(a, t0));
  CHECK_FALSE(finer(t0, a));
  // Two incomparable refinements of the refined square.
  Mesh<Dyadic> p = a, q = a;
  refine(p, p.leaves().front());
  refine(q, q.leaves().back());
  REQUIRE(bisected_keys(p) != bisected_keys(q));
  CHECK_FALSE(finer(p, q));
  CHECK_FALSE(finer(q, p));
  CHECK_THROWS(finer(t0, kuhn_simplex_mesh<Dyadic>(2)));
}

TEST_CASE("overlay and underlay agree with brute force over the depth-3 family") {
  const Mesh<Dyadic> t0 = square();
  const auto family = oracle::admissible_forests(t0, 3);
  REQUIRE(family.size() > 10);
  for (const auto& a : family)
    for (const auto& b : family) {
      const Mesh<Dyadic> p = from_keys(t0, a), q = from_keys(t0, b);
      const Mesh<Dyadic> o = overlay(p, q), u = underlay(p, q);
      const auto co = oracle::coarsest_common_refinement(family, a, b);
      const auto fu = oracle::finest_common_coarsening(family, a, b);
      REQUIRE(co);
      REQUIRE(fu);
      CHECK(bisected_keys(o) == *co);
      CHECK(bisected_keys(u) == *fu);
      CHECK(check_conforming(o).ok());
      CHECK(check_conforming(u).ok());
      CHECK(leaf_count_of(*co, 2) - 2 <= (leaf_count_of(a, 2) - 2) + (leaf_count_of(b, 2) - 2));
      CHECK(bisected_keys(overlay(p, u)) == a);
      CHECK(bisected_keys(underlay(p, o)) == a);
    }
}

TEST_CASE("overlay minimality on sampled depth-4 pairs") {
  const Mesh<Dyadic> t0 = square();
  const auto family = oracle::admissible_forests(t0, 4);
  std::mt19937_64 rng(17);
  for (int t = 0; t < 150; ++t) {
    const auto& a = family[rng() % family.size()];
    const auto& b = family[rng() % family.size()];
    const Mesh<Dyadic> p = from_keys(t0, a), q = from_keys(t0, b);
    const auto co = oracle::coarsest_common_refinement(family, a, b);
    REQUIRE(co);
    CHECK(bisected_keys(overlay(p, q)) == *co);
  }
}

TEST_CASE("overlay and underlay of a mesh with itself and with the initial mesh") {
  std::mt19937_64 rng(5);
  const Mesh<Dyadic> t0 = kuhn_cube_mesh<Dyadic>(3, 1);
  Mesh<Dyadic> r = t0;
  random_refine(r, 15, rng);
  CHECK(bisected_keys(overlay(r, r)) == bisected_keys(r));
  CHECK(bisected_keys(underlay(r, r)) == bisected_keys(r));
  CHECK(bisected_keys(overlay(t0, r)) == bisected_keys(r));
  CHECK(bisected_keys(underlay(t0, r)).empty());
}

TEST_CASE("demand relations") {
  Mesh<Dyadic> m = kuhn_simplex_mesh<Dyadic>(2);
  const auto [a, b] = m.bisect(0);
  CHECK(demands01(m, a, b).first);
  CHECK_FALSE(demands01(m, a, b).second);
  const auto [a0, a1] = m.bisect(a);
  // A grandchild demands the class of its parent's new vertex.
  CHECK(demands01(m, a0, b).second);
  CHECK(demands01(m, a0, a).second);
  CHECK_FALSE(demands01(m, a0, b).first);
  CHECK(demands01(m, a0, a1).first);
  CHECK_THROWS(demands01(m, 0, a));
}

TEST_CASE("towers from the demand closure equal towers from refine") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(2, 2, trial % 2 == 1);
    random_refine(m, 12, rng);
    for (int l : m.leaves()) CHECK(tower(m, l) == closure01_tower(m, l));
  }
  Mesh<Dyadic> m3 = kuhn_cube_mesh<Dyadic>(3, 1);
  random_refine(m3, 10, rng);
  for (int l : m3.leaves()) CHECK(tower(m3, l) == closure01_tower(m3, l));
}

TEST_CASE("towers of the two children coincide") {
  // The tower is a property of the parent leaf: bisecting it by either child
  // leads to the same refinement, i.e. refine on the parent equals the closure
  // of a bisection that starts from each child's new vertex.
  std::mt19937_64 rng(31);
  Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(2, 2);
  random_refine(m, 15, rng);
  for (int l : m.leaves()) {
    const auto tw = tower(m, l);
    Mesh<Dyadic> c = m;
    const auto [c0, c1] = c.bisect(l);
    repair_hanging_nodes(c);
    std::set<NodeKey> rep;
    for (int id = m.node_count(); id < c.node_count(); ++id) rep.insert(c.key(id));
    CHECK(tw == rep);
    CHECK(tw.count(c.key(c0)) == 1);
    CHECK(tw.count(c.key(c1)) == 1);
  }
}

TEST_CASE("compatible patch: the tower is the children of the sharers") {
  const Mesh<Dyadic> m = square();
  const auto tw = tower(m, 0);
  const std::set<NodeKey> expect{{0, "0"}, {0, "1"}, {1, "0"}, {1, "1"}};
  CHECK(tw == expect);
}

TEST_CASE("staircase towers grow linearly and match hanging-node repair") {
  long prev = 0;
  for (int k = 1; k <= 10; ++k) {
    const Mesh<Dyadic> m = oracle::staircase_mesh(k);
    long best = 0;
    for (int l : m.leaves()) {
      const auto tw = tower(m, l);
      CHECK(tw == oracle::repair_tower(m, l));
      best = std::max(best, static_cast<long>(tw.size()) / 2);
    }
    CHECK(best == 2 * k - 1);
    CHECK(best > prev);
    prev = best;
  }
}

TEST_CASE("second characterisation of admissible forests") {
  std::mt19937_64 rng(3);
  CHECK(verify_forest_characterisation(square()).ok());
  for (int n = 2; n <= 3; ++n)
    for (int t = 0; t < 15; ++t) {
      Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(n, 1);
      random_refine(m, 12, rng);
      CHECK(verify_forest_characterisation(m).ok());
    }
  // Remove one child pair from the middle of a long tower.
  const Mesh<Dyadic> base = oracle::staircase_mesh(6);
  int widest = base.leaves().front();
  for (int l : base.leaves())
    if (tower(base, l).size() > tower(base, widest).size()) widest = l;
  Mesh<Dyadic> r = base;
  const int first = r.node_count();
  refine(r, widest);
  REQUIRE(verify_forest_characterisation(r).ok());
  std::vector<int> removable;
  for (int id = first; id < r.node_count(); ++id) {
    const Node& x = r.node(id);
    if (x.has_children() && r.is_leaf(x.child[0]) && r.is_leaf(x.child[1])) removable.push_back(id);
  }
  REQUIRE(removable.size() >= 2);
  auto keys = bisected_keys(r);
  keys.erase(r.key(removable[removable.size() / 2]));
  const Mesh<Dyadic> broken = from_keys(base, keys);
  CHECK_FALSE(verify_forest_characterisation(broken).ok());
  CHECK_FALSE(check_conforming(broken).ok());
}

TEST_CASE("forest invariants after random refinement") {
  std::mt19937_64 rng(44);
  for (int n = 2; n <= 4; ++n) {
    Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(n, 1);
    Rational total = 0;
    for (int r = 0; r < m.root_count(); ++r) total += simplex_volume(m.points(r));
    random_refine(m, 20, rng);
    Rational sum = 0;
    for (int l : m.leaves()) sum += simplex_volume(m.points(l));
    CHECK(sum == total);
    for (int id = 0; id < m.node_count(); ++id) {
      const Node& x = m.node(id);
      if (x.parent >= 0) {
        CHECK(x.parent < id);
        const Node& p = m.node(x.parent);
        CHECK((p.child[0] == id || p.child[1] == id));
      }
      for (int c : x.child)
        if (c >= 0) CHECK(m.node(c).parent == id);
    }
  }
}
