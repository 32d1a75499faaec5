#include <catch_amalgamated.hpp>

#include <random>

#include "nvb/nvb.hpp"

using namespace nvb;

namespace {

Dyadic random_dyadic(std::mt19937_64& rng) {
  std::uniform_int_distribution<long> num(-1000, 1000);
  std::uniform_int_distribution<int> exp(0, 12);
  return Dyadic(mpz_class(num(rng)), static_cast<std::uint64_t>(exp(rng)));
}

// Determinant by cofactor expansion over rationals.
Rational cofactor_det(const std::vector<std::vector<Rational>>& a) {
  const std::size_t n = a.size();
  if (n == 1) return a[0][0];
  Rational d = 0;
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<std::vector<Rational>> minor;
    for (std::size_t i = 1; i < n; ++i) {
      std::vector<Rational> row;
      for (std::size_t k = 0; k < n; ++k)
        if (k != j) row.push_back(a[i][k]);
      minor.push_back(row);
    }
    const Rational c = a[0][j] * cofactor_det(minor);
    d += (j % 2 ? -c : c);
  }
  return d;
}

}  // namespace

TEST_CASE("dyadic arithmetic agrees with rational arithmetic") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    const Dyadic a = random_dyadic(rng), b = random_dyadic(rng);
    const Rational qa = to_rational(a), qb = to_rational(b);
    CHECK(to_rational(a + b) == qa + qb);
    CHECK(to_rational(a - b) == qa - qb);
    CHECK(to_rational(a * b) == qa * qb);
    CHECK(to_rational(half(a)) == qa / 2);
    CHECK(((a < b) == (qa < qb)));
    CHECK((a + b).is_canonical());
    CHECK((a * b).is_canonical());
    CHECK(half(a).is_canonical());
  }
}

TEST_CASE("dyadic canonical form") {
  CHECK(Dyadic(mpz_class(4), 3) == Dyadic(mpz_class(1), 1));
  CHECK(Dyadic(mpz_class(0), 5).exponent() == 0);
  CHECK_THROWS(Dyadic::from_canonical(mpz_class(2), 1));
  CHECK_THROWS(Dyadic::from_canonical(mpz_class(0), 1));
  CHECK(Dyadic::from_canonical(mpz_class(3), 2) == Dyadic(mpz_class(6), 3));
  CHECK(divide_exact(Dyadic(3), 6) == Dyadic(mpz_class(1), 1));
  CHECK_THROWS(divide_exact(Dyadic(1), 3));
}

TEST_CASE("determinants agree with cofactor expansion") {
  std::mt19937_64 rng(5);
  for (int n = 1; n <= 4; ++n)
    for (int t = 0; t < 50; ++t) {
      std::vector<Point<Dyadic>> pts;
      for (int i = 0; i <= n; ++i) {
        Point<Dyadic> p(static_cast<std::size_t>(n));
        for (int a = 0; a < n; ++a) p[static_cast<std::size_t>(a)] = random_dyadic(rng);
        pts.push_back(p);
      }
      std::vector<std::vector<Rational>> m;
      for (int i = 1; i <= n; ++i) {
        std::vector<Rational> row;
        for (int a = 0; a < n; ++a)
          row.push_back(to_rational(pts[static_cast<std::size_t>(i)][static_cast<std::size_t>(a)] - pts[0][static_cast<std::size_t>(a)]));
        m.push_back(row);
      }
      CHECK(signed_det(pointers(pts)) == cofactor_det(m));
    }
}

TEST_CASE("simplex volume of Kuhn simplices and invariance") {
  for (int n = 1; n <= 4; ++n) {
    std::vector<int> perm(static_cast<std::size_t>(n)), signs(static_cast<std::size_t>(n), 1);
    std::iota(perm.begin(), perm.end(), 0);
    auto pts = kuhn_points<Dyadic>(perm, signs, Point<Dyadic>(static_cast<std::size_t>(n)));
    const Rational v = simplex_volume(pts);
    CHECK(v == Rational(1, factorial(static_cast<unsigned>(n)).get_ui()));
    std::reverse(pts.begin(), pts.end());
    CHECK(simplex_volume(pts) == v);
    Point<Dyadic> shift(static_cast<std::size_t>(n));
    for (auto& c : shift.x) c = Dyadic(mpz_class(3), 2);
    for (auto& p : pts) p = p + shift;
    CHECK(simplex_volume(pts) == v);
  }
}

TEST_CASE("barycentric coordinates and location") {
  const std::vector<Point<Rational>> tri{{0, 0}, {1, 0}, {0, 1}};
  const auto c = barycentric(Point<Rational>{Rational(1, 3), Rational(1, 3)}, tri);
  REQUIRE(c);
  CHECK((*c)[0] == Rational(1, 3));
  CHECK((*c)[1] == Rational(1, 3));
  CHECK((*c)[2] == Rational(1, 3));
  for (std::size_t i = 0; i < 3; ++i) {
    const auto e = barycentric(tri[i], tri);
    REQUIRE(e);
    for (std::size_t j = 0; j < 3; ++j) CHECK((*e)[j] == (i == j ? 1 : 0));
    CHECK(locate(tri[i], pointers(tri)) == Location::Vertex);
  }
  CHECK_FALSE(barycentric(Point<Rational>{1, 1}, tri));
  CHECK(locate(Point<Rational>{1, 1}, pointers(tri)) == Location::Outside);
  CHECK(locate(Point<Rational>{Rational(1, 2), 0}, pointers(tri)) == Location::Inside);
}

TEST_CASE("location agrees with barycentric signs on random points") {
  std::mt19937_64 rng(2);
  const std::vector<Point<Dyadic>> tet{{0, 0, 0}, {2, 0, 0}, {2, 2, 0}, {2, 2, 2}};
  std::uniform_int_distribution<long> c(-2, 10);
  for (int i = 0; i < 500; ++i) {
    const Point<Dyadic> x{Dyadic(mpz_class(c(rng)), 2), Dyadic(mpz_class(c(rng)), 2), Dyadic(mpz_class(c(rng)), 2)};
    const auto b = barycentric(x, tet);
    const Location l = locate(x, pointers(tet));
    CHECK(b.has_value() == (l != Location::Outside));
  }
}

TEST_CASE("squared distances") {
  CHECK(sq_dist(Point<Dyadic>{0, 0}, Point<Dyadic>{1, 1}) == 2);
  const std::vector<Point<Dyadic>> kuhn{{0, 0}, {1, 0}, {1, 1}};
  const Point<Dyadic> mid{Dyadic(mpz_class(1), 1), Dyadic(mpz_class(1), 1)};
  CHECK(max_dist_from(mid, kuhn) == Rational(1, 2));
}

TEST_CASE("the farthest point of a simplex is a vertex") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<long> c(-8, 8);
  for (int t = 0; t < 40; ++t) {
    std::vector<Point<Dyadic>> s;
    for (int i = 0; i < 3; ++i) s.push_back(Point<Dyadic>{c(rng), c(rng)});
    if (simplex_volume(s) == 0) continue;
    const Point<Dyadic> p{c(rng), c(rng)};
    const Rational best = max_dist_from(p, s);
    // Dense convex combinations with weights i/16.
    for (int i = 0; i <= 16; ++i)
      for (int j = 0; i + j <= 16; ++j) {
        const int k = 16 - i - j;
        Point<Rational> x(2);
        for (std::size_t a = 0; a < 2; ++a)
          x[a] = (to_rational(s[0][a]) * i + to_rational(s[1][a]) * j + to_rational(s[2][a]) * k) / 16;
        CHECK(sq_dist(x, to_rational(p)) <= best);
      }
  }
}

TEST_CASE("vertex pool deduplicates exactly") {
  VertexPool<Dyadic> pool(2);
  const int a = pool.insert(Point<Dyadic>{1, 2});
  const int b = pool.insert(Point<Dyadic>{Dyadic(mpz_class(2), 1), 2});
  CHECK(a == b);
  CHECK(pool.size() == 1);
  CHECK(pool.find(Point<Dyadic>{1, 2}) == a);
  CHECK_FALSE(pool.find(Point<Dyadic>{2, 1}));
}
