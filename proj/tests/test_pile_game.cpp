#include <catch_amalgamated.hpp>

#include <set>

#include "nvb/pile_game.hpp"

using namespace nvb::pile;

namespace {

// Closed intervals [i, i+1] / 2^l touch iff they share at least a point.
bool touching(const Brick& a, const Brick& b) {
  const int l = std::max(a.level, b.level);
  const Index alo = a.index << (l - a.level), ahi = (a.index + 1) << (l - a.level);
  const Index blo = b.index << (l - b.level), bhi = (b.index + 1) << (l - b.level);
  return alo <= bhi && blo <= ahi;
}

std::set<Brick> touching_below(const Brick& b) {
  std::set<Brick> r;
  const Index c = b.index / 2;
  for (int d = -3; d <= 3; ++d) {
    const Brick x{b.level - 1, c + d};
    if (touching(x, b)) r.insert(x);
  }
  return r;
}

// Demand closure of a brick set over [lo, hi) from the touching relation.
std::set<Brick> closure(std::set<Brick> s, long lo, long hi) {
  std::vector<Brick> work(s.begin(), s.end());
  while (!work.empty()) {
    const Brick b = work.back();
    work.pop_back();
    if (b.level == 0) continue;
    for (const Brick& d : touching_below(b)) {
      const Index dlo = Index(lo) << d.level, dhi = Index(hi) << d.level;
      if (d.index < dlo || d.index >= dhi) continue;
      if (s.insert(d).second) work.push_back(d);
    }
  }
  return s;
}

}  // namespace

TEST_CASE("demands are the two touching bricks underneath") {
  const auto [a, b] = brick_demands(Brick{1, 0});
  CHECK(a == Brick{0, 0});
  CHECK(b == Brick{0, -1});
  for (int l = 1; l <= 6; ++l)
    for (long i = -70; i <= 70; ++i) {
      const Brick x{l, i};
      const auto [d0, d1] = brick_demands(x);
      CHECK(touching_below(x) == std::set<Brick>{d0, d1});
    }
  CHECK_THROWS(brick_demands(Brick{0, 3}));
}

TEST_CASE("placing bricks") {
  Pile p(-8, 8);
  CHECK(p.add(Brick{1, 5}) == 1);
  CHECK_THROWS(p.add(Brick{1, 5}));
  CHECK_THROWS(p.add(Brick{3, 0}));
  CHECK(p.demand_closed());
}

TEST_CASE("the four-round example") {
  Pile p(-8, 8);
  const std::vector<Brick> chosen{{1, -1}, {2, -1}, {3, -2}, {2, 1}};
  const std::vector<long> added{1, 2, 3, 2};
  std::set<Brick> oracle;
  for (long i = -8; i < 8; ++i) oracle.insert(Brick{0, i});
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    CHECK(p.add(chosen[k]) == added[k]);
    oracle.insert(chosen[k]);
    oracle = closure(oracle, -8, 8);
    const auto b = p.bricks();
    CHECK(std::set<Brick>(b.begin(), b.end()) == oracle);
  }
  const auto b = p.bricks();
  const std::set<Brick> above{{1, -2}, {1, -1}, {1, 0}, {1, 1}, {2, -2}, {2, -1}, {2, 1}, {3, -2}};
  std::set<Brick> got;
  for (const auto& x : b)
    if (x.level > 0) got.insert(x);
  CHECK(got == above);
}

TEST_CASE("random games agree with the touching closure and stay below 4N") {
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    const Trace t = play(Strategy::Random, 60, seed, -6, 6);
    Pile p(-6, 6);
    std::set<Brick> oracle;
    for (long i = -6; i < 6; ++i) oracle.insert(Brick{0, i});
    for (const auto& r : t.rounds) {
      CHECK(p.add(r.chosen) == r.added);
      oracle.insert(r.chosen);
      oracle = closure(oracle, -6, 6);
      CHECK(p.size() == oracle.size());
      CHECK(p.demand_closed());
      CHECK(r.cumulative <= 4 * r.round);
    }
    CHECK(t.first_violation() == 0);
  }
}

TEST_CASE("tower strategy") {
  for (long n : {1L, 10L, 100L, 500L}) {
    const Trace t = play(Strategy::Tower, n, 9, -4, 4);
    CHECK(t.total() <= 3 * n);
    Pile p(-4, 4);
    for (const auto& r : t.rounds) p.add(r.chosen);
    for (const auto& [level, count] : p.per_level())
      if (level > 0) CHECK(count <= 3);
  }
}

TEST_CASE("a four-brick level is demand-stable") {
  // Four adjacent bricks at one level demand four bricks below.
  std::set<Brick> s;
  for (long i = 0; i < 4; ++i) s.insert(Brick{5, i + 8});
  std::set<Brick> below;
  for (const auto& b : s)
    for (const auto& d : touching_below(b)) below.insert(d);
  CHECK(below.size() == 4);
}

TEST_CASE("quasitower") {
  for (long n : {8L, 20L, 64L, 200L}) {
    const int m = static_cast<int>(n - 3);
    const Trace t = play(Strategy::Quasitower, n, 0, -(1L << 3), 1L << 3);
    REQUIRE(t.rounds.size() == static_cast<std::size_t>(n));
    // Rounds m+1 and m+3 each add m bricks.
    CHECK(t.rounds[static_cast<std::size_t>(m)].added == m);
    CHECK(t.rounds[static_cast<std::size_t>(m + 2)].added == m);
    CHECK(t.total() <= 4 * n);
    if (n >= 64) CHECK(static_cast<double>(t.total()) / static_cast<double>(n) >= 3.5);
  }
}

TEST_CASE("exhaustive games respect 4N") {
  long games = 0;
  CHECK(exhaustive_max(3, -16, 16, &games) <= 12);
  CHECK(games > 1000);
  for (long n = 1; n <= 5; ++n) CHECK(exhaustive_max(n, -2, 2) <= 4 * n);
}
