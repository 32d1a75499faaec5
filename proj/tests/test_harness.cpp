#include <catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "nvb/nvb.hpp"

using namespace nvb;

namespace {

double ball(int n) { return std::pow(M_PI, n / 2.0) / std::tgamma(n / 2.0 + 1.0); }

// Direct double-precision evaluation of the two constant formulas.
double sic_formula(double d, double D, int n) {
  return std::pow(D, n) * ball(n) / (2.0 * std::pow(1.0 - std::pow(2.0, -1.0 / n), n) * d);
}

double iso_formula(double d, double D, int n) {
  const int h0 = 2 + static_cast<int>(std::floor(std::log2(n)));
  const double twice = std::pow(D, n) / d * (std::pow(2.0, n) - 1) * std::pow(2.0, n * h0 + 1) *
                       ((n + std::pow(2.0, n)) * ball(n) + 2 * ball(n - 1));
  return twice / 2;
}

// q^n 4^l for comparing 2^{l/n} sqrt(q) exactly.
Rational power_key(const Rational& q, int l, int n) {
  Rational r = 1;
  for (int i = 0; i < n; ++i) r *= q;
  mpq_mul_2exp(r.get_mpq_t(), r.get_mpq_t(), static_cast<unsigned long>(2 * l));
  return r;
}

// Largest 2^{l/n} |V_new(S) - vertex| over all descendants to `depth`, by
// bisecting a real mesh and measuring each cell against its own new vertex.
Rational brute_D_sic(int n, int depth) {
  Mesh<Dyadic> m = kuhn_simplex_mesh<Dyadic>(n);
  std::vector<int> frontier{0};
  Rational best = 0;
  for (int l = 0; l < depth; ++l) {
    std::vector<int> next;
    for (int id : frontier) {
      const auto [a, b] = m.bisect(id);
      for (int c : {a, b}) {
        const Rational q = max_dist_from(m.vertex(m.node(c).vnew), m.points(c));
        best = std::max(best, power_key(q, m.cell(c).level, n));
        next.push_back(c);
      }
    }
    frontier = std::move(next);
  }
  return best;
}

Trace synthetic(long initial, const std::vector<long>& totals) {
  Trace t;
  t.initial = initial;
  for (std::size_t i = 0; i < totals.size(); ++i) {
    TraceRound r;
    r.round = static_cast<long>(i) + 1;
    r.total = totals[i];
    t.rounds.push_back(r);
  }
  return t;
}

}  // namespace

TEST_CASE("h0") {
  CHECK(h0_of(1) == 2);
  CHECK(h0_of(2) == 3);
  CHECK(h0_of(3) == 3);
  CHECK(h0_of(4) == 4);
  CHECK(h0_of(7) == 4);
  CHECK(h0_of(8) == 5);
}

TEST_CASE("SIC constants of the reference simplices") {
  const double expect[] = {0, 0, 36.6, 4.1e3, 8.4e5};
  const long ceiling[] = {0, 0, 37, 4100, 840000};
  const Rational d_expect[] = {0, 0, Rational(1, 2), Rational(1, 6), Rational(1, 24)};
  for (int n = 2; n <= 4; ++n) {
    const Constants c = compute_constants(kuhn_simplex_mesh<Dyadic>(n), ConstMode::Sic);
    CHECK(c.d == d_expect[n]);
    CHECK(c.D.value().to_double() == Catch::Approx(std::sqrt(n - 1.0)).epsilon(1e-12));
    CHECK(c.cert.settled);
    const double C = c.c_sic.to_double();
    CHECK(C == Catch::Approx(sic_formula(c.d.get_d(), std::sqrt(n - 1.0), n)).epsilon(1e-12));
    CHECK(C <= ceiling[n]);
    CHECK(std::abs(C - expect[n]) / expect[n] < 0.02);
    CHECK(c.c_sic_up.ceil_times(1) <= ceiling[n]);
    CHECK(c.c_sic < c.c_sic_up);
  }
}

TEST_CASE("IsoCoChange constants of the reference simplices") {
  const double expect[] = {0, 0, 1.8e4, 5.9e6, 4.1e10};
  const long table[] = {0, 0, 64, 512, 65536};
  for (int n = 2; n <= 4; ++n) {
    const Constants c = compute_constants(kuhn_simplex_mesh<Dyadic>(n), ConstMode::Iso);
    CHECK(c.D.value().to_double() == Catch::Approx(std::sqrt(static_cast<double>(n))).epsilon(1e-12));
    const double C = c.c_iso.to_double();
    CHECK(C == Catch::Approx(iso_formula(c.d.get_d(), std::sqrt(static_cast<double>(n)), n)).epsilon(1e-12));
    CHECK(std::abs(C - expect[n]) / expect[n] < 0.05);
    CHECK(c.first_summand_table == table[n]);
    // Hyperlevel-0 root: levels 1 .. n(h0+1) carry hyperlevel at most h0.
    mpz_class exact = 0;
    for (int l = 1; l <= n * (c.h0 + 1); ++l) exact += mpz_class(1) << l;
    CHECK(c.first_summand_exact == exact / 2);
    mpz_class coarse;
    mpz_ui_pow_ui(coarse.get_mpz_t(), static_cast<unsigned long>(8 * n), static_cast<unsigned long>(n));
    CHECK(c.first_summand_theorem == coarse);
  }
  // Full-type roots of hyperlevel 1: exact count 2^{n h0} - 1 per root.
  const auto u = untagged(kuhn_cube_mesh<Dyadic>(2, 1));
  VertexPartition all;
  for (int v = 0; v < static_cast<int>(u.vertices.size()); ++v) all.v1.push_back(v);
  const Constants c = compute_constants(agk_init(u, all), ConstMode::Iso);
  CHECK(c.first_summand_exact == 2 * 63);
  CHECK(c.first_summand_table == 2 * 64);
}

TEST_CASE("D agrees with brute-force descent") {
  for (int n = 2; n <= 3; ++n) {
    const Constants c = compute_constants(kuhn_simplex_mesh<Dyadic>(n), ConstMode::Sic);
    CHECK(brute_D_sic(n, 4 * n) == power_key(c.D.q, c.D.l, n));
  }
}

TEST_CASE("constants are monotone in D and d") {
  for (int n = 2; n <= 4; ++n) {
    const Real d(Rational(1, 3)), d2(Rational(1, 2));
    const Real D(2.0), D2(3.0);
    CHECK(c_sic(d, D, n) < c_sic(d, D2, n));
    CHECK(c_sic(d2, D, n) < c_sic(d, D, n));
    CHECK(c_iso(d, D, n) < c_iso(d, D2, n));
    CHECK(c_iso(d2, D, n) < c_iso(d, D, n));
  }
}

TEST_CASE("d scales with the mesh and ignores refinement") {
  for (int n = 2; n <= 4; ++n) {
    const Rational d1 = compute_d(kuhn_simplex_mesh<Dyadic>(n), ConstMode::Sic);
    const Rational d3 = compute_d(kuhn_simplex_mesh<Dyadic>(n, 0, Dyadic(3)), ConstMode::Sic);
    Rational f = 1;
    for (int i = 0; i < n; ++i) f *= 3;
    CHECK(d3 == d1 * f);
    Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(n, 1);
    const Rational before = compute_d(m, ConstMode::Sic);
    uniform_refine(m);
    uniform_refine(m);
    CHECK(compute_d(m, ConstMode::Sic) == before);
    // Every leaf has 2^l |S| equal to d on a uniform Kuhn mesh.
    for (int l : m.leaves()) {
      Rational v = simplex_volume(m.points(l));
      mpq_mul_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<unsigned long>(m.cell(l).level));
      CHECK(v == before);
    }
  }
}

TEST_CASE("D is the same for the Kuhn cube and its single simplex") {
  for (int n = 2; n <= 3; ++n) {
    const Constants a = compute_constants(kuhn_simplex_mesh<Dyadic>(n), ConstMode::Sic);
    const Constants b = compute_constants(kuhn_cube_mesh<Dyadic>(n, 1), ConstMode::Sic);
    CHECK(power_key(a.D.q, a.D.l, n) == power_key(b.D.q, b.D.l, n));
  }
}

TEST_CASE("a compatible patch adds its size in one round") {
  Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(2, 1);
  const Trace t = run_sequence(m, Marking::RandomLeaf, 1, 5);
  CHECK(t.rounds.front().added == 2);
  CHECK(t.rounds.front().jump == 1);
}

TEST_CASE("random traces satisfy the SIC bound with cross-checked towers") {
  RunOptions opt;
  opt.tower_crosscheck_rate = 1.0;
  opt.check_characterisation = true;
  for (Marking k : {Marking::RandomLeaf, Marking::MaxLevelLeaf, Marking::Staircase, Marking::Quasitower}) {
    Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(2, 2, true);
    const Constants c = compute_constants(m, ConstMode::Sic);
    const Trace t = run_sequence(m, k, 60, 3, opt);
    CHECK(verify_bdv(t, c, BoundMode::Sic).ok());
    CHECK(t.max_jump() <= 4);
    long sum = 0;
    for (const auto& r : t.rounds) {
      sum += r.added;
      CHECK(r.total == t.initial + sum);
      CHECK(r.forest_nonroot == 2 * sum);
    }
  }
}

TEST_CASE("AGK traces satisfy the IsoCoChange bound") {
  std::mt19937_64 rng(1);
  for (int n = 2; n <= 3; ++n) {
    const auto u = untagged(kuhn_cube_mesh<Dyadic>(n, 2));
    Mesh<Dyadic> m = agk_init(u, random_partition(static_cast<int>(u.vertices.size()), rng));
    const Constants c = compute_constants(m, ConstMode::Iso);
    const Trace t = run_sequence(m, Marking::RandomLeaf, 40, 9);
    CHECK(verify_bdv(t, c, BoundMode::Iso).ok());
  }
}

TEST_CASE("an inflated trace fails at the right round") {
  const Constants c = compute_constants(kuhn_simplex_mesh<Dyadic>(2), ConstMode::Sic);
  // ceil(C_up k) is 37, 74, 110 for k = 1, 2, 3.
  CHECK(bdv_bound(c, BoundMode::Sic, 1) == 37);
  CHECK(bdv_bound(c, BoundMode::Sic, 3) == 110);
  const Trace ok = synthetic(1, {38, 75, 111});
  CHECK(verify_bdv(ok, c, BoundMode::Sic).ok());
  const Trace bad = synthetic(1, {10, 20, 112, 10});
  const BdvReport r = verify_bdv(bad, c, BoundMode::Sic);
  CHECK_FALSE(r.ok());
  CHECK(r.first_violation == 3);
}

TEST_CASE("per-round callback errors carry the round") {
  Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(2, 1);
  RunOptions opt;
  opt.per_round = [](long k) { return k == 4 ? std::string("stop") : std::string(); };
  try {
    run_sequence(m, Marking::RandomLeaf, 10, 1, opt);
    FAIL("no error raised");
  } catch (const RoundCheckError& e) {
    CHECK(e.round() == 4);
  }
}

TEST_CASE("traces are reproducible") {
  auto csv = [](std::uint64_t seed) {
    Mesh<Dyadic> m = kuhn_cube_mesh<Dyadic>(2, 2);
    const Constants c = compute_constants(m, ConstMode::Sic);
    return trace_csv(run_sequence(m, Marking::RandomLeaf, 30, seed), &c);
  };
  CHECK(csv(4) == csv(4));
  CHECK(csv(4) != csv(5));
  const std::string s = csv(4);
  CHECK(s.find("round,marked_cell,cells_added,cells_total,forest_nonroot,bound,ratio\n") != std::string::npos);
}

TEST_CASE("tower layers lie in patches of the hyperlevel-uniform mesh") {
  const auto u = untagged(kuhn_cube_mesh<Dyadic>(2, 2));
  std::mt19937_64 rng(2);
  const Mesh<Dyadic> m = agk_init(u, random_partition(static_cast<int>(u.vertices.size()), rng));
  const PatchCheck p = tower_patch_spotcheck(m, 6, 11);
  CHECK(p.report.ok());
  CHECK(p.towers == 6);
  CHECK(p.layers > 0);
  CHECK(p.worst_diameter_ratio <= 2.0);
  // Shallow sampling leaves no layer above h0.
  const PatchCheck shallow = tower_patch_spotcheck(m, 2, 11, 0);
  CHECK(shallow.report.ok());
  CHECK(shallow.layers == 0);
}
