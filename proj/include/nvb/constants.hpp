#pragma once

#include <mpfr.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvb/mesh.hpp"

namespace nvb {

/// RAII wrapper over an MPFR value at a fixed working precision.
class Real {
 public:
  static constexpr mpfr_prec_t kPrec = 256;

  Real() { mpfr_init2(v_, kPrec); mpfr_set_zero(v_, 1); }
  explicit Real(double d) : Real() { mpfr_set_d(v_, d, MPFR_RNDN); }
  explicit Real(const Rational& q) : Real() { mpfr_set_q(v_, q.get_mpq_t(), MPFR_RNDN); }
  Real(const Real& o) : Real() { mpfr_set(v_, o.v_, MPFR_RNDN); }
  Real& operator=(const Real& o) {
    mpfr_set(v_, o.v_, MPFR_RNDN);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }

  friend Real operator*(const Real& a, const Real& b) { Real r; mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend Real operator/(const Real& a, const Real& b) { Real r; mpfr_div(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend Real operator+(const Real& a, const Real& b) { Real r; mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend Real operator-(const Real& a, const Real& b) { Real r; mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN); return r; }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }

  Real pow(const Real& e) const { Real r; mpfr_pow(r.v_, v_, e.v_, MPFR_RNDN); return r; }
  Real sqrt() const { Real r; mpfr_sqrt(r.v_, v_, MPFR_RNDN); return r; }
  static Real pi() { Real r; mpfr_const_pi(r.v_, MPFR_RNDN); return r; }
  static Real two_pow(long e) { Real r; mpfr_set_ui_2exp(r.v_, 1, e, MPFR_RNDN); return r; }

  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }

  /// Decimal with `digits` significant digits, round-half-even.
  std::string str(int digits = 15) const {
    mpfr_exp_t e;
    char* s = mpfr_get_str(nullptr, &e, 10, static_cast<std::size_t>(digits), v_, MPFR_RNDN);
    std::string mant(s);
    mpfr_free_str(s);
    bool neg = !mant.empty() && mant[0] == '-';
    if (neg) mant.erase(0, 1);
    while (mant.size() > 1 && mant.back() == '0' && static_cast<long>(mant.size()) > e) mant.pop_back();
    std::string out;
    if (e > 0 && e <= 21) {
      if (static_cast<long>(mant.size()) <= e) out = mant + std::string(static_cast<std::size_t>(e) - mant.size(), '0');
      else out = mant.substr(0, static_cast<std::size_t>(e)) + "." + mant.substr(static_cast<std::size_t>(e));
    } else if (e <= 0 && e > -6) {
      out = "0." + std::string(static_cast<std::size_t>(-e), '0') + mant;
    } else {
      out = mant.substr(0, 1) + (mant.size() > 1 ? "." + mant.substr(1) : "") + "e" + std::to_string(e - 1);
    }
    return (neg ? "-" : "") + out;
  }

  /// A value >= the exact quantity this approximates, given that it was
  /// obtained from at most ~64 correctly rounded operations at kPrec bits.
  Real upper() const {
    Real r;
    mpfr_set_ui_2exp(r.v_, 1, -200, MPFR_RNDU);
    mpfr_add_ui(r.v_, r.v_, 1, MPFR_RNDU);
    mpfr_mul(r.v_, r.v_, v_, MPFR_RNDU);
    return r;
  }

  /// ceil(this * k) rounded upwards.
  mpz_class ceil_times(long k) const {
    Real r;
    mpfr_mul_si(r.v_, v_, k, MPFR_RNDU);
    mpfr_ceil(r.v_, r.v_);
    mpz_class z;
    mpfr_get_z(z.get_mpz_t(), r.v_, MPFR_RNDU);
    return z;
  }

 private:
  mpfr_t v_;
};

/// Volume of the n-dimensional unit ball.
inline Real unit_ball_volume(int n) {
  Real r;
  mpfr_gamma(r.get(), Real(n / 2.0 + 1.0).get(), MPFR_RNDN);
  return Real::pi().pow(Real(n / 2.0)) / r;
}

/// Value 2^{l/n} * sqrt(q) kept exactly as (q, l).
struct ScaledRoot {
  Rational q = 0;  // squared length
  int l = 0;       // level
  int n = 1;

  /// Exact comparison of 2^{l/n} sqrt(q): compare q^n 4^l.
  friend bool operator<(const ScaledRoot& a, const ScaledRoot& b) {
    Rational x, y;
    mpq_class qa = a.q, qb = b.q;
    mpz_class pa, pb;
    x = 1;
    y = 1;
    for (int i = 0; i < a.n; ++i) x *= qa;
    for (int i = 0; i < b.n; ++i) y *= qb;
    Rational fa = 1, fb = 1;
    mpq_mul_2exp(fa.get_mpq_t(), fa.get_mpq_t(), static_cast<unsigned long>(2 * a.l));
    mpq_mul_2exp(fb.get_mpq_t(), fb.get_mpq_t(), static_cast<unsigned long>(2 * b.l));
    return x * fa < y * fb;
  }
  Real value() const { return Real::two_pow(1).pow(Real(static_cast<double>(l) / n)) * Real(q).sqrt(); }
  /// value^n = 2^l q^{n/2}
  Real power_n() const { return Real::two_pow(l) * Real(q).pow(Real(n / 2.0)); }
};

enum class ConstMode { Sic, Iso };

struct DCertificate {
  int settled_at = -1;  // depth at which no new class appeared for settle_depth levels
  long classes = 0;
  long nodes = 0;
  bool settled = false;
};

struct Constants {
  int n = 0;
  int h0 = 0;
  Rational d = 0;
  ScaledRoot D;        // Sic: D = 2^{l/n} sqrt(q); Iso: D = sqrt(q) (l = 0)
  DCertificate cert;
  Real c_sic, c_iso;   // nearest values
  Real c_sic_up, c_iso_up;  // rigorous upper bounds
  mpz_class first_summand_exact = 0;   // half the count of non-root nodes with h <= h0
  mpz_class first_summand_theorem = 0; // (8n)^n #T0, or (4n)^n #T0 without hyperlevel-0 cells
  mpz_class first_summand_table = 0;   // 2^{n h0} #T0; the exact count is one less per full-type root of hyperlevel 1
  std::string D_str() const { return D.value().str(); }
};

inline int h0_of(int n) {
  int lg = 0;
  while ((2 << lg) <= n) ++lg;
  return 2 + lg;
}

/// d = min over roots of 2^l |S| (Sic) or 2^{n h + n - t} |S| (Iso).
template <class S>
Rational compute_d(const Mesh<S>& m, ConstMode mode) {
  Rational best = -1;
  const int n = m.dim();
  for (int r = 0; r < m.root_count(); ++r) {
    const TArray& s = m.cell(r);
    Rational v = simplex_volume(m.points(r));
    const long e = mode == ConstMode::Sic ? s.level : static_cast<long>(n) * s.hyper + n - s.type;
    if (e >= 0) mpq_mul_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<unsigned long>(e));
    else mpq_div_2exp(v.get_mpq_t(), v.get_mpq_t(), static_cast<unsigned long>(-e));
    if (best < 0 || v < best) best = v;
  }
  return best;
}

namespace detail {

template <class S>
struct DNode {
  std::vector<Point<S>> p;  // T-array order
  int type, level, hyper;
  Point<S> vnew;
  bool has_vnew = false;
};

template <class S>
std::pair<DNode<S>, DNode<S>> d_children(const DNode<S>& s) {
  DNode<S> t = s;
  if (t.type == 0) {
    t.type = static_cast<int>(t.p.size()) - 1;
    ++t.hyper;
  }
  const auto k = static_cast<std::size_t>(t.type);
  const Point<S> z = midpoint(t.p[0], t.p[k]);
  DNode<S> c0, c1;
  for (DNode<S>* c : {&c0, &c1}) {
    c->type = t.type - 1;
    c->level = s.level + 1;
    c->hyper = t.hyper;
    c->vnew = z;
    c->has_vnew = true;
  }
  for (std::size_t i = 0; i < k; ++i) c0.p.push_back(t.p[i]);
  for (std::size_t i = 1; i <= k; ++i) c1.p.push_back(t.p[i]);
  c0.p.push_back(z);
  c1.p.push_back(z);
  for (std::size_t i = k + 1; i < t.p.size(); ++i) {
    c0.p.push_back(t.p[i]);
    c1.p.push_back(t.p[i]);
  }
  return {std::move(c0), std::move(c1)};
}

/// Translation-free class key with the level-dependent scaling removed.
template <class S>
std::string d_key(const DNode<S>& s, int n, ConstMode mode) {
  const int shift = s.level / n;
  std::string k = std::to_string(s.level % n) + "|" + std::to_string(s.type);
  if (mode == ConstMode::Iso) k += "|" + std::to_string(s.hyper - shift);
  auto scaled = [&](const Point<S>& v) {
    std::string r;
    for (const auto& c : v.x) {
      Rational q = to_rational(c);
      mpq_mul_2exp(q.get_mpq_t(), q.get_mpq_t(), static_cast<unsigned long>(shift));
      r += q.get_str() + ",";
    }
    return r;
  };
  for (std::size_t i = 1; i < s.p.size(); ++i) k += "|" + scaled(s.p[i] - s.p[0]);
  if (s.has_vnew) k += "|v" + scaled(s.vnew - s.p[0]);
  return k;
}

}  // namespace detail

/// D by breadth-first enumeration of shape classes below every root. Stops
/// once `settle_depth` consecutive levels contribute no new class.
template <class S>
std::pair<ScaledRoot, DCertificate> compute_D(const Mesh<S>& m, ConstMode mode, int settle_depth = -1, int hard_cap = 200) {
  const int n = m.dim();
  if (settle_depth < 0) settle_depth = 2 * n;
  ScaledRoot best;
  best.n = n;
  bool have = false;
  DCertificate cert;
  cert.settled = true;
  auto consider = [&](const ScaledRoot& v) {
    if (!have || best < v) {
      best = v;
      have = true;
    }
  };
  for (int r = 0; r < m.root_count(); ++r) {
    const TArray& s = m.cell(r);
    detail::DNode<S> root{m.points(r), s.type, s.level, s.hyper, Point<S>(), false};
    std::set<std::string> seen{detail::d_key(root, n, mode)};
    std::vector<detail::DNode<S>> frontier{root};
    int quiet = 0, depth = 0;
    while (!frontier.empty()) {
      std::vector<detail::DNode<S>> next;
      long fresh = 0;
      for (const auto& x : frontier) {
        ++cert.nodes;
        if (mode == ConstMode::Iso) {
          Rational diam = 0;
          for (std::size_t i = 0; i < x.p.size(); ++i)
            for (std::size_t j = i + 1; j < x.p.size(); ++j) diam = std::max(diam, sq_dist(x.p[i], x.p[j]));
          mpq_mul_2exp(diam.get_mpq_t(), diam.get_mpq_t(), static_cast<unsigned long>(2 * x.hyper));
          consider(ScaledRoot{diam, 0, n});
        } else if (x.has_vnew) {
          consider(ScaledRoot{max_dist_from(x.vnew, x.p), x.level, n});
        }
        auto [c0, c1] = detail::d_children(x);
        for (auto* c : {&c0, &c1})
          if (seen.insert(detail::d_key(*c, n, mode)).second) {
            ++fresh;
            next.push_back(std::move(*c));
          }
      }
      ++depth;
      quiet = fresh == 0 ? quiet + 1 : 0;
      if (fresh == 0 || quiet >= settle_depth) break;
      if (depth >= hard_cap) {
        cert.settled = false;
        break;
      }
      frontier = std::move(next);
    }
    cert.settled_at = std::max(cert.settled_at, depth);
    cert.classes += static_cast<long>(seen.size());
  }
  return {best, cert};
}

/// C = D^n V_n / (2 (1 - 2^{-1/n})^n d).
inline Real c_sic(const Real& d, const Real& d_pow_n, int n) {
  const Real one(1.0);
  const Real base = one - Real::two_pow(1).pow(Real(-1.0 / n));
  return d_pow_n * unit_ball_volume(n) / (Real(2.0) * base.pow(Real(static_cast<double>(n))) * d);
}

/// C with 2C = (D^n/d)(2^n - 1) 2^{n h0 + 1} ((n + 2^n) V_n + 2 V_{n-1}).
inline Real c_iso(const Real& d, const Real& d_pow_n, int n) {
  const int h0 = h0_of(n);
  const Real two_n = Real::two_pow(n);
  const Real bracket = (Real(static_cast<double>(n)) + two_n) * unit_ball_volume(n) + Real(2.0) * unit_ball_volume(n - 1);
  const Real twice = d_pow_n / d * (two_n - Real(1.0)) * Real::two_pow(n * h0 + 1) * bracket;
  return twice / Real(2.0);
}

/// Half the number of non-root nodes with hyperlevel <= h0 below the roots.
template <class S>
mpz_class first_summand_exact(const Mesh<S>& m) {
  const int n = m.dim();
  const int h0 = h0_of(n);
  mpz_class total = 0;
  for (int r = 0; r < m.root_count(); ++r) {
    const TArray& s = m.cell(r);
    for (int l = 1;; ++l) {
      const int h = l <= s.type ? s.hyper : s.hyper + 1 + (l - s.type - 1) / n;
      if (h > h0) break;
      mpz_class p;
      mpz_ui_pow_ui(p.get_mpz_t(), 2, static_cast<unsigned long>(l));
      total += p;
    }
  }
  return total / 2;
}

template <class S>
Constants compute_constants(const Mesh<S>& m, ConstMode mode, int settle_depth = -1) {
  Constants c;
  c.n = m.dim();
  c.h0 = h0_of(c.n);
  c.d = compute_d(m, mode);
  auto [D, cert] = compute_D(m, mode, settle_depth);
  c.D = D;
  c.cert = cert;
  const Real dr(c.d);
  if (mode == ConstMode::Sic) {
    c.c_sic = nvb::c_sic(dr, D.power_n(), c.n);
    c.c_sic_up = c.c_sic.upper();
  } else {
    c.c_iso = nvb::c_iso(dr, D.power_n(), c.n);
    c.c_iso_up = c.c_iso.upper();
    c.first_summand_exact = first_summand_exact(m);
    bool any_h0 = false;
    for (int r = 0; r < m.root_count(); ++r) any_h0 = any_h0 || m.cell(r).hyper == 0;
    mpz_class base;
    mpz_ui_pow_ui(base.get_mpz_t(), static_cast<unsigned long>((any_h0 ? 8 : 4) * c.n), static_cast<unsigned long>(c.n));
    c.first_summand_theorem = base * m.root_count();
    mpz_ui_pow_ui(base.get_mpz_t(), 2, static_cast<unsigned long>(c.n * c.h0));
    c.first_summand_table = base * m.root_count();
  }
  return c;
}

}  // namespace nvb
