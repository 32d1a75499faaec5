#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "nvb/point.hpp"

namespace nvb {

using IntMatrix = std::vector<std::vector<mpz_class>>;

/// Determinant by fraction-free (Bareiss) elimination.
inline mpz_class bareiss_det(IntMatrix a) {
  const std::size_t n = a.size();
  if (n == 0) return 1;
  int sign = 1;
  mpz_class prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (sgn(a[k][k]) == 0) {
      std::size_t p = k + 1;
      while (p < n && sgn(a[p][k]) == 0) ++p;
      if (p == n) return 0;
      std::swap(a[k], a[p]);
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        a[i][j] = a[i][j] * a[k][k] - a[i][k] * a[k][j];
        mpz_divexact(a[i][j].get_mpz_t(), a[i][j].get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = a[k][k];
  }
  return sign > 0 ? a[n - 1][n - 1] : mpz_class(-a[n - 1][n - 1]);
}

/// Points rewritten as integer vectors sharing one positive denominator.
struct IntFrame {
  std::vector<std::vector<mpz_class>> pts;
  mpz_class scale = 1;
};

inline IntFrame integer_frame(const std::vector<const Point<Dyadic>*>& pts) {
  std::uint64_t e = 0;
  for (const auto* p : pts)
    for (const auto& c : p->x) e = std::max(e, c.exponent());
  IntFrame f;
  mpz_ui_pow_ui(f.scale.get_mpz_t(), 2, e);
  f.pts.reserve(pts.size());
  for (const auto* p : pts) {
    std::vector<mpz_class> v(p->dim());
    for (std::size_t i = 0; i < p->dim(); ++i) v[i] = p->x[i].scaled_to(e);
    f.pts.push_back(std::move(v));
  }
  return f;
}

inline IntFrame integer_frame(const std::vector<const Point<Rational>*>& pts) {
  IntFrame f;
  for (const auto* p : pts)
    for (const auto& c : p->x) mpz_lcm(f.scale.get_mpz_t(), f.scale.get_mpz_t(), c.get_den_mpz_t());
  for (const auto* p : pts) {
    std::vector<mpz_class> v(p->dim());
    for (std::size_t i = 0; i < p->dim(); ++i) v[i] = p->x[i].get_num() * (f.scale / p->x[i].get_den());
    f.pts.push_back(std::move(v));
  }
  return f;
}

template <class S>
std::vector<const Point<S>*> pointers(const std::vector<Point<S>>& v) {
  std::vector<const Point<S>*> r;
  r.reserve(v.size());
  for (const auto& p : v) r.push_back(&p);
  return r;
}

/// det(p1-p0, ..., pn-p0) in integer-frame units (true value = det / scale^n).
inline mpz_class frame_det(const IntFrame& f) {
  const std::size_t n = f.pts.size() - 1;
  IntMatrix m(n, std::vector<mpz_class>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[j][i] = f.pts[i + 1][j] - f.pts[0][j];
  return bareiss_det(std::move(m));
}

inline mpz_class factorial(unsigned n) {
  mpz_class r;
  mpz_fac_ui(r.get_mpz_t(), n);
  return r;
}

/// Signed det(p1-p0,...,pn-p0) as an exact rational.
template <class S>
Rational signed_det(const std::vector<const Point<S>*>& pts) {
  const std::size_t n = pts.empty() ? 0 : pts[0]->dim();
  if (pts.size() != n + 1) throw std::invalid_argument("need dim+1 points");
  IntFrame f = integer_frame(pts);
  mpz_class den;
  mpz_pow_ui(den.get_mpz_t(), f.scale.get_mpz_t(), n);
  Rational r(frame_det(f), den);
  r.canonicalize();
  return r;
}

/// |det(p1-p0,...,pn-p0)| / n!; zero for degenerate input.
template <class S>
Rational simplex_volume(const std::vector<Point<S>>& v) {
  Rational d = signed_det(pointers(v));
  if (d < 0) d = -d;
  return d / Rational(factorial(static_cast<unsigned>(v.size() - 1)));
}

enum class Location { Outside, Vertex, Inside };

/// Where `x` lies relative to the closed simplex. `Inside` covers every
/// non-vertex point of the closed simplex, including its boundary.
template <class S>
Location locate(const Point<S>& x, const std::vector<const Point<S>*>& simplex) {
  const std::size_t n = x.dim();
  // Exact bounding-box rejection first; double boxes lose resolution deep
  // in the forest.
  for (std::size_t j = 0; j < n; ++j) {
    bool below = true, above = true;
    for (const Point<S>* p : simplex) {
      below = below && x[j] < (*p)[j];
      above = above && (*p)[j] < x[j];
    }
    if (below || above) return Location::Outside;
  }
  std::vector<const Point<S>*> all = simplex;
  all.push_back(&x);
  IntFrame f = integer_frame(all);
  const auto& xp = f.pts.back();
  IntMatrix m(n, std::vector<mpz_class>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[j][i] = f.pts[i + 1][j] - f.pts[0][j];
  mpz_class det = bareiss_det(m);
  if (sgn(det) == 0) throw std::invalid_argument("degenerate simplex");
  const int s = sgn(det);
  mpz_class sum = 0;
  int nonzero = 0;
  bool unit = true;
  for (std::size_t i = 0; i < n; ++i) {
    IntMatrix mi = m;
    for (std::size_t j = 0; j < n; ++j) mi[j][i] = xp[j] - f.pts[0][j];
    mpz_class di = bareiss_det(std::move(mi));
    if (sgn(di) * s < 0) return Location::Outside;
    if (sgn(di) != 0) {
      ++nonzero;
      if (di != det) unit = false;
    }
    sum += di;
  }
  if (s > 0 ? sum > det : sum < det) return Location::Outside;
  if (nonzero == 0 || (nonzero == 1 && unit)) return Location::Vertex;
  return Location::Inside;
}

/// Exact barycentric coordinates, or nullopt when the point is outside.
template <class S>
std::optional<std::vector<Rational>> barycentric(const Point<S>& x, const std::vector<Point<S>>& simplex) {
  const std::size_t n = x.dim();
  if (simplex.size() != n + 1) throw std::invalid_argument("need dim+1 points");
  auto ptrs = pointers(simplex);
  ptrs.push_back(&x);
  IntFrame f = integer_frame(ptrs);
  const auto& xp = f.pts.back();
  IntMatrix m(n, std::vector<mpz_class>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m[j][i] = f.pts[i + 1][j] - f.pts[0][j];
  mpz_class det = bareiss_det(m);
  if (sgn(det) == 0) throw std::invalid_argument("degenerate simplex");
  std::vector<Rational> lam(n + 1);
  Rational rest = 1;
  for (std::size_t i = 0; i < n; ++i) {
    IntMatrix mi = m;
    for (std::size_t j = 0; j < n; ++j) mi[j][i] = xp[j] - f.pts[0][j];
    lam[i + 1] = Rational(bareiss_det(std::move(mi)), det);
    lam[i + 1].canonicalize();
    if (lam[i + 1] < 0) return std::nullopt;
    rest -= lam[i + 1];
  }
  if (rest < 0) return std::nullopt;
  lam[0] = rest;
  return lam;
}

/// Axis-aligned bounding box in doubles, widened slightly for safe prefiltering.
struct Box {
  std::vector<double> lo, hi;
  bool overlaps(const Box& o) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (hi[i] < o.lo[i] || o.hi[i] < lo[i]) return false;
    return true;
  }
  bool contains(const std::vector<double>& p) const {
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (p[i] < lo[i] || p[i] > hi[i]) return false;
    return true;
  }
};

inline Box make_box(const std::vector<const std::vector<double>*>& pts) {
  Box b;
  const std::size_t n = pts[0]->size();
  b.lo.assign(n, 1e300);
  b.hi.assign(n, -1e300);
  for (const auto* p : pts)
    for (std::size_t i = 0; i < n; ++i) {
      b.lo[i] = std::min(b.lo[i], (*p)[i]);
      b.hi[i] = std::max(b.hi[i], (*p)[i]);
    }
  for (std::size_t i = 0; i < n; ++i) {
    double pad = 1e-9 * (1.0 + std::fabs(b.lo[i]) + std::fabs(b.hi[i]));
    b.lo[i] -= pad;
    b.hi[i] += pad;
  }
  return b;
}

}  // namespace nvb
