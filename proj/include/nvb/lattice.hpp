#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nvb/geometry.hpp"
#include "nvb/tarray.hpp"

namespace nvb {

using QVector = std::vector<Rational>;
using QMatrix = std::vector<QVector>;  // row-major

namespace linalg {

/// Solves A x = b exactly (A is rows x cols, full column rank assumed for
/// uniqueness). Returns nullopt when the system is inconsistent.
inline std::optional<QVector> solve(QMatrix a, QVector b) {
  const std::size_t rows = a.size();
  const std::size_t cols = rows ? a[0].size() : 0;
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    std::swap(b[p], b[r]);
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      const Rational f = a[i][c] / a[r][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
      b[i] -= f * b[r];
    }
    pivot_col.push_back(c);
    ++r;
  }
  for (std::size_t i = r; i < rows; ++i)
    if (b[i] != 0) return std::nullopt;
  QVector x(cols, Rational(0));
  for (std::size_t i = 0; i < r; ++i) x[pivot_col[i]] = b[i] / a[i][pivot_col[i]];
  return x;
}

/// Basis of the rational null space of A (as vectors of length cols).
inline std::vector<QVector> null_space(QMatrix a, std::size_t cols) {
  const std::size_t rows = a.size();
  std::vector<std::size_t> pivot_col;
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && a[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(a[p], a[r]);
    const Rational inv = 1 / a[r][c];
    for (std::size_t j = c; j < cols; ++j) a[r][j] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || a[i][c] == 0) continue;
      const Rational f = a[i][c];
      for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
    }
    pivot_col.push_back(c);
    ++r;
  }
  std::vector<QVector> basis;
  for (std::size_t free = 0; free < cols; ++free) {
    if (std::find(pivot_col.begin(), pivot_col.end(), free) != pivot_col.end()) continue;
    QVector v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t i = 0; i < r; ++i) v[pivot_col[i]] = -a[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

inline std::size_t rank(const QMatrix& a, std::size_t cols) { return cols - null_space(a, cols).size(); }

/// Z-basis of {y in Z^n : M y = 0} for an integer matrix M (rows x n), by
/// unimodular column reduction.
inline std::vector<std::vector<mpz_class>> integer_kernel(std::vector<std::vector<mpz_class>> m, std::size_t n) {
  std::vector<std::vector<mpz_class>> u(n, std::vector<mpz_class>(n, 0));  // columns transform
  for (std::size_t i = 0; i < n; ++i) u[i][i] = 1;
  auto col_op = [&](std::size_t dst, std::size_t src, const mpz_class& q) {  // col dst -= q col src
    for (auto& row : m) row[dst] -= q * row[src];
    for (auto& row : u) row[dst] -= q * row[src];
  };
  auto col_swap = [&](std::size_t x, std::size_t y) {
    for (auto& row : m) std::swap(row[x], row[y]);
    for (auto& row : u) std::swap(row[x], row[y]);
  };
  std::size_t piv = 0;
  for (std::size_t r = 0; r < m.size() && piv < n; ++r) {
    for (;;) {
      std::size_t best = n;
      for (std::size_t j = piv; j < n; ++j)
        if (m[r][j] != 0 && (best == n || abs(m[r][j]) < abs(m[r][best]))) best = j;
      if (best == n) break;
      col_swap(piv, best);
      bool done = true;
      for (std::size_t j = piv + 1; j < n; ++j) {
        if (m[r][j] == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), m[r][j].get_mpz_t(), m[r][piv].get_mpz_t());
        col_op(j, piv, q);
        if (m[r][j] != 0) done = false;
      }
      if (done) {
        ++piv;
        break;
      }
    }
  }
  std::vector<std::vector<mpz_class>> kernel;
  for (std::size_t j = piv; j < n; ++j) {
    std::vector<mpz_class> col(n);
    for (std::size_t i = 0; i < n; ++i) col[i] = u[i][j];
    kernel.push_back(std::move(col));
  }
  return kernel;
}

inline bool is_integral(const QVector& v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& q) { return q.get_den() == 1; });
}

}  // namespace linalg

/// Affine lattice origin + Z basis with norm 2^{-h} * max|beta| for the
/// vector sum beta_j basis_j.
struct ChebyshevLattice {
  Point<Rational> origin;
  std::vector<Point<Rational>> basis;
  int width_exp = 0;

  std::size_t dim() const { return basis.size(); }

  /// Coefficients of a vector in the basis, or nullopt outside the span.
  std::optional<QVector> coords(const Point<Rational>& vec) const {
    const std::size_t n = origin.dim();
    QMatrix a(n, QVector(basis.size()));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < basis.size(); ++j) a[i][j] = basis[j][i];
    return linalg::solve(std::move(a), vec.x);
  }
  bool contains_vector(const Point<Rational>& vec) const {
    auto c = coords(vec);
    return c && linalg::is_integral(*c);
  }
  bool contains(const Point<Rational>& p) const { return contains_vector(p - origin); }

  /// Chebyshev norm of a vector in the span.
  Rational norm(const Point<Rational>& vec) const {
    auto c = coords(vec);
    if (!c) throw std::invalid_argument("vector outside the lattice span");
    Rational m = 0;
    for (const auto& q : *c) m = std::max(m, Rational(abs(q)));
    mpq_div_2exp(m.get_mpq_t(), m.get_mpq_t(), static_cast<unsigned long>(width_exp));
    return m;
  }

  /// Refinement to lattice width 2^{-alpha} (alpha >= width_exp).
  ChebyshevLattice refined(int alpha) const {
    if (alpha < width_exp) throw std::invalid_argument("refinement to a coarser width");
    ChebyshevLattice r = *this;
    r.width_exp = alpha;
    for (auto& b : r.basis)
      for (auto& c : b.x) mpq_div_2exp(c.get_mpq_t(), c.get_mpq_t(), static_cast<unsigned long>(alpha - width_exp));
    return r;
  }
};

/// The unique 2^{-h}-lattice in which the array is a reference simplex.
template <class S>
ChebyshevLattice lattice_of(const std::vector<Point<S>>& pts, int type, int hyper) {
  const std::size_t m = pts.size() - 1;
  std::vector<Point<Rational>> p;
  for (const auto& x : pts) p.push_back(to_rational(x));
  ChebyshevLattice z;
  z.origin = p[0];
  z.width_exp = hyper;
  const auto k = static_cast<std::size_t>(type);
  for (std::size_t j = 1; j <= k; ++j) z.basis.push_back(p[j] - p[j - 1]);
  for (std::size_t j = k; j < m; ++j) {
    Point<Rational> centre = p[0];
    for (const auto& v : z.basis) centre = centre + halved(v);
    Point<Rational> v = p[j + 1] - centre;
    z.basis.push_back(v + v);
  }
  QMatrix a;
  for (const auto& b : z.basis) a.push_back(b.x);
  if (linalg::rank(a, p[0].dim()) != z.basis.size()) throw std::invalid_argument("degenerate simplex has no lattice");
  return z;
}

/// Equality of Chebyshev lattices: same width, same point set, and a basis
/// change that is a signed permutation (so the norms agree).
inline bool same_lattice(const ChebyshevLattice& a, const ChebyshevLattice& b) {
  if (a.width_exp != b.width_exp || a.dim() != b.dim()) return false;
  if (!a.contains(b.origin)) return false;
  for (const auto& v : b.basis) {
    auto c = a.coords(v);
    if (!c || !linalg::is_integral(*c)) return false;
    int nonzero = 0;
    for (const auto& q : *c) {
      if (q == 0) continue;
      if (abs(q) != 1) return false;
      ++nonzero;
    }
    if (nonzero != 1) return false;
  }
  for (const auto& v : a.basis)
    if (!b.contains_vector(v)) return false;
  return true;
}

namespace detail {

/// Z-basis (columns as points) of the lattice vectors of `z` lying in the
/// span of `dirs`.
inline std::vector<Point<Rational>> sublattice_basis(const ChebyshevLattice& z, const std::vector<Point<Rational>>& dirs) {
  const std::size_t n = z.dim();
  QMatrix coeff;  // rows: coefficient vectors of the directions
  for (const auto& d : dirs) {
    auto c = z.coords(d);
    if (!c) throw std::invalid_argument("direction outside the lattice span");
    coeff.push_back(*c);
  }
  auto ortho = linalg::null_space(coeff, n);
  std::vector<std::vector<mpz_class>> m;
  for (auto& row : ortho) {
    mpz_class l = 1;
    for (const auto& q : row) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), q.get_den_mpz_t());
    std::vector<mpz_class> ir(n);
    for (std::size_t i = 0; i < n; ++i) ir[i] = row[i].get_num() * (l / row[i].get_den());
    m.push_back(std::move(ir));
  }
  auto ker = linalg::integer_kernel(m, n);
  std::vector<Point<Rational>> g;
  for (const auto& y : ker) {
    Point<Rational> v(z.origin.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) v[i] = 0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < v.dim(); ++i) v[i] += z.basis[j][i] * Rational(y[j]);
    g.push_back(std::move(v));
  }
  return g;
}

/// Vertices of the unit ball {y : max_i |rows_i . y| <= 1} (bounded case).
inline std::vector<QVector> unit_ball_vertices(const QMatrix& rows, std::size_t m) {
  std::vector<QVector> verts;
  const std::size_t r = rows.size();
  std::vector<std::size_t> pick(m);
  std::vector<bool> mask(r, false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(m), true);
  std::sort(mask.begin(), mask.end(), std::greater<>());
  do {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < r; ++i)
      if (mask[i]) idx.push_back(i);
    QMatrix a;
    for (auto i : idx) a.push_back(rows[i]);
    if (linalg::rank(a, m) != m) continue;
    for (unsigned long signs = 0; signs < (1UL << m); ++signs) {
      QVector b(m);
      for (std::size_t j = 0; j < m; ++j) b[j] = (signs >> j) & 1UL ? -1 : 1;
      auto y = linalg::solve(a, b);
      if (!y) continue;
      bool feasible = true;
      for (const auto& row : rows) {
        Rational s = 0;
        for (std::size_t j = 0; j < m; ++j) s += row[j] * (*y)[j];
        if (abs(s) > 1) feasible = false;
      }
      if (feasible) verts.push_back(*y);
    }
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return verts;
}

inline bool ball_inside(const std::vector<QVector>& verts, const QMatrix& rows) {
  for (const auto& y : verts)
    for (const auto& row : rows) {
      Rational s = 0;
      for (std::size_t j = 0; j < y.size(); ++j) s += row[j] * y[j];
      if (abs(s) > 1) return false;
    }
  return true;
}

}  // namespace detail

/// Whether two lattices induce the same Chebyshev sublattice on the affine
/// hull of `w` (points shared by both simplices).
inline bool same_sublattice(const ChebyshevLattice& a, const ChebyshevLattice& b, const std::vector<Point<Rational>>& w) {
  if (a.width_exp != b.width_exp) return false;
  const Point<Rational>* anchor = nullptr;
  for (const auto& p : w)
    if (a.contains(p)) {
      anchor = &p;
      break;
    }
  if (!anchor || !b.contains(*anchor)) return false;
  std::vector<Point<Rational>> dirs;
  for (const auto& p : w)
    if (&p != anchor) dirs.push_back(p - *anchor);
  auto ga = detail::sublattice_basis(a, dirs);
  auto gb = detail::sublattice_basis(b, dirs);
  if (ga.size() != gb.size()) return false;
  const std::size_t m = ga.size();
  if (m == 0) return true;
  auto in_span = [](const std::vector<Point<Rational>>& basis, const Point<Rational>& v) {
    QMatrix mat(v.dim(), QVector(basis.size()));
    for (std::size_t i = 0; i < v.dim(); ++i)
      for (std::size_t j = 0; j < basis.size(); ++j) mat[i][j] = basis[j][i];
    auto c = linalg::solve(std::move(mat), v.x);
    return c && linalg::is_integral(*c);
  };
  for (const auto& v : gb)
    if (!in_span(ga, v)) return false;
  for (const auto& v : ga)
    if (!in_span(gb, v)) return false;
  // Norms on the common sublattice: y -> coefficients in each full basis.
  auto rows_for = [&](const ChebyshevLattice& z) {
    QMatrix rows(z.dim(), QVector(m));
    for (std::size_t j = 0; j < m; ++j) {
      auto c = z.coords(ga[j]);
      for (std::size_t i = 0; i < z.dim(); ++i) rows[i][j] = (*c)[i];
    }
    return rows;
  };
  const QMatrix ra = rows_for(a), rb = rows_for(b);
  return detail::ball_inside(detail::unit_ball_vertices(ra, m), rb) &&
         detail::ball_inside(detail::unit_ball_vertices(rb, m), ra);
}

}  // namespace nvb
