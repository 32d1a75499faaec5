#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "nvb/mesh.hpp"

namespace nvb {

/// Vertices and cells without tags (input of the initialisers).
template <class S>
struct UntaggedMesh {
  int dim = 0;
  std::vector<Point<S>> vertices;
  std::vector<std::vector<int>> cells;
};

/// Vertices of the Kuhn simplex p_j = p_{j-1} + scale * signs[j] * e_{perm[j]}
/// (perm is a permutation of 0..n-1).
template <class S>
std::vector<Point<S>> kuhn_points(const std::vector<int>& perm, const std::vector<int>& signs,
                                  const Point<S>& offset, const S& scale = S(1)) {
  const std::size_t n = perm.size();
  if (signs.size() != n || offset.dim() != n) throw std::invalid_argument("kuhn: size mismatch");
  std::vector<int> check = perm;
  std::sort(check.begin(), check.end());
  for (std::size_t i = 0; i < n; ++i)
    if (check[i] != static_cast<int>(i)) throw std::invalid_argument("kuhn: not a permutation");
  std::vector<Point<S>> pts{offset};
  for (std::size_t j = 0; j < n; ++j) {
    Point<S> p = pts.back();
    const auto axis = static_cast<std::size_t>(perm[j]);
    if (signs[j] > 0) p[axis] = p[axis] + scale;
    else p[axis] = p[axis] - scale;
    pts.push_back(std::move(p));
  }
  return pts;
}

/// Adds a full-type cell with the given points (in array order) to `m`.
template <class S>
int add_cell(Mesh<S>& m, const std::vector<Point<S>>& pts, int type, int hyper) {
  TArray t;
  for (const auto& p : pts) t.v.push_back(m.add_vertex(p));
  t.type = type;
  t.hyper = hyper;
  return m.add_root(std::move(t));
}

/// Single Kuhn simplex of the identity permutation at the origin.
template <class S>
Mesh<S> kuhn_simplex_mesh(int n, int hyper = 0, const S& scale = S(1)) {
  Mesh<S> m(n);
  std::vector<int> perm(static_cast<std::size_t>(n)), signs(static_cast<std::size_t>(n), 1);
  std::iota(perm.begin(), perm.end(), 0);
  add_cell(m, kuhn_points(perm, signs, Point<S>(static_cast<std::size_t>(n)), scale), n, hyper);
  return m;
}

/// Kuhn triangulation of [0,k]^n (times `scale`): n! full-type simplices
/// per unit cube. With `reflected`, cubes with odd corner coordinates are
/// mirrored along those axes (Union-Jack pattern in 2D).
template <class S>
Mesh<S> kuhn_cube_mesh(int n, int k, bool reflected = false, int hyper = 0, const S& scale = S(1)) {
  Mesh<S> m(n);
  const auto un = static_cast<std::size_t>(n);
  std::vector<int> corner(un, 0);
  for (;;) {
    Point<S> origin(un);
    std::vector<int> signs(un, 1);
    for (std::size_t i = 0; i < un; ++i) {
      const bool flip = reflected && (corner[i] % 2 == 1);
      origin[i] = S(corner[i] + (flip ? 1 : 0)) * scale;
      signs[i] = flip ? -1 : 1;
    }
    std::vector<int> perm(un);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> s(un);
      for (std::size_t j = 0; j < un; ++j) s[j] = signs[static_cast<std::size_t>(perm[j])];
      add_cell(m, kuhn_points(perm, s, origin, scale), n, hyper);
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::size_t i = 0;
    while (i < un && ++corner[i] == k) corner[i++] = 0;
    if (i == un) break;
  }
  return m;
}

/// Forgets the tags of the roots of `m`.
template <class S>
UntaggedMesh<S> untagged(const Mesh<S>& m) {
  UntaggedMesh<S> u;
  u.dim = m.dim();
  u.vertices = m.pool().points();
  for (int r = 0; r < m.root_count(); ++r) u.cells.push_back(m.cell(r).v);
  return u;
}

/// Root-only copy of `m` (same vertex ids for root vertices).
template <class S>
Mesh<S> roots_of(const Mesh<S>& m) {
  Mesh<S> r(m.dim());
  for (int v = 0; v < m.vertex_count(); ++v) r.add_vertex(m.vertex(v));
  for (int i = 0; i < m.root_count(); ++i) {
    TArray t = m.cell(i);
    r.add_root(std::move(t));
  }
  return r;
}

}  // namespace nvb
