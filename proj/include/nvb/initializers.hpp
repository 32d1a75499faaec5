#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <random>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvb/lattice.hpp"
#include "nvb/meshes.hpp"
#include "nvb/refine.hpp"
#include "nvb/report.hpp"

namespace nvb {

class InitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

using Face = std::vector<int>;  // sorted vertex ids

/// Marked points of types 2..n.
template <class S>
struct PointMarking {
  std::map<int, std::vector<Point<S>>> points_by_type;
};

/// Assignment of one marked point to every face in S_m, for all m.
template <class S>
struct MarkingAssignment {
  std::map<Face, Point<S>> point_of;
};

/// Disjoint cover of the vertices with orders (rank per vertex id; lower
/// rank first). Empty rank vectors mean vertex-id order.
struct VertexPartition {
  std::vector<int> v0, v1;
  std::vector<int> rank0, rank1;
};

namespace detail {

/// Affine coordinates of `x` with respect to the points of a face, or
/// nullopt when x is not in their affine hull.
template <class S>
std::optional<QVector> affine_coords(const Point<S>& x, const std::vector<Point<S>>& face) {
  const std::size_t n = x.dim();
  QMatrix a(n + 1, QVector(face.size()));
  QVector b(n + 1);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < face.size(); ++j) a[i][j] = to_rational(face[j][i]);
    b[i] = to_rational(x[i]);
  }
  for (std::size_t j = 0; j < face.size(); ++j) a[n][j] = 1;
  b[n] = 1;
  return linalg::solve(std::move(a), std::move(b));
}

template <class S>
bool face_contains(const Point<S>& x, const std::vector<Point<S>>& face) {
  auto c = affine_coords(x, face);
  return c && std::all_of(c->begin(), c->end(), [](const Rational& q) { return q >= 0; });
}

template <class S>
std::vector<Point<S>> face_points(const UntaggedMesh<S>& u, const Face& f) {
  std::vector<Point<S>> r;
  for (int id : f) r.push_back(u.vertices[static_cast<std::size_t>(id)]);
  return r;
}

template <class S>
Point<S> barycentre(const std::vector<Point<S>>& pts) {
  Point<S> s = pts[0];
  for (std::size_t i = 1; i < pts.size(); ++i) s = s + pts[i];
  for (auto& c : s.x) c = divide_exact(c, static_cast<long>(pts.size()));
  return s;
}

}  // namespace detail

/// All m-faces of the cells, sorted.
template <class S>
std::vector<Face> faces_of_dim(const UntaggedMesh<S>& u, int m) {
  std::set<Face> out;
  for (const auto& cell : u.cells) {
    std::vector<int> c = cell;
    std::sort(c.begin(), c.end());
    const std::size_t k = static_cast<std::size_t>(m) + 1;
    std::vector<bool> mask(c.size(), false);
    std::fill(mask.begin(), mask.begin() + static_cast<long>(k), true);
    do {
      Face f;
      for (std::size_t i = 0; i < c.size(); ++i)
        if (mask[i]) f.push_back(c[i]);
      out.insert(std::move(f));
    } while (std::prev_permutation(mask.begin(), mask.end()));
  }
  return {out.begin(), out.end()};
}

/// Validates a marking and assigns its points to the faces in S_m.
template <class S>
MarkingAssignment<S> assign_marking(const UntaggedMesh<S>& u, const PointMarking<S>& mk) {
  const int n = u.dim;
  for (const auto& [t, pts] : mk.points_by_type)
    if (t < 2 || t > n) throw InitError("marked point type " + std::to_string(t) + " outside 2.." + std::to_string(n));
  MarkingAssignment<S> a;
  std::vector<std::pair<int, const Point<S>*>> higher;
  for (int m = n; m >= 2; --m) {
    static const std::vector<Point<S>> none;
    auto it = mk.points_by_type.find(m);
    const auto& pts = it == mk.points_by_type.end() ? none : it->second;
    std::vector<bool> used(pts.size(), false);
    for (const Face& f : faces_of_dim(u, m)) {
      const auto fp = detail::face_points(u, f);
      bool excluded = false;
      for (const auto& [t, q] : higher)
        if (detail::face_contains(*q, fp)) {
          excluded = true;
          break;
        }
      if (excluded) continue;
      int found = -1;
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!detail::face_contains(pts[i], fp)) continue;
        if (found >= 0) throw InitError("face contains two marked points of type " + std::to_string(m));
        found = static_cast<int>(i);
      }
      if (found < 0) throw InitError("face without a marked point of type " + std::to_string(m));
      used[static_cast<std::size_t>(found)] = true;
      a.point_of.emplace(f, pts[static_cast<std::size_t>(found)]);
    }
    for (std::size_t i = 0; i < pts.size(); ++i)
      if (!used[i]) throw InitError("marked point of type " + std::to_string(m) + " lies in no face of S_m");
    for (const auto& p : pts) higher.emplace_back(m, &p);
  }
  return a;
}

/// Barycentres of all m-faces as points of type m.
template <class S>
PointMarking<S> barycentre_marking(const UntaggedMesh<S>& u) {
  PointMarking<S> mk;
  for (int m = u.dim; m >= 2; --m)
    for (const Face& f : faces_of_dim(u, m)) mk.points_by_type[m].push_back(detail::barycentre(detail::face_points(u, f)));
  return mk;
}

/// Greedy marking preferring low-dimensional faces, then long edges.
template <class S>
PointMarking<S> greedy_marking(const UntaggedMesh<S>& u) {
  const int n = u.dim;
  struct Cand {
    Face f;
    Rational longest;
  };
  std::vector<Cand> cands;
  for (int d = 0; d <= n; ++d)
    for (const Face& f : faces_of_dim(u, d)) {
      Rational l = 0;
      for (std::size_t i = 0; i < f.size(); ++i)
        for (std::size_t j = i + 1; j < f.size(); ++j)
          l = std::max(l, sq_dist(u.vertices[static_cast<std::size_t>(f[i])], u.vertices[static_cast<std::size_t>(f[j])]));
      cands.push_back({f, l});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    if (a.f.size() != b.f.size()) return a.f.size() < b.f.size();
    if (a.longest != b.longest) return a.longest > b.longest;
    return a.f < b.f;
  });
  PointMarking<S> mk;
  std::vector<Point<S>> higher;
  for (int m = n; m >= 2; --m) {
    std::vector<Face> sm;
    for (const Face& f : faces_of_dim(u, m)) {
      const auto fp = detail::face_points(u, f);
      bool excluded = std::any_of(higher.begin(), higher.end(), [&](const Point<S>& q) { return detail::face_contains(q, fp); });
      if (!excluded) sm.push_back(f);
    }
    std::set<Face> assigned;
    for (const Cand& c : cands) {
      if (assigned.size() == sm.size()) break;
      std::vector<const Face*> patch;
      bool clash = false;
      for (const Face& s : sm)
        if (std::includes(s.begin(), s.end(), c.f.begin(), c.f.end())) {
          if (assigned.count(s)) clash = true;
          patch.push_back(&s);
        }
      if (patch.empty() || clash) continue;
      const Point<S> p = detail::barycentre(detail::face_points(u, c.f));
      for (const Face* s : patch) assigned.insert(*s);
      mk.points_by_type[m].push_back(p);
    }
    for (const auto& p : mk.points_by_type[m]) higher.push_back(p);
  }
  return mk;
}

/// Division of every cell by its marked points; each final cell gets a
/// type-1 array (p0 p1; q2; ...; qn).
template <class S>
Mesh<S> initial_division(const UntaggedMesh<S>& u, const PointMarking<S>& mk) {
  const int n = u.dim;
  if (n < 1) throw InitError("dimension must be at least 1");
  const auto assignment = assign_marking(u, mk);
  Mesh<S> out(n);
  struct Part {
    std::vector<int> o;  // old vertices, ordered
    std::vector<Point<S>> q;  // new vertices q_m, ..., q_n
  };
  for (const auto& cell : u.cells) {
    if (static_cast<int>(cell.size()) != n + 1) throw InitError("cell with wrong vertex count");
    std::vector<Part> parts{{cell, {}}};
    for (int m = n; m >= 2; --m) {
      std::vector<Part> next;
      for (const Part& t : parts) {
        Face f = t.o;
        std::sort(f.begin(), f.end());
        auto it = assignment.point_of.find(f);
        if (it == assignment.point_of.end()) throw InitError("no marked point for a face of dimension " + std::to_string(m));
        const Point<S>& pt = it->second;
        const auto coords = detail::affine_coords(pt, detail::face_points(u, t.o));
        for (std::size_t i = 0; i < t.o.size(); ++i) {
          if ((*coords)[i] <= 0) continue;
          Part p;
          for (std::size_t j = 1; j < t.o.size(); ++j) p.o.push_back(t.o[(i + j) % t.o.size()]);
          p.q.push_back(pt);
          p.q.insert(p.q.end(), t.q.begin(), t.q.end());
          next.push_back(std::move(p));
        }
      }
      parts = std::move(next);
    }
    for (const Part& t : parts) {
      std::vector<Point<S>> pts;
      for (int id : t.o) pts.push_back(u.vertices[static_cast<std::size_t>(id)]);
      pts.insert(pts.end(), t.q.begin(), t.q.end());
      add_cell(out, pts, n >= 1 ? 1 : 0, 0);
    }
  }
  return out;
}

/// Tagging from a vertex partition (AGK): cells touching v0 get hyperlevel 0
/// with the v0 vertices horizontal, the others hyperlevel 1 and full type.
template <class S>
Mesh<S> agk_init(const UntaggedMesh<S>& u, const VertexPartition& part) {
  const auto nv = u.vertices.size();
  std::vector<int> side(nv, -1);
  for (int v : part.v0) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv) throw InitError("partition references an unknown vertex");
    side[static_cast<std::size_t>(v)] = 0;
  }
  for (int v : part.v1) {
    if (v < 0 || static_cast<std::size_t>(v) >= nv) throw InitError("partition references an unknown vertex");
    if (side[static_cast<std::size_t>(v)] == 0) throw InitError("partition sets are not disjoint");
    side[static_cast<std::size_t>(v)] = 1;
  }
  for (std::size_t v = 0; v < nv; ++v)
    if (side[v] < 0) throw InitError("vertex " + std::to_string(v) + " is in no partition set");
  auto rank = [](const std::vector<int>& r, int v) {
    return r.empty() ? v : r.at(static_cast<std::size_t>(v));
  };
  Mesh<S> out(u.dim);
  for (const auto& p : u.vertices) out.add_vertex(p);
  for (const auto& cell : u.cells) {
    std::vector<int> h, w;
    for (int v : cell) (side[static_cast<std::size_t>(v)] == 0 ? h : w).push_back(v);
    std::sort(h.begin(), h.end(), [&](int a, int b) { return rank(part.rank0, a) < rank(part.rank0, b); });
    std::sort(w.begin(), w.end(), [&](int a, int b) { return rank(part.rank1, a) < rank(part.rank1, b); });
    TArray t;
    t.v = h;
    t.v.insert(t.v.end(), w.begin(), w.end());
    if (h.empty()) {
      t.type = u.dim;
      t.hyper = 1;
    } else {
      t.type = static_cast<int>(h.size()) - 1;
      t.hyper = 0;
    }
    out.add_root(std::move(t));
  }
  return out;
}

/// Random partition: each vertex joins v0 with probability 1/2; both orders
/// are random permutations.
template <class Rng>
VertexPartition random_partition(int vertex_count, Rng& rng) {
  VertexPartition p;
  std::bernoulli_distribution coin(0.5);
  for (int v = 0; v < vertex_count; ++v) (coin(rng) ? p.v0 : p.v1).push_back(v);
  for (auto* r : {&p.rank0, &p.rank1}) {
    r->resize(static_cast<std::size_t>(vertex_count));
    std::iota(r->begin(), r->end(), 0);
    std::shuffle(r->begin(), r->end(), rng);
  }
  return p;
}

namespace detail {

/// Pairs of distinct leaves sharing at least one vertex, with the shared ids.
template <class S>
std::vector<std::tuple<int, int, std::vector<int>>> touching_pairs(const Mesh<S>& m) {
  std::vector<std::tuple<int, int, std::vector<int>>> r;
  for (int a : m.leaves()) {
    std::set<int> nb;
    for (int v : m.cell(a).v)
      for (int b : m.leaves_at_vertex(v))
        if (b > a) nb.insert(b);
    for (int b : nb) {
      std::vector<int> w;
      for (int v : m.cell(a).v)
        if (m.cell(b).contains(v)) w.push_back(v);
      r.emplace_back(a, b, std::move(w));
    }
  }
  return r;
}

inline std::string pair_str(int a, int b) { return "(" + std::to_string(a) + "," + std::to_string(b) + ")"; }

}  // namespace detail

/// SIC: regular, equal types, and on uniform refinements up to `depth`
/// every edge is the refinement edge of all or none of its sharers.
template <class S>
Report check_sic(const Mesh<S>& t0, int depth = -1) {
  Report rep;
  if (depth < 0) depth = t0.dim() + 1;
  rep.note("reference-coordinate clause checked operationally up to depth " + std::to_string(depth));
  const auto conf = check_conforming(t0);
  if (!conf.ok()) {
    rep.fail("not regular: " + conf.violations.front());
    return rep;
  }
  const int type = t0.cell(t0.leaves().front()).type;
  for (int l : t0.leaves())
    if (t0.cell(l).type != type) {
      rep.fail("cells " + std::to_string(t0.leaves().front()) + " and " + std::to_string(l) + " differ in type");
      return rep;
    }
  Mesh<S> m = t0;
  for (int d = 0; d <= depth; ++d) {
    auto bad = mixed_refinement_edges(m);
    if (!bad.empty()) {
      rep.fail("depth " + std::to_string(d) + ": edge (" + std::to_string(bad[0].a) + "," + std::to_string(bad[0].b) +
               ") is the refinement edge of only some sharers");
      return rep;
    }
    if (d == depth) break;
    const int before = m.node_count();
    uniform_refine(m);
    auto c = check_conforming_since(m, before);
    if (!c.ok()) {
      rep.fail("depth " + std::to_string(d + 1) + ": " + c.violations.front());
      return rep;
    }
  }
  return rep;
}

/// ReTaCo: restrictions to common faces coincide up to reflection and
/// transposition.
template <class S>
Report check_retaco(const Mesh<S>& m) {
  Report rep;
  for (const auto& [a, b, w] : detail::touching_pairs(m)) {
    const TArray u = canonicalize(restrict_to(m.cell(a), w, RestrictRule::Legacy));
    const TArray v = canonicalize(restrict_to(m.cell(b), w, RestrictRule::Legacy));
    if (u.v != v.v || u.type != v.type)
      rep.fail("restrictions of " + detail::pair_str(a, b) + " differ: " + u.str() + " vs " + v.str());
  }
  return rep;
}

/// ReTaHyCo: hyperlevels in {0,1}, hyperlevel 1 only with full type,
/// consistent vertex hyperlevels, and hyperlevel-aware restrictions coincide.
template <class S>
Report check_retahyco(const Mesh<S>& m) {
  Report rep;
  const int n = m.dim();
  std::map<int, std::pair<int, int>> vertex_h;  // vertex -> (hyperlevel, witness)
  for (int l : m.leaves()) {
    const TArray& s = m.cell(l);
    if (s.hyper != 0 && s.hyper != 1) rep.fail("cell " + std::to_string(l) + " has hyperlevel " + std::to_string(s.hyper));
    if (s.hyper == 1 && s.type != n) rep.fail("cell " + std::to_string(l) + " has hyperlevel 1 but type " + std::to_string(s.type));
    for (int v : s.v) {
      const int hp = s.is_horizontal(v) ? s.hyper : s.hyper + 1;
      auto [it, fresh] = vertex_h.emplace(v, std::make_pair(hp, l));
      if (!fresh && it->second.first != hp)
        rep.fail("vertex " + std::to_string(v) + " has hyperlevel " + std::to_string(hp) + " in cell " + std::to_string(l) +
                 " but " + std::to_string(it->second.first) + " in cell " + std::to_string(it->second.second));
    }
  }
  for (const auto& [a, b, w] : detail::touching_pairs(m)) {
    const TArray u = canonicalize(restrict_to(m.cell(a), w, RestrictRule::Hyper));
    const TArray v = canonicalize(restrict_to(m.cell(b), w, RestrictRule::Hyper));
    if (!(u == v)) rep.fail("restrictions of " + detail::pair_str(a, b) + " differ: " + u.str() + " h" +
                            std::to_string(u.hyper) + " vs " + v.str() + " h" + std::to_string(v.hyper));
  }
  return rep;
}

/// PC: regular, and refinement edges lying in a common face coincide.
template <class S>
Report check_pc(const Mesh<S>& m) {
  Report rep;
  const auto conf = check_conforming(m);
  if (!conf.ok()) rep.fail("not regular: " + conf.violations.front());
  for (const auto& [a, b, w] : detail::touching_pairs(m)) {
    const Edge ea = refinement_edge(m.cell(a));
    const Edge eb = refinement_edge(m.cell(b));
    auto inside = [&](const Edge& e) {
      return std::find(w.begin(), w.end(), e.a) != w.end() && std::find(w.begin(), w.end(), e.b) != w.end();
    };
    if (inside(ea) && inside(eb) && !(ea == eb))
      rep.fail("refinement edges of " + detail::pair_str(a, b) + " both lie in the intersection but differ");
  }
  return rep;
}

/// IsoCoChange: refined Chebyshev lattices induce the same sublattice on the
/// affine hull of every pairwise intersection.
template <class S>
Report check_isocochange(const Mesh<S>& m) {
  Report rep;
  for (const auto& [a, b, w] : detail::touching_pairs(m)) {
    const TArray& sa = m.cell(a);
    const TArray& sb = m.cell(b);
    const int alpha = std::max(restrict_to(sa, w, RestrictRule::Hyper).hyper, restrict_to(sb, w, RestrictRule::Hyper).hyper);
    const auto za = lattice_of(m.points(a), sa.type, sa.hyper).refined(alpha);
    const auto zb = lattice_of(m.points(b), sb.type, sb.hyper).refined(alpha);
    std::vector<Point<Rational>> wp;
    for (int v : w) wp.push_back(to_rational(m.vertex(v)));
    if (!same_sublattice(za, zb, wp)) rep.fail("sublattices of " + detail::pair_str(a, b) + " differ on their intersection");
  }
  return rep;
}

}  // namespace nvb
