#pragma once

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "nvb/mesh.hpp"
#include "nvb/report.hpp"

namespace nvb {

/// Raised when a closure cannot be completed (non-refineable tagging).
class RefineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Default bound on the closure stack: 64 * n * #cells.
template <class S>
long default_guard(const Mesh<S>& m) {
  return 64L * m.dim() * std::max(1, m.leaf_count());
}

/// Coarsest conforming refinement in which `leaf` is bisected. Before the
/// sharers of a refinement edge are bisected, every sharer with a different
/// refinement edge is refined first.
template <class S>
void refine(Mesh<S>& m, int leaf, long guard = 0) {
  if (!m.is_leaf(leaf)) throw std::invalid_argument("refine: cell is not a leaf");
  if (guard <= 0) guard = default_guard(m);
  std::vector<int> stack{leaf};
  while (!stack.empty()) {
    const int t = stack.back();
    if (!m.is_leaf(t)) {
      stack.pop_back();
      continue;
    }
    const Edge e = refinement_edge(m.cell(t));
    const std::vector<int> sharers = m.leaves_with_edge(e.a, e.b);
    int pending = -1;
    for (int u : sharers)
      if (!(refinement_edge(m.cell(u)) == e)) {
        pending = u;
        break;
      }
    if (pending >= 0) {
      if (static_cast<long>(stack.size()) >= guard)
        throw RefineError("closure depth exceeded " + std::to_string(guard) + " (tagging not refineable)");
      stack.push_back(pending);
      continue;
    }
    for (int u : sharers) m.bisect(u);
    stack.pop_back();
  }
}

struct HangingNode {
  int vertex;
  int leaf;
};

struct ConformityReport : Report {
  std::vector<HangingNode> hanging;
};

namespace detail {

template <class S>
void check_vertex_against_leaves(const Mesh<S>& m, int v, ConformityReport& rep) {
  const auto& p = m.pool().approx(v);
  for (int l : m.leaves()) {
    if (m.cell(l).contains(v)) continue;
    if (!m.box_contains(l, p)) continue;
    if (locate(m.vertex(v), m.point_ptrs(l)) != Location::Outside) {
      rep.hanging.push_back({v, l});
      rep.fail("hanging vertex " + std::to_string(v) + " " + m.vertex(v).str() + " in leaf " + std::to_string(l));
    }
  }
}

}  // namespace detail

/// Full conformity check: no leaf vertex lies in another leaf unless it is
/// one of its vertices, and leaves sharing a facet lie on opposite sides.
template <class S>
ConformityReport check_conforming(const Mesh<S>& m) {
  ConformityReport rep;
  std::vector<int> verts = m.leaf_vertices();
  std::sort(verts.begin(), verts.end(),
            [&](int a, int b) { return m.pool().approx(a)[0] < m.pool().approx(b)[0]; });
  std::vector<double> xs;
  xs.reserve(verts.size());
  for (int v : verts) xs.push_back(m.pool().approx(v)[0]);
  for (int l : m.leaves()) {
    const Box b = m.box(l);
    auto lo = std::lower_bound(xs.begin(), xs.end(), b.lo[0]) - xs.begin();
    auto hi = std::upper_bound(xs.begin(), xs.end(), b.hi[0]) - xs.begin();
    for (auto i = lo; i < hi; ++i) {
      const int v = verts[static_cast<std::size_t>(i)];
      if (m.cell(l).contains(v) || !b.contains(m.pool().approx(v))) continue;
      if (locate(m.vertex(v), m.point_ptrs(l)) != Location::Outside) {
        rep.hanging.push_back({v, l});
        rep.fail("hanging vertex " + std::to_string(v) + " " + m.vertex(v).str() + " in leaf " +
                 std::to_string(l));
      }
    }
  }
  // Facet layer.
  std::map<std::vector<int>, std::vector<int>> facets;
  std::map<std::vector<int>, int> cells;
  for (int l : m.leaves()) {
    std::vector<int> vs = m.cell(l).v;
    std::sort(vs.begin(), vs.end());
    if (!cells.emplace(vs, l).second) rep.fail("leaves " + std::to_string(l) + " and " +
                                               std::to_string(cells[vs]) + " have the same vertices");
    for (std::size_t skip = 0; skip < vs.size(); ++skip) {
      std::vector<int> f;
      for (std::size_t i = 0; i < vs.size(); ++i)
        if (i != skip) f.push_back(vs[i]);
      facets[f].push_back(l);
    }
  }
  for (const auto& [f, ls] : facets) {
    if (ls.size() > 2) {
      rep.fail("facet shared by " + std::to_string(ls.size()) + " leaves");
      continue;
    }
    if (ls.size() < 2) continue;
    int side[2];
    for (int i = 0; i < 2; ++i) {
      std::vector<const Point<S>*> pts;
      for (int id : f) pts.push_back(&m.vertex(id));
      for (int id : m.cell(ls[static_cast<std::size_t>(i)]).v)
        if (!std::binary_search(f.begin(), f.end(), id)) pts.push_back(&m.vertex(id));
      side[i] = sgn(signed_det(pts));
    }
    if (side[0] == side[1])
      rep.fail("leaves " + std::to_string(ls[0]) + " and " + std::to_string(ls[1]) + " overlap across a facet");
  }
  return rep;
}

/// Checks only the vertices created by nodes with id >= first_new_node.
/// Complete when the mesh was conforming before those nodes appeared.
template <class S>
ConformityReport check_conforming_since(const Mesh<S>& m, int first_new_node) {
  ConformityReport rep;
  std::vector<int> fresh;
  for (int id = std::max(first_new_node, m.root_count()); id < m.node_count(); ++id)
    fresh.push_back(m.node(id).vnew);
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
  for (int v : fresh)
    if (!m.leaves_at_vertex(v).empty()) detail::check_vertex_against_leaves(m, v, rep);
  return rep;
}

/// Edges shared by leaves where some but not all sharers bisect them.
template <class S>
std::vector<Edge> mixed_refinement_edges(const Mesh<S>& m) {
  std::unordered_map<Edge, std::pair<int, int>, EdgeHash> count;
  for (int l : m.leaves()) {
    const auto& v = m.cell(l).v;
    const Edge r = refinement_edge(m.cell(l));
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        Edge e(v[i], v[j]);
        auto& c = count[e];
        ++c.first;
        if (e == r) ++c.second;
      }
  }
  std::vector<Edge> bad;
  for (const auto& [e, c] : count)
    if (c.second > 0 && c.second < c.first) bad.push_back(e);
  std::sort(bad.begin(), bad.end());
  return bad;
}

/// Bisects every leaf exactly once.
template <class S>
void uniform_refine(Mesh<S>& m) {
  auto bad = mixed_refinement_edges(m);
  if (!bad.empty())
    throw RefineError("edge (" + std::to_string(bad[0].a) + "," + std::to_string(bad[0].b) +
                      ") is the refinement edge of only some of its sharers");
  const std::vector<int> snapshot = m.leaves();
  for (int l : snapshot) m.bisect(l);
}

/// Bisects, with closure, every leaf whose refinement edge has hyperlevel
/// at most j until none is left.
template <class S>
void hyperlevel_uniform_refine(Mesh<S>& m, int j, long guard = 0) {
  long rounds = 0;
  const long limit = guard > 0 ? guard : default_guard(m) * 64;
  for (;;) {
    std::vector<int> todo;
    for (int l : m.leaves())
      if (refinement_edge(m.cell(l)).hyper <= j) todo.push_back(l);
    if (todo.empty()) return;
    for (int l : todo) {
      if (!m.is_leaf(l)) continue;
      if (++rounds > limit) throw RefineError("hyperlevel-uniform refinement does not terminate");
      refine(m, l, guard);
    }
  }
}

/// Edges bisected by the quasi-uniform refinement: every edge of the current
/// leaves and every edge from the midpoint of two horizontal vertices to a
/// vertical vertex of a leaf of type 1..n-1.
template <class S>
std::unordered_set<Edge, EdgeHash> quasi_uniform_edges(Mesh<S>& m) {
  std::unordered_set<Edge, EdgeHash> edges;
  const std::vector<int> snapshot = m.leaves();
  for (int l : snapshot) {
    const TArray s = m.cell(l);
    for (std::size_t i = 0; i < s.v.size(); ++i)
      for (std::size_t j = i + 1; j < s.v.size(); ++j) edges.insert(Edge(s.v[i], s.v[j]));
    if (s.type < 1 || s.type >= s.dim()) continue;
    for (int a = 0; a <= s.type; ++a)
      for (int b = a + 1; b <= s.type; ++b) {
        const int hh = m.add_vertex(midpoint(m.vertex(s.v[static_cast<std::size_t>(a)]),
                                             m.vertex(s.v[static_cast<std::size_t>(b)])));
        for (int vv : s.vertical()) edges.insert(Edge(hh, vv));
      }
  }
  return edges;
}

/// Refinement with every level in {n..2n-1} relative to the current leaves.
template <class S>
void quasi_uniform_refine(Mesh<S>& m) {
  const auto edges = quasi_uniform_edges(m);
  long steps = 0;
  const long limit = default_guard(m) * 64;
  for (;;) {
    std::vector<int> todo;
    for (int l : m.leaves())
      if (edges.count(refinement_edge(m.cell(l)))) todo.push_back(l);
    if (todo.empty()) break;
    for (int l : todo) {
      if (++steps > limit) throw RefineError("quasi-uniform refinement does not terminate");
      m.bisect(l);
    }
  }
  auto rep = check_conforming(m);
  if (!rep.ok()) throw RefineError("quasi-uniform refinement is not conforming: " + rep.violations.front());
}

/// Largest level jump of a leaf below the leaf it refines, for nodes created
/// after `first_new_node`.
template <class S>
int level_jump_since(const Mesh<S>& m, int first_new_node) {
  int best = 0;
  for (int l : m.leaves()) {
    if (l < first_new_node) continue;
    int a = l;
    while (a >= first_new_node) a = m.node(a).parent;
    best = std::max(best, m.cell(l).level - m.cell(a).level);
  }
  return best;
}

}  // namespace nvb
