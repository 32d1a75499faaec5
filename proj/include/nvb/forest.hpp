#pragma once

#include <algorithm>
#include <functional>
#include <set>
#include <stdexcept>
#include <unordered_set>
#include <vector>

#include "nvb/meshes.hpp"
#include "nvb/refine.hpp"
#include "nvb/report.hpp"

namespace nvb {

struct ForestCounts {
  long cells_minus_initial = 0;
  long nonleaves = 0;
  long half_nonroot = 0;
  bool consistent() const { return cells_minus_initial == nonleaves && nonleaves == half_nonroot; }
};

/// The three counts that agree for every full subforest (direct counting).
template <class S>
ForestCounts forest_size_identity(const Mesh<S>& m) {
  ForestCounts c;
  long leaves = 0, nonroot = 0;
  for (int id = 0; id < m.node_count(); ++id) {
    const Node& n = m.node(id);
    if (n.has_children()) ++c.nonleaves;
    else ++leaves;
    if (n.parent >= 0) ++nonroot;
  }
  c.cells_minus_initial = leaves - m.root_count();
  c.half_nonroot = nonroot / 2;
  if (nonroot % 2) c.half_nonroot = -1;
  return c;
}

template <class S>
bool same_roots(const Mesh<S>& p, const Mesh<S>& q) {
  if (p.dim() != q.dim() || p.root_count() != q.root_count()) return false;
  for (int r = 0; r < p.root_count(); ++r) {
    const TArray& a = p.cell(r);
    const TArray& b = q.cell(r);
    if (a.type != b.type || a.hyper != b.hyper || a.level != b.level || p.points(r) != q.points(r)) return false;
  }
  return true;
}

namespace detail {
inline void require_same_roots(bool ok) {
  if (!ok) throw std::invalid_argument("meshes have different initial cells");
}
}  // namespace detail

/// True iff the forest of p contains the forest of q.
template <class S>
bool finer(const Mesh<S>& p, const Mesh<S>& q) {
  detail::require_same_roots(same_roots(p, q));
  std::vector<std::pair<int, int>> stack;
  for (int r = 0; r < q.root_count(); ++r) stack.emplace_back(r, r);
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    if (!q.node(b).has_children()) continue;
    if (!p.node(a).has_children()) return false;
    for (int i = 0; i < 2; ++i) stack.emplace_back(p.node(a).child[i], q.node(b).child[i]);
  }
  return true;
}

/// Leaves of the union of both forests.
template <class S>
Mesh<S> overlay(const Mesh<S>& p, const Mesh<S>& q) {
  detail::require_same_roots(same_roots(p, q));
  Mesh<S> r = p;
  std::vector<std::pair<int, int>> stack;
  for (int i = 0; i < q.root_count(); ++i) stack.emplace_back(i, i);
  while (!stack.empty()) {
    auto [a, b] = stack.back();
    stack.pop_back();
    if (!q.node(b).has_children()) continue;
    if (!r.node(a).has_children()) r.bisect(a);
    for (int i = 0; i < 2; ++i) stack.emplace_back(r.node(a).child[i], q.node(b).child[i]);
  }
  return r;
}

/// Leaves of the intersection of both forests.
template <class S>
Mesh<S> underlay(const Mesh<S>& p, const Mesh<S>& q) {
  detail::require_same_roots(same_roots(p, q));
  Mesh<S> r = roots_of(p);
  std::vector<std::array<int, 3>> stack;
  for (int i = 0; i < p.root_count(); ++i) stack.push_back({i, i, i});
  while (!stack.empty()) {
    auto [a, b, c] = stack.back();
    stack.pop_back();
    if (!p.node(a).has_children() || !q.node(b).has_children()) continue;
    r.bisect(c);
    for (int i = 0; i < 2; ++i)
      stack.push_back({p.node(a).child[i], q.node(b).child[i], r.node(c).child[i]});
  }
  return r;
}

/// Keys of all bisected nodes (the forest minus its leaves).
template <class S>
std::set<NodeKey> bisected_keys(const Mesh<S>& m) {
  std::set<NodeKey> r;
  for (int id = 0; id < m.node_count(); ++id)
    if (m.node(id).has_children()) r.insert(m.key(id));
  return r;
}

/// Mesh over the roots of `base` in which exactly the nodes in `keys` are
/// bisected. Throws when the key set is not a full subforest.
template <class S>
Mesh<S> from_keys(const Mesh<S>& base, const std::set<NodeKey>& keys) {
  Mesh<S> r = roots_of(base);
  // Parents precede children in lexicographic path order per root.
  std::vector<NodeKey> ordered(keys.begin(), keys.end());
  std::stable_sort(ordered.begin(), ordered.end(), [](const NodeKey& a, const NodeKey& b) {
    return a.path.size() < b.path.size();
  });
  for (const NodeKey& k : ordered) {
    const int id = r.find(k);
    if (id < 0) throw std::invalid_argument("node " + k.str() + " has an unbisected ancestor");
    r.bisect(id);
  }
  return r;
}

/// The two demand relations: first = (T ->0 S), second = (T ->1 S).
template <class S>
std::pair<bool, bool> demands01(const Mesh<S>& m, int t, int s) {
  const Node& nt = m.node(t);
  const Node& ns = m.node(s);
  if (nt.parent < 0 || ns.parent < 0) throw std::invalid_argument("demand relations need non-root nodes");
  const bool to0 = ns.vnew == nt.vnew;
  const Node& pt = m.node(nt.parent);
  const bool to1 = pt.parent >= 0 && ns.vnew == pt.vnew;
  return {to0, to1};
}

/// Lightweight simplex used to explore ungenerated descendants.
template <class S>
struct ScratchCell {
  std::vector<Point<S>> p;  // in T-array order
  int type = 0;
  int hyper = 0;

  std::pair<ScratchCell, ScratchCell> children(Point<S>& z) const {
    ScratchCell t = *this;
    if (t.type == 0) {
      t.type = static_cast<int>(p.size()) - 1;
      ++t.hyper;
    }
    const auto k = static_cast<std::size_t>(t.type);
    z = midpoint(t.p[0], t.p[k]);
    ScratchCell c0, c1;
    c0.type = c1.type = t.type - 1;
    c0.hyper = c1.hyper = t.hyper;
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
};

namespace detail {

/// Depth-first search below `c` for a descendant whose new vertex is `v`,
/// following only cells that contain v as a non-vertex point. On success the
/// new vertices along the path are appended to `path`.
template <class S>
bool find_generating_path(const ScratchCell<S>& c, const Point<S>& v, int depth, std::vector<Point<S>>& path) {
  if (depth <= 0) return false;
  Point<S> z;
  auto kids = c.children(z);
  path.push_back(z);
  if (z == v) return true;
  for (const ScratchCell<S>* k : {&kids.first, &kids.second}) {
    if (locate(v, pointers(k->p)) != Location::Inside) continue;
    if (find_generating_path(*k, v, depth - 1, path)) return true;
  }
  path.pop_back();
  return false;
}

template <class S>
ScratchCell<S> scratch_of(const Mesh<S>& m, int id) {
  return {m.points(id), m.cell(id).type, m.cell(id).hyper};
}

}  // namespace detail

/// Checks the second characterisation of admissible forests: structural
/// soundness, and that no leaf has an ungenerated descendant whose new vertex
/// is a new vertex of the forest. With first_new_node > 0 only new vertices of
/// nodes from that id on are examined (previous state assumed verified).
template <class S>
Report verify_forest_characterisation(const Mesh<S>& m, int first_new_node = 0) {
  Report rep;
  const int n = m.dim();
  for (int id = std::max(first_new_node, 0); id < m.node_count(); ++id) {
    const Node& x = m.node(id);
    if (id < m.root_count()) {
      if (x.parent != -1 || x.root != id) rep.fail("root " + std::to_string(id) + " has a parent");
    } else {
      if (x.parent < 0 || x.parent >= id) rep.fail("node " + std::to_string(id) + " has an invalid parent");
      else {
        const Node& p = m.node(x.parent);
        if (p.child[0] != id && p.child[1] != id) rep.fail("node " + std::to_string(id) + " not a child of its parent");
        if (x.root != p.root) rep.fail("node " + std::to_string(id) + " changes root");
        if (p.parent >= 0 && p.vnew < 0) rep.fail("node " + std::to_string(id) + " parent lacks a new vertex");
      }
      if (x.vnew < 0 || !x.s.contains(x.vnew)) rep.fail("node " + std::to_string(id) + " lacks its new vertex");
    }
    if ((x.child[0] < 0) != (x.child[1] < 0)) rep.fail("node " + std::to_string(id) + " has one child");
  }
  if (first_new_node == 0) {
    std::set<std::vector<int>> seen;
    for (int id = 0; id < m.node_count(); ++id) {
      std::vector<int> vs = m.cell(id).v;
      std::sort(vs.begin(), vs.end());
      if (!seen.insert(vs).second) rep.fail("node " + std::to_string(id) + " repeats a simplex");
    }
  }
  std::vector<int> fresh;
  for (int id = std::max(first_new_node, m.root_count()); id < m.node_count(); ++id) fresh.push_back(m.node(id).vnew);
  std::sort(fresh.begin(), fresh.end());
  fresh.erase(std::unique(fresh.begin(), fresh.end()), fresh.end());
  for (int v : fresh) {
    const auto& p = m.pool().approx(v);
    for (int l : m.leaves()) {
      if (m.cell(l).contains(v) || !m.box_contains(l, p)) continue;
      if (locate(m.vertex(v), m.point_ptrs(l)) == Location::Outside) continue;
      std::vector<Point<S>> path;
      if (detail::find_generating_path(detail::scratch_of(m, l), m.vertex(v), 8 * n + 8, path))
        rep.fail("leaf " + m.key(l).str() + " has an ungenerated descendant with new vertex " + m.vertex(v).str());
      else
        rep.fail("vertex " + m.vertex(v).str() + " hangs in leaf " + m.key(l).str());
    }
  }
  return rep;
}

/// Nodes added by refine(P, leaf) on a scratch copy.
template <class S>
std::set<NodeKey> tower(const Mesh<S>& p, int leaf, long guard = 0) {
  Mesh<S> c = p;
  refine(c, leaf, guard);
  std::set<NodeKey> r;
  for (int id = p.node_count(); id < c.node_count(); ++id) r.insert(c.key(id));
  return r;
}

/// Independent computation of the same node set from the demand relations:
/// starting from the new vertex of the leaf, new vertices are added until the
/// forest generated by them is closed (every leaf containing one of them as a
/// non-vertex point is refined along the path generating it).
template <class S>
std::set<NodeKey> closure01_tower(const Mesh<S>& p, int leaf) {
  if (!p.is_leaf(leaf)) throw std::invalid_argument("closure01_tower: not a leaf");
  Mesh<S> c = p;
  const int n = c.dim();
  std::unordered_set<int> vset;
  for (int id = c.root_count(); id < c.node_count(); ++id) vset.insert(c.node(id).vnew);
  {
    const Edge e = refinement_edge(c.cell(leaf));
    vset.insert(c.add_vertex(midpoint(c.vertex(e.a), c.vertex(e.b))));
  }
  for (;;) {
    bool changed = false;
    const std::vector<int> snapshot = c.leaves();
    for (int l : snapshot) {
      if (!c.is_leaf(l)) continue;
      const Edge e = refinement_edge(c.cell(l));
      auto z = c.pool().find(midpoint(c.vertex(e.a), c.vertex(e.b)));
      if (z && vset.count(*z)) {
        c.bisect(l);
        changed = true;
      }
    }
    if (changed) continue;
    std::vector<int> vs(vset.begin(), vset.end());
    std::sort(vs.begin(), vs.end());
    for (int v : vs) {
      const auto& a = c.pool().approx(v);
      for (int l : c.leaves()) {
        if (c.cell(l).contains(v) || !c.box_contains(l, a)) continue;
        if (locate(c.vertex(v), c.point_ptrs(l)) == Location::Outside) continue;
        std::vector<Point<S>> path;
        if (!detail::find_generating_path(detail::scratch_of(c, l), c.vertex(v), 8 * n + 8, path)) continue;
        for (const auto& z : path) vset.insert(c.add_vertex(z));
        changed = true;
      }
    }
    if (!changed) break;
  }
  std::set<NodeKey> r;
  for (int id = p.node_count(); id < c.node_count(); ++id) r.insert(c.key(id));
  return r;
}

/// Bisects leaves containing a hanging vertex until none is left: the
/// reference closure used by the tests.
template <class S>
void repair_hanging_nodes(Mesh<S>& m, long limit = 1000000) {
  for (long step = 0;; ++step) {
    if (step > limit) throw RefineError("hanging-node repair does not terminate");
    auto rep = check_conforming(m);
    if (rep.hanging.empty()) return;
    std::set<int> leaves;
    for (const auto& h : rep.hanging) leaves.insert(h.leaf);
    for (int l : leaves)
      if (m.is_leaf(l)) m.bisect(l);
  }
}

}  // namespace nvb
