#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "nvb/geometry.hpp"
#include "nvb/tarray.hpp"
#include "nvb/vertex_pool.hpp"

namespace nvb {

struct Node {
  TArray s;
  int parent = -1;
  std::array<int, 2> child{-1, -1};
  int root = -1;
  int vnew = -1;  // vertex created by the bisection of the parent

  bool has_children() const { return child[0] >= 0; }
};

/// Position of a node in the forest: root index and child choices.
struct NodeKey {
  int root = -1;
  std::string path;

  friend bool operator==(const NodeKey&, const NodeKey&) = default;
  friend auto operator<=>(const NodeKey&, const NodeKey&) = default;
  std::string str() const { return std::to_string(root) + ":" + path; }
};

/// Forest of tagged simplices over a shared vertex pool. The leaves form the
/// current triangulation; vertex-to-leaf incidence is kept up to date.
template <class S>
class Mesh {
 public:
  using Scalar = S;

  explicit Mesh(int dim) : dim_(dim), pool_(dim) {}

  int dim() const { return dim_; }
  const VertexPool<S>& pool() const { return pool_; }
  int vertex_count() const { return pool_.size(); }
  const Point<S>& vertex(int id) const { return pool_[id]; }

  int add_vertex(const Point<S>& p) {
    const int id = pool_.insert(p);
    if (static_cast<int>(vertex_leaves_.size()) <= id) vertex_leaves_.resize(static_cast<std::size_t>(id) + 1);
    return id;
  }

  /// Registers an initial cell. All roots must be added before bisecting.
  int add_root(TArray s) {
    if (roots_ != static_cast<int>(nodes_.size())) throw std::logic_error("roots must precede bisections");
    if (s.dim() != dim_) throw std::invalid_argument("cell dimension does not match the mesh");
    check_tarray(s);
    for (int id : s.v)
      if (id < 0 || id >= pool_.size()) throw std::invalid_argument("cell references an unknown vertex");
    if (sgn(signed_det(point_ptrs_of(s))) == 0) throw std::invalid_argument("degenerate cell");
    Node n;
    n.s = std::move(s);
    n.root = roots_;
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(std::move(n));
    push_box(id);
    ++roots_;
    attach_leaf(id);
    return id;
  }

  int node_count() const { return static_cast<int>(nodes_.size()); }
  int root_count() const { return roots_; }
  int bisected_count() const { return node_count() - leaf_count(); }
  const Node& node(int id) const { return nodes_[static_cast<std::size_t>(id)]; }
  const TArray& cell(int id) const { return node(id).s; }
  bool is_leaf(int id) const { return leaf_pos_[static_cast<std::size_t>(id)] >= 0; }
  const std::vector<int>& leaves() const { return leaves_; }
  int leaf_count() const { return static_cast<int>(leaves_.size()); }

  std::vector<const Point<S>*> point_ptrs_of(const TArray& s) const {
    std::vector<const Point<S>*> r;
    r.reserve(s.v.size());
    for (int id : s.v) r.push_back(&pool_[id]);
    return r;
  }
  std::vector<const Point<S>*> point_ptrs(int node_id) const { return point_ptrs_of(cell(node_id)); }
  std::vector<Point<S>> points(int node_id) const {
    std::vector<Point<S>> r;
    for (int id : cell(node_id).v) r.push_back(pool_[id]);
    return r;
  }

  Box box(int node_id) const {
    const auto d = static_cast<std::size_t>(dim_);
    const double* b = &boxes_[static_cast<std::size_t>(node_id) * 2 * d];
    return Box{std::vector<double>(b, b + d), std::vector<double>(b + d, b + 2 * d)};
  }

  /// Bounding-box test without allocation, for hot loops.
  bool box_contains(int node_id, const std::vector<double>& p) const {
    const auto d = static_cast<std::size_t>(dim_);
    const double* b = &boxes_[static_cast<std::size_t>(node_id) * 2 * d];
    for (std::size_t i = 0; i < d; ++i)
      if (p[i] < b[i] || p[i] > b[d + i]) return false;
    return true;
  }

  /// Bisects a leaf without any closure. Returns the two children.
  std::pair<int, int> bisect(int id) {
    if (!is_leaf(id)) throw std::logic_error("bisect: node is not a leaf");
    const TArray& s = cell(id);
    const Edge e = refinement_edge(s);
    const int z = add_vertex(midpoint(pool_[e.a], pool_[e.b]));
    auto [t0, t1] = bisect_tarray(s, z);
    detach_leaf(id);
    const int c0 = static_cast<int>(nodes_.size());
    const int root = node(id).root;
    for (TArray* t : {&t0, &t1}) {
      Node n;
      n.s = std::move(*t);
      n.parent = id;
      n.root = root;
      n.vnew = z;
      nodes_.push_back(std::move(n));
      push_box(static_cast<int>(nodes_.size()) - 1);
      attach_leaf(static_cast<int>(nodes_.size()) - 1);
    }
    nodes_[static_cast<std::size_t>(id)].child = {c0, c0 + 1};
    return {c0, c0 + 1};
  }

  const std::vector<int>& leaves_at_vertex(int v) const { return vertex_leaves_[static_cast<std::size_t>(v)]; }

  /// Leaves having both endpoints as vertices.
  std::vector<int> leaves_with_edge(int a, int b) const {
    std::vector<int> r;
    for (int l : leaves_at_vertex(a))
      if (cell(l).contains(b)) r.push_back(l);
    return r;
  }

  NodeKey key(int id) const {
    NodeKey k;
    k.root = node(id).root;
    while (node(id).parent >= 0) {
      const int p = node(id).parent;
      k.path.push_back(node(p).child[0] == id ? '0' : '1');
      id = p;
    }
    std::reverse(k.path.begin(), k.path.end());
    return k;
  }

  /// Node at `k`, or -1 when it has not been generated.
  int find(const NodeKey& k) const {
    if (k.root < 0 || k.root >= roots_) return -1;
    int id = k.root;
    for (char c : k.path) {
      if (!node(id).has_children()) return -1;
      id = node(id).child[c == '0' ? 0 : 1];
    }
    return id;
  }

  /// Vertex ids used by at least one leaf.
  std::vector<int> leaf_vertices() const {
    std::vector<int> r;
    for (int v = 0; v < static_cast<int>(vertex_leaves_.size()); ++v)
      if (!vertex_leaves_[static_cast<std::size_t>(v)].empty()) r.push_back(v);
    return r;
  }

 private:
  void attach_leaf(int id) {
    if (static_cast<int>(leaf_pos_.size()) <= id) leaf_pos_.resize(static_cast<std::size_t>(id) + 1, -1);
    leaf_pos_[static_cast<std::size_t>(id)] = static_cast<int>(leaves_.size());
    leaves_.push_back(id);
    for (int v : cell(id).v) vertex_leaves_[static_cast<std::size_t>(v)].push_back(id);
  }

  void detach_leaf(int id) {
    const int pos = leaf_pos_[static_cast<std::size_t>(id)];
    const int last = leaves_.back();
    leaves_[static_cast<std::size_t>(pos)] = last;
    leaf_pos_[static_cast<std::size_t>(last)] = pos;
    leaves_.pop_back();
    leaf_pos_[static_cast<std::size_t>(id)] = -1;
    for (int v : cell(id).v) {
      auto& list = vertex_leaves_[static_cast<std::size_t>(v)];
      auto it = std::find(list.begin(), list.end(), id);
      *it = list.back();
      list.pop_back();
    }
  }

  int dim_;
  VertexPool<S> pool_;
  void push_box(int id) {
    std::vector<const std::vector<double>*> p;
    for (int v : cell(id).v) p.push_back(&pool_.approx(v));
    const Box b = make_box(p);
    boxes_.insert(boxes_.end(), b.lo.begin(), b.lo.end());
    boxes_.insert(boxes_.end(), b.hi.begin(), b.hi.end());
  }

  std::vector<Node> nodes_;
  std::vector<double> boxes_;  // lo then hi per node
  int roots_ = 0;
  std::vector<int> leaves_;
  std::vector<int> leaf_pos_;
  std::vector<std::vector<int>> vertex_leaves_;
};

}  // namespace nvb
