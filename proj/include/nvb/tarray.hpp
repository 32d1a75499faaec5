#pragma once

#include <algorithm>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "nvb/point.hpp"

namespace nvb {

/// Tagged simplex. v = (p0, ..., pm); the first type+1 entries are the
/// horizontal part, the rest the vertical part (top to bottom).
struct TArray {
  std::vector<int> v;
  int type = 0;
  int level = 0;
  int hyper = 0;

  int dim() const { return static_cast<int>(v.size()) - 1; }
  std::span<const int> horizontal() const { return {v.data(), static_cast<std::size_t>(type + 1)}; }
  std::span<const int> vertical() const {
    return {v.data() + type + 1, v.size() - static_cast<std::size_t>(type + 1)};
  }
  bool is_horizontal(int id) const {
    for (int i = 0; i <= type; ++i)
      if (v[static_cast<std::size_t>(i)] == id) return true;
    return false;
  }
  bool contains(int id) const { return std::find(v.begin(), v.end(), id) != v.end(); }

  friend bool operator==(const TArray& a, const TArray& b) {
    return a.v == b.v && a.type == b.type && a.hyper == b.hyper;
  }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) s += static_cast<int>(i) <= type ? " " : "; ";
      s += std::to_string(v[i]);
    }
    return s + ")";
  }
};

/// Unordered vertex pair with the hyperlevel of the edge.
struct Edge {
  int a = -1, b = -1;
  int hyper = 0;

  Edge() = default;
  Edge(int x, int y, int h = 0) : a(std::min(x, y)), b(std::max(x, y)), hyper(h) {}
  bool same_vertices(const Edge& o) const { return a == o.a && b == o.b; }
  friend bool operator==(const Edge& x, const Edge& y) { return x.a == y.a && x.b == y.b; }
  friend bool operator<(const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; }
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const {
    return std::hash<long long>{}((static_cast<long long>(e.a) << 32) ^ static_cast<unsigned>(e.b));
  }
};

inline void check_tarray(const TArray& s) {
  if (s.v.empty()) throw std::invalid_argument("empty T-array");
  if (s.type < 0 || s.type > s.dim()) throw std::invalid_argument("type out of range");
  std::vector<int> sorted = s.v;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw std::invalid_argument("repeated vertex in T-array");
}

/// Type-0 array to the full row of incremented hyperlevel.
inline TArray transpose(const TArray& s) {
  if (s.type != 0) throw std::invalid_argument("transpose needs a type-0 array");
  TArray t = s;
  t.type = s.dim();
  t.hyper = s.hyper + 1;
  return t;
}

inline Edge refinement_edge(const TArray& s) {
  if (s.dim() < 1) throw std::invalid_argument("a vertex has no refinement edge");
  if (s.type == 0) return Edge(s.v.front(), s.v.back(), s.hyper + 1);
  return Edge(s.v[0], s.v[static_cast<std::size_t>(s.type)], s.hyper);
}

/// Children of s for the new vertex z (midpoint of the refinement edge).
/// First child keeps p0, second keeps p_k.
inline std::pair<TArray, TArray> bisect_tarray(const TArray& s, int z) {
  if (s.dim() < 1) throw std::invalid_argument("cannot bisect a vertex");
  const TArray t = s.type == 0 ? transpose(s) : s;
  const auto k = static_cast<std::size_t>(t.type);
  TArray c0, c1;
  c0.type = c1.type = t.type - 1;
  c0.level = c1.level = s.level + 1;
  c0.hyper = c1.hyper = t.hyper;
  c0.v.reserve(t.v.size());
  c1.v.reserve(t.v.size());
  for (std::size_t i = 0; i < k; ++i) c0.v.push_back(t.v[i]);
  for (std::size_t i = 1; i <= k; ++i) c1.v.push_back(t.v[i]);
  c0.v.push_back(z);
  c1.v.push_back(z);
  for (std::size_t i = k + 1; i < t.v.size(); ++i) {
    c0.v.push_back(t.v[i]);
    c1.v.push_back(t.v[i]);
  }
  return {std::move(c0), std::move(c1)};
}

inline TArray reflect(const TArray& s) {
  TArray r = s;
  std::reverse(r.v.begin(), r.v.begin() + s.type + 1);
  return r;
}

/// Representative of the class under reflection and transposition.
/// Full-type and type-0 arrays become the lexicographically smaller column,
/// with the hyperlevel of the column.
inline TArray canonicalize(const TArray& s) {
  const int m = s.dim();
  TArray c = s;
  if (m >= 1 && (s.type == 0 || s.type == m)) {
    std::vector<int> rev(s.v.rbegin(), s.v.rend());
    if (rev < c.v) c.v = rev;
    if (s.type == m) c.hyper = s.hyper - 1;
    c.type = 0;
    return c;
  }
  std::vector<int> h(s.v.begin(), s.v.begin() + s.type + 1);
  std::vector<int> hr(h.rbegin(), h.rend());
  if (hr < h) std::copy(hr.begin(), hr.end(), c.v.begin());
  return c;
}

enum class RestrictRule { Legacy, Hyper };

/// Erases every vertex outside `subset` and pushes the rest together. With
/// the hyper rule an array without surviving horizontal vertex is transposed.
inline TArray restrict_to(const TArray& s, const std::vector<int>& subset, RestrictRule rule) {
  if (subset.empty()) throw std::invalid_argument("restriction to an empty subset");
  TArray r;
  r.level = s.level;
  r.hyper = s.hyper;
  int horizontal = 0;
  for (std::size_t i = 0; i < s.v.size(); ++i) {
    if (std::find(subset.begin(), subset.end(), s.v[i]) == subset.end()) continue;
    r.v.push_back(s.v[i]);
    if (static_cast<int>(i) <= s.type) ++horizontal;
  }
  for (int id : subset)
    if (!s.contains(id)) throw std::invalid_argument("subset is not a subset of the simplex");
  if (horizontal > 0) {
    r.type = horizontal - 1;
  } else if (rule == RestrictRule::Legacy) {
    r.type = 0;
  } else {
    r.type = r.dim();
    r.hyper = s.hyper + 1;
  }
  return r;
}

}  // namespace nvb
