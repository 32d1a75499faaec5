#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvb/constants.hpp"
#include "nvb/forest.hpp"
#include "nvb/refine.hpp"

namespace nvb {

enum class Marking { RandomLeaf, MaxLevelLeaf, Staircase, Quasitower };

inline Marking parse_marking(const std::string& s) {
  if (s == "random-leaf" || s == "random") return Marking::RandomLeaf;
  if (s == "max-level-leaf") return Marking::MaxLevelLeaf;
  if (s == "staircase-adversary" || s == "staircase") return Marking::Staircase;
  if (s == "quasitower-adversary" || s == "quasitower") return Marking::Quasitower;
  throw std::invalid_argument("unknown marking strategy: " + s);
}

inline std::string marking_name(Marking m) {
  switch (m) {
    case Marking::RandomLeaf: return "random-leaf";
    case Marking::MaxLevelLeaf: return "max-level-leaf";
    case Marking::Staircase: return "staircase-adversary";
    case Marking::Quasitower: return "quasitower-adversary";
  }
  return "?";
}

struct TraceRound {
  long round = 0;
  int marked = -1;
  long added = 0;
  long total = 0;
  long forest_nonroot = 0;
  int jump = 0;  // largest level gain of a single cell in this round
};

struct Trace {
  std::string mesh_hash;
  std::uint64_t seed = 0;
  std::string strategy;
  long initial = 0;
  std::vector<TraceRound> rounds;

  long added_total() const { return rounds.empty() ? 0 : rounds.back().total - initial; }
  int max_jump() const {
    int j = 0;
    for (const auto& r : rounds) j = std::max(j, r.jump);
    return j;
  }
};

struct RunOptions {
  bool check_identity = true;
  bool check_conformity = true;
  bool check_volume = true;
  bool check_characterisation = false;
  double tower_crosscheck_rate = 0.01;
  long guard = 0;
  /// Called after every round with the current mesh; a non-empty string is a violation.
  std::function<std::string(long)> per_round;
};

/// Raised when a per-round check fails; carries the round index.
class RoundCheckError : public std::runtime_error {
 public:
  RoundCheckError(long round, const std::string& what)
      : std::runtime_error("round " + std::to_string(round) + ": " + what), round_(round) {}
  long round() const { return round_; }

 private:
  long round_;
};

/// FNV-1a over vertex coordinates and root arrays.
template <class S>
std::string mesh_hash(const Mesh<S>& m) {
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
  };
  for (int v = 0; v < m.vertex_count(); ++v)
    for (const auto& c : m.vertex(v).x) mix(to_string(c) + ",");
  for (int r = 0; r < m.root_count(); ++r) mix(m.cell(r).str() + std::to_string(m.cell(r).hyper));
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

namespace detail {

/// Deepest leaf containing x (closed), found by descending from the roots.
template <class S>
int leaf_containing(const Mesh<S>& m, const Point<S>& x) {
  for (int r = 0; r < m.root_count(); ++r) {
    if (locate(x, m.point_ptrs(r)) == Location::Outside) continue;
    int id = r;
    while (!m.is_leaf(id)) {
      const Node& nd = m.node(id);
      int next = -1, best_level = -1;
      for (int c : nd.child) {
        if (locate(x, m.point_ptrs(c)) == Location::Outside) continue;
        if (m.cell(c).level > best_level) {
          best_level = m.cell(c).level;
          next = c;
        }
      }
      if (next < 0) break;
      id = next;
    }
    if (m.is_leaf(id)) return id;
  }
  return -1;
}

template <class S>
Point<S> random_interior_point(const Mesh<S>& m, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(0, m.root_count() - 1);
  const int r = pick(rng);
  const auto pts = m.points(r);
  // Weights summing to 2^k keep the point dyadic.
  const int k = 10;
  std::vector<long> w(pts.size(), 1);
  long rest = (1L << k) - static_cast<long>(pts.size());
  std::uniform_int_distribution<int> slot(0, static_cast<int>(pts.size()) - 1);
  for (; rest > 0; --rest) ++w[static_cast<std::size_t>(slot(rng))];
  Point<S> x(static_cast<std::size_t>(m.dim()));
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t a = 0; a < x.dim(); ++a) x[a] = x[a] + pts[i][a] * S(w[i]);
  for (int i = 0; i < k; ++i) x = halved(x);
  return x;
}

template <class S>
bool edge_incompatible(const Mesh<S>& m, int leaf) {
  const Edge e = refinement_edge(m.cell(leaf));
  for (int u : m.leaves_with_edge(e.a, e.b))
    if (!(refinement_edge(m.cell(u)) == e)) return true;
  return false;
}

}  // namespace detail

/// Chooses the leaf to mark in the current round.
template <class S>
class Marker {
 public:
  Marker(const Mesh<S>& m, Marking kind, std::mt19937_64& rng) : kind_(kind), rng_(rng) {
    if (kind == Marking::Quasitower) target_ = detail::random_interior_point(m, rng_);
  }

  int choose(const Mesh<S>& m) {
    const auto& leaves = m.leaves();
    switch (kind_) {
      case Marking::RandomLeaf: return uniform(leaves);
      case Marking::MaxLevelLeaf: {
        int top = 0;
        for (int l : leaves) top = std::max(top, m.cell(l).level);
        std::vector<int> c;
        for (int l : leaves)
          if (m.cell(l).level == top) c.push_back(l);
        return uniform(c);
      }
      case Marking::Staircase: {
        // Finest leaves whose refinement forces a closure step.
        int top = -1;
        std::vector<int> c;
        for (int l : leaves) {
          const int lv = m.cell(l).level;
          if (lv < top || !detail::edge_incompatible(m, l)) continue;
          if (lv > top) {
            top = lv;
            c.clear();
          }
          c.push_back(l);
        }
        return c.empty() ? uniform(leaves) : uniform(c);
      }
      case Marking::Quasitower: {
        const int l = detail::leaf_containing(m, *target_);
        return l >= 0 ? l : uniform(leaves);
      }
    }
    return leaves.front();
  }

 private:
  int uniform(const std::vector<int>& v) {
    std::uniform_int_distribution<std::size_t> d(0, v.size() - 1);
    return v[d(rng_)];
  }

  Marking kind_;
  std::mt19937_64& rng_;
  std::optional<Point<S>> target_;
};

/// N rounds of mark-one-leaf-and-refine with per-round checks. Throws
/// RoundCheckError on the first failed check and RefineError on closure
/// failure.
template <class S>
Trace run_sequence(Mesh<S>& m, Marking kind, long rounds, std::uint64_t seed, const RunOptions& opt = {}) {
  Trace t;
  t.mesh_hash = mesh_hash(m);
  t.seed = seed;
  t.strategy = marking_name(kind);
  t.initial = m.leaf_count();
  std::mt19937_64 rng(seed);
  Marker<S> marker(m, kind, rng);
  std::uniform_real_distribution<double> coin(0.0, 1.0);

  Rational volume = 0;
  if (opt.check_volume)
    for (int l : m.leaves()) volume += simplex_volume(m.points(l));
  const Rational initial_volume = volume;

  for (long k = 1; k <= rounds; ++k) {
    const int before_nodes = m.node_count();
    const long before_leaves = m.leaf_count();
    const int leaf = marker.choose(m);
    std::set<NodeKey> expected;
    const bool cross = opt.tower_crosscheck_rate > 0 && coin(rng) < opt.tower_crosscheck_rate;
    if (cross) expected = tower(m, leaf, opt.guard);
    refine(m, leaf, opt.guard);

    TraceRound r;
    r.round = k;
    r.marked = leaf;
    r.added = m.leaf_count() - before_leaves;
    r.total = m.leaf_count();
    r.forest_nonroot = m.node_count() - m.root_count();
    r.jump = level_jump_since(m, before_nodes);
    t.rounds.push_back(r);

    if (cross && static_cast<long>(expected.size()) != 2 * r.added)
      throw RoundCheckError(k, "added " + std::to_string(r.added) + " cells but the tower has " +
                                   std::to_string(expected.size()) + " nodes");
    if (opt.check_identity) {
      const ForestCounts c = forest_size_identity(m);
      if (!c.consistent() || c.cells_minus_initial != r.total - t.initial)
        throw RoundCheckError(k, "counting identity fails");
    }
    if (opt.check_volume) {
      for (int id = before_nodes; id < m.node_count(); id += 2) {
        const int parent = m.node(id).parent;
        const Rational vp = simplex_volume(m.points(parent));
        const Rational v0 = simplex_volume(m.points(id));
        const Rational v1 = simplex_volume(m.points(id + 1));
        if (v0 + v0 != vp || v1 != v0) throw RoundCheckError(k, "bisection does not halve the volume");
        volume += v0 + v1 - vp;
      }
      if (volume != initial_volume) throw RoundCheckError(k, "volume not conserved");
    }
    if (opt.check_conformity) {
      const auto rep = check_conforming_since(m, before_nodes);
      if (!rep.ok()) throw RoundCheckError(k, rep.violations.front());
    }
    if (opt.check_characterisation) {
      const auto rep = verify_forest_characterisation(m, before_nodes);
      if (!rep.ok()) throw RoundCheckError(k, rep.violations.front());
    }
    if (opt.per_round) {
      const std::string err = opt.per_round(k);
      if (!err.empty()) throw RoundCheckError(k, err);
    }
  }
  return t;
}

enum class BoundMode { Sic, Iso };

inline BoundMode parse_bound_mode(const std::string& s) {
  if (s == "sic") return BoundMode::Sic;
  if (s == "iso") return BoundMode::Iso;
  throw std::invalid_argument("unknown mode: " + s);
}

/// Integer bound for round k: ceil(C k), plus the first summand in iso mode.
inline mpz_class bdv_bound(const Constants& c, BoundMode mode, long k) {
  if (mode == BoundMode::Sic) return c.c_sic_up.ceil_times(k);
  return c.first_summand_exact + c.c_iso_up.ceil_times(k);
}

struct BdvReport : Report {
  long first_violation = 0;
};

/// Checks #T_k - #T_0 against the bound of the chosen mode for every round k.
inline BdvReport verify_bdv(const Trace& t, const Constants& c, BoundMode mode) {
  BdvReport rep;
  for (const auto& r : t.rounds) {
    const mpz_class added = r.total - t.initial;
    const mpz_class bound = bdv_bound(c, mode, r.round);
    if (added > bound) {
      if (!rep.first_violation) rep.first_violation = r.round;
      rep.fail("round " + std::to_string(r.round) + ": added " + added.get_str() + " > bound " + bound.get_str());
    }
  }
  return rep;
}

/// CSV with schema round,marked_cell,cells_added,cells_total,forest_nonroot,bound,ratio.
inline std::string trace_csv(const Trace& t, const Constants* c = nullptr, BoundMode mode = BoundMode::Sic) {
  std::ostringstream os;
  os << "# mesh=" << t.mesh_hash << " seed=" << t.seed << " strategy=" << t.strategy << "\n";
  os << "round,marked_cell,cells_added,cells_total,forest_nonroot,bound,ratio\n";
  for (const auto& r : t.rounds) {
    const long added = r.total - t.initial;
    os << r.round << ',' << r.marked << ',' << r.added << ',' << r.total << ',' << r.forest_nonroot << ',';
    if (c) os << bdv_bound(*c, mode, r.round).get_str();
    Real ratio = Real(Rational(added, r.round));
    os << ',' << ratio.str(6) << '\n';
  }
  return os.str();
}

struct PatchCheck {
  Report report;
  long towers = 0;
  long layers = 0;
  double worst_diameter_ratio = 0;  // layer union diameter / max patch diameter
};

/// For towers of cells with hyperlevel above h0, every hyperlevel layer j > h0
/// must lie in one vertex patch of the hyperlevel-uniform mesh of hyperlevel
/// j - h0. Each layer cell is located in that mesh through its barycentre; the
/// cells found must share a vertex.
template <class S>
PatchCheck tower_patch_spotcheck(const Mesh<S>& t0, long samples, std::uint64_t seed, long max_rounds = 400) {
  PatchCheck out;
  const int n = t0.dim();
  const int h0 = h0_of(n);
  std::mt19937_64 rng(seed);
  std::map<int, Mesh<Rational>> uniform;  // by hyperlevel J
  auto uniform_mesh = [&](int J) -> const Mesh<Rational>& {
    auto it = uniform.find(J);
    if (it != uniform.end()) return it->second;
    Mesh<Rational> u(n);
    for (int v = 0; v < t0.vertex_count(); ++v) u.add_vertex(to_rational(t0.vertex(v)));
    for (int r = 0; r < t0.root_count(); ++r) u.add_root(t0.cell(r));
    if (J >= 1) hyperlevel_uniform_refine(u, J - 1);
    return uniform.emplace(J, std::move(u)).first->second;
  };

  for (long s = 0; s < samples; ++s) {
    Mesh<S> p = t0;
    Marker<S> marker(p, Marking::Quasitower, rng);
    int leaf = marker.choose(p);
    for (long k = 0; k < max_rounds && p.cell(leaf).hyper <= h0; ++k) {
      refine(p, leaf);
      leaf = marker.choose(p);
    }
    ++out.towers;
    Mesh<S> q = p;
    refine(q, leaf);
    std::map<int, std::vector<int>> layers;
    for (int id = p.node_count(); id < q.node_count(); ++id) layers[q.cell(id).hyper].push_back(id);
    for (const auto& [j, ids] : layers) {
      if (j <= h0) continue;
      ++out.layers;
      const Mesh<Rational>& u = uniform_mesh(j - h0);
      std::vector<int> common;
      bool first = true;
      Rational layer_diam = 0;
      std::vector<Point<Rational>> layer_pts;
      for (int id : ids) {
        const auto pts = q.points(id);
        Point<Rational> c(static_cast<std::size_t>(n));
        for (const auto& x : pts) {
          const auto xr = to_rational(x);
          layer_pts.push_back(xr);
          for (int a = 0; a < n; ++a) c[static_cast<std::size_t>(a)] += xr[static_cast<std::size_t>(a)];
        }
        for (auto& v : c.x) v /= static_cast<long>(pts.size());
        int host = -1;
        for (int l : u.leaves())
          if (locate(c, u.point_ptrs(l)) != Location::Outside) {
            host = l;
            break;
          }
        if (host < 0) {
          out.report.fail("layer cell outside the hyperlevel-uniform mesh");
          continue;
        }
        std::vector<int> vs = u.cell(host).v;
        std::sort(vs.begin(), vs.end());
        if (first) common = vs;
        else {
          std::vector<int> keep;
          std::set_intersection(common.begin(), common.end(), vs.begin(), vs.end(), std::back_inserter(keep));
          common = keep;
        }
        first = false;
      }
      if (common.empty()) {
        out.report.fail("tower " + std::to_string(s) + " layer " + std::to_string(j) + " is not inside a vertex patch");
        continue;
      }
      for (std::size_t a = 0; a < layer_pts.size(); ++a)
        for (std::size_t b = a + 1; b < layer_pts.size(); ++b) layer_diam = std::max(layer_diam, sq_dist(layer_pts[a], layer_pts[b]));
      Rational patch_diam = 0;
      for (int l : u.leaves_at_vertex(common.front())) {
        const auto pts = u.points(l);
        for (const auto& x : pts)
          for (const auto& y : pts) patch_diam = std::max(patch_diam, sq_dist(x, y));
      }
      if (patch_diam > 0) {
        const double ratio = std::sqrt(Rational(layer_diam / patch_diam).get_d());
        out.worst_diameter_ratio = std::max(out.worst_diameter_ratio, ratio);
      }
    }
  }
  return out;
}

}  // namespace nvb
