#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace nvb::pile {

using Index = boost::multiprecision::cpp_int;

/// Brick 2^{-level} [index, index+1] at height `level`.
struct Brick {
  int level = 0;
  Index index = 0;

  friend bool operator==(const Brick&, const Brick&) = default;
  friend bool operator<(const Brick& a, const Brick& b) {
    return a.level != b.level ? a.level < b.level : a.index < b.index;
  }
  std::string str() const { return "(" + std::to_string(level) + "," + index.str() + ")"; }
};

struct BrickHash {
  std::size_t operator()(const Brick& b) const {
    return std::hash<Index>{}(b.index) * 1000003u ^ static_cast<std::size_t>(b.level);
  }
};

inline Index floor_half(const Index& i) {
  Index q = i / 2;
  if (i < 0 && q * 2 != i) q -= 1;
  return q;
}

inline bool is_odd(const Index& i) { return i % 2 != 0; }

/// The brick below and the brick touching the outer end of b's half.
inline std::pair<Brick, Brick> brick_demands(const Brick& b) {
  if (b.level < 1) throw std::invalid_argument("a basement brick demands nothing");
  const Index below = floor_half(b.index);
  const Index side = is_odd(b.index) ? Index(below + 1) : Index(below - 1);
  return {Brick{b.level - 1, below}, Brick{b.level - 1, side}};
}

/// Demand-closed set of bricks over the basement [lo, hi).
class Pile {
 public:
  Pile(long lo, long hi) : lo_(lo), hi_(hi) {
    if (hi <= lo) throw std::invalid_argument("empty basement");
    for (long i = lo; i < hi; ++i) insert(Brick{0, i});
  }

  long lo() const { return lo_; }
  long hi() const { return hi_; }
  std::size_t size() const { return bricks_.size(); }
  bool contains(const Brick& b) const { return bricks_.count(b) > 0; }
  const std::vector<Brick>& candidates() const { return cand_; }
  int top_level() const { return top_; }

  /// Whether the brick lies over the basement.
  bool inside(const Brick& b) const {
    const Index lo = Index(lo_) << b.level;
    const Index hi = Index(hi_) << b.level;
    return b.index >= lo && b.index < hi;
  }

  /// Places `chosen` (a child of a pile brick) and its demand closure.
  /// Returns the number of bricks added.
  long add(const Brick& chosen) {
    if (chosen.level < 1 || contains(chosen)) throw std::invalid_argument("illegal placement " + chosen.str());
    if (!contains(Brick{chosen.level - 1, floor_half(chosen.index)})) throw std::invalid_argument("illegal placement " + chosen.str());
    long added = 0;
    std::vector<Brick> stack{chosen};
    while (!stack.empty()) {
      Brick b = std::move(stack.back());
      stack.pop_back();
      if (contains(b) || !inside(b)) continue;
      insert(b);
      ++added;
      if (b.level == 0) continue;
      auto [d0, d1] = brick_demands(b);
      stack.push_back(std::move(d0));
      stack.push_back(std::move(d1));
    }
    return added;
  }

  /// Every pile brick's demands inside the basement are in the pile.
  bool demand_closed() const {
    for (const auto& [b, pos] : bricks_) {
      (void)pos;
      if (b.level == 0) continue;
      auto [d0, d1] = brick_demands(b);
      if ((inside(d0) && !contains(d0)) || (inside(d1) && !contains(d1))) return false;
    }
    return true;
  }

  std::map<int, long> per_level() const {
    std::map<int, long> r;
    for (const auto& [b, pos] : bricks_) {
      (void)pos;
      ++r[b.level];
    }
    return r;
  }

  std::vector<Brick> bricks() const {
    std::vector<Brick> r;
    for (const auto& [b, pos] : bricks_) {
      (void)pos;
      r.push_back(b);
    }
    std::sort(r.begin(), r.end());
    return r;
  }

 private:
  void insert(const Brick& b) {
    bricks_.emplace(b, 0);
    top_ = std::max(top_, b.level);
    auto it = cand_pos_.find(b);
    if (it != cand_pos_.end()) {
      const std::size_t pos = it->second;
      cand_pos_.erase(it);
      if (pos + 1 != cand_.size()) {
        cand_[pos] = std::move(cand_.back());
        cand_pos_[cand_[pos]] = pos;
      }
      cand_.pop_back();
    }
    for (int c = 0; c < 2; ++c) {
      Brick k{b.level + 1, b.index * 2 + c};
      if (!contains(k) && !cand_pos_.count(k)) {
        cand_pos_.emplace(k, cand_.size());
        cand_.push_back(std::move(k));
      }
    }
  }

  long lo_, hi_;
  int top_ = 0;
  std::unordered_map<Brick, int, BrickHash> bricks_;
  std::vector<Brick> cand_;
  std::unordered_map<Brick, std::size_t, BrickHash> cand_pos_;
};

struct Round {
  long round = 0;
  Brick chosen;
  long added = 0;
  long cumulative = 0;
};

struct Trace {
  std::vector<Round> rounds;
  long total() const { return rounds.empty() ? 0 : rounds.back().cumulative; }
  /// First round k with cumulative > 4k, or 0.
  long first_violation(long factor = 4) const {
    for (const auto& r : rounds)
      if (r.cumulative > factor * r.round) return r.round;
    return 0;
  }
  std::string csv() const {
    std::string s = "round,chosen_level,chosen_index,added,cumulative,bound_4N\n";
    for (const auto& r : rounds)
      s += std::to_string(r.round) + "," + std::to_string(r.chosen.level) + "," + r.chosen.index.str() + "," +
           std::to_string(r.added) + "," + std::to_string(r.cumulative) + "," + std::to_string(4 * r.round) + "\n";
    return s;
  }
};

enum class Strategy { Random, Tower, Quasitower };

inline Strategy parse_strategy(const std::string& s) {
  if (s == "random") return Strategy::Random;
  if (s == "tower") return Strategy::Tower;
  if (s == "quasitower") return Strategy::Quasitower;
  throw std::invalid_argument("unknown pile strategy: " + s);
}

/// Bricks chosen by the quasitower schedule for N rounds (N >= 4): climb a
/// column of m = N-3 bricks, then the three remaining bricks of the top level.
inline std::vector<Brick> quasitower_schedule(long n) {
  if (n < 4) throw std::invalid_argument("quasitower needs at least 4 rounds");
  const int m = static_cast<int>(n - 3);
  std::vector<Brick> r;
  for (int k = 1; k <= m; ++k) r.push_back(Brick{k, -1});
  r.push_back(Brick{m, -2});
  r.push_back(Brick{m, 0});
  r.push_back(Brick{m, 1});
  return r;
}

/// Plays N rounds. The basement defaults to a width large enough that the
/// closure never reaches its ends for the deterministic strategies.
inline Trace play(Strategy s, long n, std::uint64_t seed, long lo = -16, long hi = 16) {
  if (n < 1) throw std::invalid_argument("N must be positive");
  Pile p(lo, hi);
  Trace t;
  std::mt19937_64 rng(seed);
  std::vector<Brick> schedule;
  if (s == Strategy::Quasitower) {
    if (n >= 4) schedule = quasitower_schedule(n);
    else
      for (int k = 1; k <= n; ++k) schedule.push_back(Brick{k, -1});
  }
  Brick top{0, (lo + hi) / 2};
  long cum = 0;
  for (long k = 1; k <= n; ++k) {
    Brick chosen;
    switch (s) {
      case Strategy::Random: {
        std::uniform_int_distribution<std::size_t> d(0, p.candidates().size() - 1);
        chosen = p.candidates()[d(rng)];
        break;
      }
      case Strategy::Tower:
        chosen = Brick{top.level + 1, top.index * 2 + static_cast<int>(rng() & 1U)};
        break;
      case Strategy::Quasitower:
        chosen = schedule[static_cast<std::size_t>(k - 1)];
        break;
    }
    const long added = p.add(chosen);
    cum += added;
    top = chosen;
    t.rounds.push_back({k, chosen, added, cum});
  }
  return t;
}

/// Largest total over all games of n rounds on the basement (exhaustive).
inline long exhaustive_max(long n, long lo, long hi, long* games = nullptr) {
  long best = 0, count = 0;
  std::function<void(const Pile&, long, long)> rec = [&](const Pile& p, long round, long total) {
    if (total > 4 * round) throw std::logic_error("pile bound violated");
    if (round == n) {
      best = std::max(best, total);
      ++count;
      return;
    }
    const std::vector<Brick> cands = p.candidates();
    for (const Brick& b : cands) {
      if (!p.inside(b)) continue;
      Pile q = p;
      const long a = q.add(b);
      rec(q, round + 1, total + a);
    }
  };
  rec(Pile(lo, hi), 0, 0);
  if (games) *games = count;
  return best;
}

}  // namespace nvb::pile
