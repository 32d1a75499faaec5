#pragma once

#include <optional>
#include <unordered_map>
#include <vector>

#include "nvb/point.hpp"

namespace nvb {

/// Vertex registry keyed by exact coordinates. Ids are dense and stable.
template <class S>
class VertexPool {
 public:
  explicit VertexPool(int dim = 0) : dim_(dim) {}

  int dim() const { return dim_; }
  int size() const { return static_cast<int>(pts_.size()); }

  /// Id of `p`, registering it when new.
  int insert(const Point<S>& p) {
    if (static_cast<int>(p.dim()) != dim_) throw std::invalid_argument("vertex dimension mismatch");
    auto it = index_.find(p);
    if (it != index_.end()) return it->second;
    const int id = size();
    pts_.push_back(p);
    approx_.push_back(to_double(p));
    index_.emplace(p, id);
    return id;
  }

  std::optional<int> find(const Point<S>& p) const {
    auto it = index_.find(p);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const Point<S>& operator[](int id) const { return pts_[static_cast<std::size_t>(id)]; }
  const std::vector<double>& approx(int id) const { return approx_[static_cast<std::size_t>(id)]; }
  const std::vector<Point<S>>& points() const { return pts_; }

 private:
  int dim_;
  std::vector<Point<S>> pts_;
  std::vector<std::vector<double>> approx_;
  std::unordered_map<Point<S>, int, PointHash<S>> index_;
};

}  // namespace nvb
