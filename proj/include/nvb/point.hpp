#pragma once

#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

#include "nvb/scalar.hpp"

namespace nvb {

template <class S>
struct Point {
  std::vector<S> x;

  Point() = default;
  explicit Point(std::size_t n) : x(n) {}
  explicit Point(std::vector<S> c) : x(std::move(c)) {}
  Point(std::initializer_list<S> c) : x(c) {}

  std::size_t dim() const { return x.size(); }
  const S& operator[](std::size_t i) const { return x[i]; }
  S& operator[](std::size_t i) { return x[i]; }

  friend bool operator==(const Point& a, const Point& b) { return a.x == b.x; }
  friend bool operator<(const Point& a, const Point& b) { return a.x < b.x; }

  std::string str() const {
    std::string s = "(";
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (i) s += ",";
      s += to_string(x[i]);
    }
    return s + ")";
  }
};

template <class S>
struct PointHash {
  std::size_t operator()(const Point<S>& p) const {
    std::size_t h = p.x.size();
    for (const auto& c : p.x) h = h * 1000003u ^ hash_scalar(c);
    return h;
  }
};

template <class S>
void require_same_dim(const Point<S>& a, const Point<S>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("dimension mismatch");
}

template <class S>
Point<S> operator+(const Point<S>& a, const Point<S>& b) {
  require_same_dim(a, b);
  Point<S> r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] + b[i];
  return r;
}

template <class S>
Point<S> operator-(const Point<S>& a, const Point<S>& b) {
  require_same_dim(a, b);
  Point<S> r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = a[i] - b[i];
  return r;
}

template <class S>
Point<S> halved(const Point<S>& a) {
  Point<S> r(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) r[i] = half(a[i]);
  return r;
}

/// (a+b)/2, exact and symmetric.
template <class S>
Point<S> midpoint(const Point<S>& a, const Point<S>& b) {
  return halved(a + b);
}

template <class S>
Rational sq_norm(const Point<S>& v) {
  Rational s = 0;
  for (const auto& c : v.x) {
    Rational q = to_rational(c);
    s += q * q;
  }
  return s;
}

template <class S>
Rational sq_dist(const Point<S>& a, const Point<S>& b) {
  return sq_norm(a - b);
}

/// Largest squared distance from `p` to the vertices of a simplex.
template <class S>
Rational max_dist_from(const Point<S>& p, const std::vector<Point<S>>& simplex) {
  Rational best = 0;
  for (const auto& v : simplex) {
    Rational d = sq_dist(p, v);
    if (d > best) best = d;
  }
  return best;
}

template <class S>
Point<Rational> to_rational(const Point<S>& p) {
  Point<Rational> r(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) r[i] = to_rational(p[i]);
  return r;
}

template <class S>
std::vector<double> to_double(const Point<S>& p) {
  std::vector<double> r(p.dim());
  for (std::size_t i = 0; i < p.dim(); ++i) r[i] = to_double(p[i]);
  return r;
}

}  // namespace nvb
