#pragma once

#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace certclose {

/// Extended-real infinity. Unbounded interval ends use this value and never a
/// large finite float.
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Closed interval of extended reals.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  static constexpr Interval point(double v) { return {v, v}; }
  static constexpr Interval nonnegative() { return {0.0, kInf}; }
  static constexpr Interval whole() { return {-kInf, kInf}; }

  constexpr bool valid() const { return lo <= hi; }
  constexpr bool degenerate() const { return lo == hi; }
  constexpr bool contains(double v) const { return lo <= v && v <= hi; }
  constexpr bool contains(const Interval& o) const { return lo <= o.lo && o.hi <= hi; }
  constexpr double width() const { return hi - lo; }
  constexpr double mid() const { return 0.5 * (lo + hi); }

  friend constexpr bool operator==(const Interval&, const Interval&) = default;
};

inline Interval operator+(Interval a, Interval b) { return {a.lo + b.lo, a.hi + b.hi}; }
inline Interval operator-(Interval a) { return {-a.hi, -a.lo}; }

/// Range of lambda * x for lambda in `a` and a fixed real x.
inline Interval scale(Interval a, double x) {
  if (x == 0.0) return {0.0, 0.0};
  return x > 0 ? Interval{a.lo * x, a.hi * x} : Interval{a.hi * x, a.lo * x};
}

inline std::ostream& operator<<(std::ostream& os, const Interval& iv) {
  return os << '[' << iv.lo << ", " << iv.hi << ']';
}

/// Axis-parallel box. `empty` marks an inconsistent system; coordinates are
/// then meaningless.
struct Box {
  std::vector<Interval> coords;
  bool empty = false;

  static Box make_empty(std::size_t n) { return Box{std::vector<Interval>(n), true}; }

  std::size_t size() const { return coords.size(); }
  const Interval& operator[](std::size_t i) const { return coords[i]; }

  /// True when every coordinate of `inner` lies inside this box (an empty
  /// inner box is contained in anything).
  bool contains(const Box& inner, double tol = 0.0) const {
    if (inner.empty) return true;
    if (empty || inner.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (inner[i].lo < coords[i].lo - tol || inner[i].hi > coords[i].hi + tol) return false;
    }
    return true;
  }

  friend bool operator==(const Box&, const Box&) = default;
};

}  // namespace certclose
