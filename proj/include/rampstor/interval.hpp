#pragma once

// Real interval with independent open/closed flags per endpoint. The
// probability maps over discrete supports must distinguish (a, b] from
// [a, b]; endpoint membership is decided by exact comparison, no tolerance.

#include <limits>

namespace rampstor {

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool lo_closed = false;
  bool hi_closed = true;

  // (lo, hi], the shape used by the threshold recursions.
  static Interval open_closed(double lo, double hi) { return {lo, hi, false, true}; }
  static Interval closed(double lo, double hi) { return {lo, hi, true, true}; }
  static Interval open(double lo, double hi) { return {lo, hi, false, false}; }
  static Interval closed_open(double lo, double hi) { return {lo, hi, true, false}; }

  bool empty() const {
    if (lo > hi) return true;
    if (lo == hi) return !(lo_closed && hi_closed);
    return false;
  }

  bool contains(double x) const {
    if (empty()) return false;
    const bool above_lo = (x > lo) || (x == lo && lo_closed);
    const bool below_hi = (x < hi) || (x == hi && hi_closed);
    return above_lo && below_hi;
  }

  bool bounded_below() const { return lo > -std::numeric_limits<double>::infinity(); }
};

}  // namespace rampstor
