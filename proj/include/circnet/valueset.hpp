#ifndef CIRCNET_VALUESET_HPP
#define CIRCNET_VALUESET_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "circnet/dyadic.hpp"

namespace circnet {

/**
 * Set of values a port can carry: either all of R, or the lattice
 * {lo, lo + 2^-step, ..., hi} (lo and hi on the lattice).
 * bit = lattice(0, 0, 1); R_q = lattice(q, -M, M).
 **/
struct ValueSet {
  bool real = false;
  int step = 0;
  Dyadic lo;
  Dyadic hi;

  static ValueSet bit() { return lattice(0, Dyadic(0), Dyadic(1)); }
  static ValueSet grid(int q);
  static ValueSet integers(int64_t lo, int64_t hi) { return lattice(0, Dyadic(lo), Dyadic(hi)); }
  static ValueSet lattice(int step, Dyadic lo, Dyadic hi);
  static ValueSet singleton(const Dyadic& v) { return lattice(v.exponent(), v, v); }
  static ValueSet all() {
    ValueSet v;
    v.real = true;
    return v;
  }
  static ValueSet parse(std::string_view s);

  bool finite() const { return !real; }
  bool contains(const Dyadic& x) const;
  bool subset_of(const ValueSet& o) const;
  uint64_t size() const;            // throws if not finite
  Dyadic at(uint64_t i) const;      // i-th element, increasing
  uint64_t index_of(const Dyadic& x) const;
  ValueSet hull(const ValueSet& o) const;
  std::string str() const;          // "bit", "grid(2)", "int(-2,2)", "lattice(1,0,3/2^1)", "real"

  bool operator==(const ValueSet& o) const {
    return real == o.real && (real || (step == o.step && lo == o.lo && hi == o.hi));
  }
};

}  // namespace circnet

#endif
