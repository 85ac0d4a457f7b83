#ifndef CIRCNET_DYADIC_HPP
#define CIRCNET_DYADIC_HPP

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace circnet {

/**
 * Exact dyadic rational m / 2^e with e >= 0.
 * Always normalized: e == 0 or m is odd.  Arithmetic is exact and throws
 * std::overflow_error instead of wrapping.
 **/
class Dyadic {
public:
  constexpr Dyadic() = default;
  constexpr Dyadic(int v) : mant_(v) {}
  constexpr Dyadic(long v) : mant_(v) {}
  constexpr Dyadic(long long v) : mant_(v) {}

  // m * 2^-e, normalized on construction
  static Dyadic from_parts(int64_t m, int e);
  static Dyadic pow2(int k);  // 2^k, k may be negative

  // "3", "-7/8", "5/2^3", "1.75", "-0.125"
  static Dyadic parse(std::string_view s);

  int64_t mantissa() const { return mant_; }
  int exponent() const { return exp_; }
  bool is_integer() const { return exp_ == 0; }
  bool is_zero() const { return mant_ == 0; }
  int sign() const { return (mant_ > 0) - (mant_ < 0); }

  // exact value for integers; throws otherwise
  int64_t to_int() const;
  // floor(x)
  int64_t floor() const;
  double to_double() const;

  // "n" or "n/2^k"
  std::string str() const;
  // shortest exact decimal, e.g. "-1.75"
  std::string decimal() const;

  Dyadic operator-() const;
  Dyadic& operator+=(const Dyadic& o);
  Dyadic& operator-=(const Dyadic& o);
  Dyadic& operator*=(const Dyadic& o);
  // multiply by 2^k
  Dyadic ldexp(int k) const;

  friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }
  friend Dyadic operator-(Dyadic a, const Dyadic& b) { return a -= b; }
  friend Dyadic operator*(Dyadic a, const Dyadic& b) { return a *= b; }
  // only exact divisions are allowed (divisor a power of two, or exact result)
  friend Dyadic operator/(const Dyadic& a, const Dyadic& b);

  friend bool operator==(const Dyadic& a, const Dyadic& b) {
    return a.mant_ == b.mant_ && a.exp_ == b.exp_;
  }
  friend bool operator!=(const Dyadic& a, const Dyadic& b) { return !(a == b); }
  friend bool operator<(const Dyadic& a, const Dyadic& b);
  friend bool operator>(const Dyadic& a, const Dyadic& b) { return b < a; }
  friend bool operator<=(const Dyadic& a, const Dyadic& b) { return !(b < a); }
  friend bool operator>=(const Dyadic& a, const Dyadic& b) { return !(a < b); }

private:
  void normalize();

  int64_t mant_ = 0;
  int32_t exp_ = 0;
};

std::ostream& operator<<(std::ostream& os, const Dyadic& d);

inline Dyadic relu(const Dyadic& x) { return x.sign() > 0 ? x : Dyadic(); }
inline Dyadic abs(const Dyadic& x) { return x.sign() < 0 ? -x : x; }
inline Dyadic min(const Dyadic& a, const Dyadic& b) { return b < a ? b : a; }
inline Dyadic max(const Dyadic& a, const Dyadic& b) { return a < b ? b : a; }

// hash for unordered containers
struct DyadicHash {
  size_t operator()(const Dyadic& d) const {
    return std::hash<int64_t>()(d.mantissa()) * 31u + static_cast<size_t>(d.exponent());
  }
};

}  // namespace circnet

namespace Eigen {
template <>
struct NumTraits<circnet::Dyadic> : GenericNumTraits<circnet::Dyadic> {
  typedef circnet::Dyadic Real;
  typedef circnet::Dyadic NonInteger;
  typedef circnet::Dyadic Literal;
  typedef circnet::Dyadic Nested;
  enum {
    IsComplex = 0,
    IsInteger = 0,
    IsSigned = 1,
    RequireInitialization = 1,
    ReadCost = 1,
    AddCost = 3,
    MulCost = 3
  };
  static inline Real epsilon() { return Real(0); }
  static inline Real dummy_precision() { return Real(0); }
  static inline int digits10() { return 18; }
  static inline Real highest() { return Real(std::numeric_limits<int64_t>::max()); }
  static inline Real lowest() { return Real(std::numeric_limits<int64_t>::min() + 1); }
};
}  // namespace Eigen

#endif
