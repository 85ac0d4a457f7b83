#ifndef CIRCNET_FIXNUM_HPP
#define CIRCNET_FIXNUM_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "circnet/dyadic.hpp"

namespace circnet {

/**
 * A point of the grid R_q in sign-magnitude form:
 * value = (-1)^sign * magnitude * 2^-q with magnitude < 2^(2q+1).
 **/
struct FxNumber {
  bool sign = false;
  uint64_t magnitude = 0;
  int q = 1;

  Dyadic value() const;
  bool value_equal(const FxNumber& o) const { return value() == o.value(); }
  // bitwise identity, signed zeros differ
  bool operator==(const FxNumber& o) const {
    return sign == o.sign && magnitude == o.magnitude && q == o.q;
  }
};

constexpr int kMaxPrecision = 20;

void check_precision(int q);
// largest magnitude M = 2^(q+1) - 2^-q
Dyadic grid_max(int q);
uint64_t magnitude_limit(int q);  // 2^(2q+1)
bool on_grid(const Dyadic& x, int q);
// exact conversion; throws std::domain_error if x is not on R_q
FxNumber fx_from_value(const Dyadic& x, int q);

// all 2^(2q+2) sign-magnitude codes in code order (sign, then magnitude)
std::vector<FxNumber> enumerate_codes(int q);
// the 2^(2q+2)-1 distinct grid values in increasing order
std::vector<Dyadic> enumerate_grid(int q);

struct BitString {
  std::vector<uint8_t> bits;

  BitString() = default;
  explicit BitString(size_t width) : bits(width, 0) {}
  explicit BitString(std::vector<uint8_t> b);
  // most significant first: "0b0101" or "0101"
  static BitString parse(std::string_view s);
  // width-bit unsigned integer, most significant first
  static BitString from_uint(uint64_t v, size_t width);

  size_t width() const { return bits.size(); }
  uint64_t to_uint() const;
  std::string str() const;  // "0b..."
  std::vector<Dyadic> to_values() const;
  static BitString from_values(const std::vector<Dyadic>& v);

  uint8_t operator[](size_t i) const { return bits[i]; }
  uint8_t& operator[](size_t i) { return bits[i]; }
  bool operator==(const BitString& o) const { return bits == o.bits; }
};

// bit-level helpers mirroring the network constructions; all most-significant first
BitString bits_add(const BitString& a, const BitString& b);         // mod 2^B
BitString bits_mult(const BitString& a, const BitString& b);        // mod 2^B
BitString bits_comp(const BitString& a);                            // two's-complement negation
BitString bits_int_to_twos(const BitString& a);                     // sign-magnitude <-> two's complement
BitString bits_embed(const BitString& a);                           // sign-extend by one bit
BitString bits_exact_add(const BitString& a, const BitString& b);   // TWOSINT_B^2 -> TWOSINT_{B+1}

// Modular arithmetic on R_q, defined by the bit-level procedure.
FxNumber fx_add_mod(const FxNumber& a, const FxNumber& b);
FxNumber fx_mult_mod(const FxNumber& a, const FxNumber& b);

// Codec: integer bits beta_q..beta_0, fraction bits beta_-1..beta_-q, then
// the sign bit (1 = negative).  Width 2q+2.
BitString fx_to_bits(const FxNumber& a);
FxNumber bits_to_fx(const BitString& b);

enum class RoundingMode {
  Nearest,     // l_inf metric projection, ties toward zero
  TowardZero,  // sign(x) * sup{a on grid : 0 <= a <= |x|}
};

struct RoundingScheme {
  int q = 1;
  int dimension = 1;
  RoundingMode mode = RoundingMode::Nearest;

  FxNumber apply1(const Dyadic& x) const;
  std::vector<FxNumber> apply(const std::vector<Dyadic>& x) const;
};

std::vector<FxNumber> round_to_grid(const std::vector<Dyadic>& x, const RoundingScheme& scheme);

// plain oracles
int64_t oracle_floor(const Dyadic& x);
Dyadic oracle_min(const std::vector<Dyadic>& xs);
Dyadic oracle_max(const std::vector<Dyadic>& xs);
// odd n: middle element; even n: mean of the two middle elements
Dyadic oracle_median(std::vector<Dyadic> xs);
// 1 iff sum >= n/2
Dyadic oracle_majority(const std::vector<Dyadic>& xs);

// "-1.75@q=2"
std::string fx_format(const FxNumber& a);
FxNumber fx_parse(std::string_view s);

}  // namespace circnet

#endif
