#include "circnet/fixnum.hpp"

#include <algorithm>
#include <stdexcept>

namespace circnet {

Dyadic FxNumber::value() const {
  Dyadic v = Dyadic::from_parts(static_cast<int64_t>(magnitude), q);
  return sign ? -v : v;
}

void check_precision(int q) {
  if (q < 1 || q > kMaxPrecision) {
    throw std::invalid_argument("precision q=" + std::to_string(q) + " out of range [1," +
                                std::to_string(kMaxPrecision) + "]");
  }
}

Dyadic grid_max(int q) {
  check_precision(q);
  return Dyadic::pow2(q + 1) - Dyadic::pow2(-q);
}

uint64_t magnitude_limit(int q) { return uint64_t(1) << (2 * q + 1); }

bool on_grid(const Dyadic& x, int q) {
  if (x.exponent() > q) return false;
  return abs(x) <= grid_max(q);
}

FxNumber fx_from_value(const Dyadic& x, int q) {
  check_precision(q);
  if (!on_grid(x, q)) throw std::domain_error("value " + x.decimal() + " is not on R_" + std::to_string(q));
  Dyadic s = abs(x).ldexp(q);
  return FxNumber{x.sign() < 0, static_cast<uint64_t>(s.to_int()), q};
}

std::vector<FxNumber> enumerate_codes(int q) {
  check_precision(q);
  std::vector<FxNumber> out;
  uint64_t lim = magnitude_limit(q);
  out.reserve(2 * lim);
  for (int s = 0; s < 2; ++s)
    for (uint64_t m = 0; m < lim; ++m) out.push_back(FxNumber{s == 1, m, q});
  return out;
}

std::vector<Dyadic> enumerate_grid(int q) {
  check_precision(q);
  int64_t lim = static_cast<int64_t>(magnitude_limit(q));
  std::vector<Dyadic> out;
  out.reserve(2 * lim - 1);
  for (int64_t m = -(lim - 1); m < lim; ++m) out.push_back(Dyadic::from_parts(m, q));
  return out;
}

BitString::BitString(std::vector<uint8_t> b) : bits(std::move(b)) {
  for (uint8_t v : bits)
    if (v > 1) throw std::invalid_argument("BitString: entry not in {0,1}");
}

BitString BitString::parse(std::string_view s) {
  if (s.size() >= 2 && s[0] == '0' && (s[1] == 'b' || s[1] == 'B')) s.remove_prefix(2);
  if (s.empty()) throw std::invalid_argument("BitString: empty literal");
  BitString r;
  for (char c : s) {
    if (c == '_') continue;
    if (c != '0' && c != '1') throw std::invalid_argument("BitString: bad character '" + std::string(1, c) + "'");
    r.bits.push_back(static_cast<uint8_t>(c - '0'));
  }
  return r;
}

BitString BitString::from_uint(uint64_t v, size_t width) {
  BitString r(width);
  for (size_t i = 0; i < width; ++i) r.bits[width - 1 - i] = (i < 64) ? ((v >> i) & 1u) : 0;
  return r;
}

uint64_t BitString::to_uint() const {
  if (bits.size() > 64) throw std::overflow_error("BitString: wider than 64 bits");
  uint64_t v = 0;
  for (uint8_t b : bits) v = (v << 1) | b;
  return v;
}

std::string BitString::str() const {
  std::string s = "0b";
  for (uint8_t b : bits) s.push_back(static_cast<char>('0' + b));
  return s;
}

std::vector<Dyadic> BitString::to_values() const {
  std::vector<Dyadic> v;
  v.reserve(bits.size());
  for (uint8_t b : bits) v.emplace_back(static_cast<int>(b));
  return v;
}

BitString BitString::from_values(const std::vector<Dyadic>& v) {
  BitString r(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    if (v[i] == Dyadic(0)) r.bits[i] = 0;
    else if (v[i] == Dyadic(1)) r.bits[i] = 1;
    else throw std::domain_error("BitString: value " + v[i].decimal() + " is not a bit");
  }
  return r;
}

namespace {

void same_width(const BitString& a, const BitString& b, const char* what) {
  if (a.width() != b.width() || a.width() == 0)
    throw std::invalid_argument(std::string(what) + ": width mismatch");
}

BitString bits_not(const BitString& a) {
  BitString r = a;
  for (auto& b : r.bits) b ^= 1u;
  return r;
}

BitString bits_and(const BitString& a, const BitString& b) {
  BitString r = a;
  for (size_t i = 0; i < r.width(); ++i) r.bits[i] &= b.bits[i];
  return r;
}

BitString broadcast(uint8_t v, size_t w) { return BitString(std::vector<uint8_t>(w, v)); }

}  // namespace

// ripple through (XOR, LSHIFT(AND)) B times, like the network does
BitString bits_add(const BitString& a, const BitString& b) {
  same_width(a, b, "bits_add");
  size_t w = a.width();
  BitString s = a, c = b;
  for (size_t it = 0; it < w; ++it) {
    BitString x(w), carry(w);
    for (size_t i = 0; i < w; ++i) {
      x.bits[i] = s.bits[i] ^ c.bits[i];
      carry.bits[i] = s.bits[i] & c.bits[i];
    }
    BitString sh(w);
    for (size_t i = 0; i + 1 < w; ++i) sh.bits[i] = carry.bits[i + 1];
    s = x;
    c = sh;
  }
  return s;
}

BitString bits_mult(const BitString& a, const BitString& b) {
  same_width(a, b, "bits_mult");
  size_t w = a.width();
  BitString acc(w);
  for (size_t i = 0; i < w; ++i) {
    BitString sh(w);
    for (size_t j = 0; j + 1 < w; ++j) sh.bits[j] = acc.bits[j + 1];
    acc = bits_add(sh, bits_and(broadcast(a.bits[i], w), b));
  }
  return acc;
}

BitString bits_comp(const BitString& a) {
  return bits_add(BitString::from_uint(1, a.width()), bits_not(a));
}

BitString bits_int_to_twos(const BitString& a) {
  if (a.width() < 2) throw std::invalid_argument("bits_int_to_twos: width < 2");
  size_t w = a.width();
  uint8_t rho = a.bits[0];
  BitString lowered = a;
  lowered.bits[0] = 0;
  BitString keep = bits_and(broadcast(rho ^ 1u, w), lowered);
  BitString neg = bits_and(broadcast(rho, w), bits_comp(lowered));
  return bits_add(keep, neg);
}

BitString bits_embed(const BitString& a) {
  if (a.width() == 0) throw std::invalid_argument("bits_embed: empty");
  BitString r(a.width() + 1);
  r.bits[0] = a.bits[0];
  std::copy(a.bits.begin(), a.bits.end(), r.bits.begin() + 1);
  return r;
}

BitString bits_exact_add(const BitString& a, const BitString& b) {
  same_width(a, b, "bits_exact_add");
  return bits_add(bits_embed(a), bits_embed(b));
}

namespace {

void same_precision(const FxNumber& a, const FxNumber& b) {
  if (a.q != b.q) throw std::invalid_argument("precision mismatch: q=" + std::to_string(a.q) + " vs q=" + std::to_string(b.q));
  check_precision(a.q);
  if (a.magnitude >= magnitude_limit(a.q) || b.magnitude >= magnitude_limit(b.q))
    throw std::domain_error("magnitude out of range");
}

// (sign, magnitude bits) layout used by the integer conversions
BitString int_layout(const FxNumber& a) {
  int w = 2 * a.q + 2;
  BitString r = BitString::from_uint(a.magnitude, w);
  r.bits[0] = a.sign ? 1 : 0;
  return r;
}

FxNumber from_int_layout(const BitString& r, int q) {
  BitString mag = r;
  mag.bits[0] = 0;
  return FxNumber{r.bits[0] == 1, mag.to_uint(), q};
}

}  // namespace

FxNumber fx_add_mod(const FxNumber& a, const FxNumber& b) {
  same_precision(a, b);
  BitString ta = bits_int_to_twos(int_layout(a));
  BitString tb = bits_int_to_twos(int_layout(b));
  BitString t = bits_add(ta, tb);
  return from_int_layout(bits_int_to_twos(t), a.q);
}

FxNumber fx_mult_mod(const FxNumber& a, const FxNumber& b) {
  same_precision(a, b);
  int q = a.q;
  size_t w = static_cast<size_t>(4 * q + 2);
  BitString x = bits_mult(BitString::from_uint(a.magnitude, w), BitString::from_uint(b.magnitude, w));
  // keep only the first dropped fraction bit, add it back in place (round up)
  BitString p(w);
  size_t pos = static_cast<size_t>(3 * q + 2);
  p.bits[pos] = x.bits[pos];
  BitString g = bits_add(x, p);
  BitString mag(static_cast<size_t>(2 * q + 1));
  for (int i = 0; i < 2 * q + 1; ++i) mag.bits[i] = g.bits[q + 1 + i];
  return FxNumber{static_cast<bool>(a.sign ^ b.sign), mag.to_uint(), q};
}

BitString fx_to_bits(const FxNumber& a) {
  check_precision(a.q);
  if (a.magnitude >= magnitude_limit(a.q)) throw std::domain_error("fx_to_bits: magnitude out of range");
  BitString r = BitString::from_uint(a.magnitude, 2 * a.q + 1);
  r.bits.push_back(a.sign ? 1 : 0);
  return r;
}

FxNumber bits_to_fx(const BitString& b) {
  if (b.width() < 4 || b.width() % 2 != 0)
    throw std::invalid_argument("bits_to_fx: width " + std::to_string(b.width()) + " is not 2q+2");
  int q = static_cast<int>(b.width() - 2) / 2;
  check_precision(q);
  BitString mag(std::vector<uint8_t>(b.bits.begin(), b.bits.end() - 1));
  return FxNumber{b.bits.back() == 1, mag.to_uint(), q};
}

FxNumber RoundingScheme::apply1(const Dyadic& x) const {
  check_precision(q);
  Dyadic s = abs(x).ldexp(q);
  int64_t n = s.floor();
  if (mode == RoundingMode::Nearest) {
    Dyadic frac = s - Dyadic(n);
    if (frac > Dyadic::pow2(-1)) ++n;
  }
  int64_t lim = static_cast<int64_t>(magnitude_limit(q)) - 1;
  if (n > lim) n = lim;
  return FxNumber{x.sign() < 0 && n != 0, static_cast<uint64_t>(n), q};
}

std::vector<FxNumber> RoundingScheme::apply(const std::vector<Dyadic>& x) const {
  if (static_cast<int>(x.size()) != dimension)
    throw std::invalid_argument("round_to_grid: dimension mismatch");
  std::vector<FxNumber> out;
  out.reserve(x.size());
  for (const auto& v : x) out.push_back(apply1(v));
  return out;
}

std::vector<FxNumber> round_to_grid(const std::vector<Dyadic>& x, const RoundingScheme& scheme) {
  return scheme.apply(x);
}

int64_t oracle_floor(const Dyadic& x) { return x.floor(); }

Dyadic oracle_min(const std::vector<Dyadic>& xs) {
  if (xs.empty()) throw std::invalid_argument("oracle_min: empty");
  return *std::min_element(xs.begin(), xs.end());
}

Dyadic oracle_max(const std::vector<Dyadic>& xs) {
  if (xs.empty()) throw std::invalid_argument("oracle_max: empty");
  return *std::max_element(xs.begin(), xs.end());
}

Dyadic oracle_median(std::vector<Dyadic> xs) {
  if (xs.empty()) throw std::invalid_argument("oracle_median: empty");
  std::sort(xs.begin(), xs.end());
  size_t n = xs.size();
  if (n % 2 == 1) return xs[n / 2];
  return (xs[n / 2 - 1] + xs[n / 2]).ldexp(-1);
}

Dyadic oracle_majority(const std::vector<Dyadic>& xs) {
  if (xs.empty()) throw std::invalid_argument("oracle_majority: empty");
  Dyadic sum;
  for (const auto& x : xs) sum += x;
  // sum >= n/2  <=>  2*sum >= n
  return sum.ldexp(1) >= Dyadic(static_cast<long long>(xs.size())) ? Dyadic(1) : Dyadic(0);
}

std::string fx_format(const FxNumber& a) {
  std::string v = a.value().decimal();
  if (a.sign && a.magnitude == 0) v = "-0";
  return v + "@q=" + std::to_string(a.q);
}

FxNumber fx_parse(std::string_view s) {
  auto at = s.find("@q=");
  if (at == std::string_view::npos) throw std::invalid_argument("fx_parse: missing '@q=' in '" + std::string(s) + "'");
  std::string num(s.substr(0, at));
  // accept the typographic minus sign as well
  const std::string uminus = "\xE2\x88\x92";
  if (num.rfind(uminus, 0) == 0) num = "-" + num.substr(uminus.size());
  int q = std::stoi(std::string(s.substr(at + 3)));
  bool neg = !num.empty() && num[0] == '-';
  FxNumber r = fx_from_value(Dyadic::parse(num), q);
  if (neg && r.magnitude == 0) r.sign = true;
  return r;
}

}  // namespace circnet
