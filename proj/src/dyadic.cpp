#include "circnet/dyadic.hpp"

#include <cctype>
#include <cmath>
#include <ostream>

namespace circnet {

namespace {

constexpr int kMaxExp = 62;

int64_t checked_add(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("Dyadic: addition overflow");
  return r;
}

int64_t checked_mul(int64_t a, int64_t b) {
  int64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("Dyadic: multiplication overflow");
  return r;
}

int64_t checked_shl(int64_t a, int k) {
  if (k == 0 || a == 0) return a;
  if (k >= 63) throw std::overflow_error("Dyadic: shift overflow");
  int64_t r = a * (int64_t(1) << k);
  if ((r >> k) != a) throw std::overflow_error("Dyadic: shift overflow");
  return r;
}

[[noreturn]] void bad_literal(std::string_view s) {
  throw std::invalid_argument("invalid dyadic literal '" + std::string(s) + "'");
}

int64_t parse_int(std::string_view s, std::string_view whole) {
  if (s.empty()) bad_literal(whole);
  bool neg = false;
  size_t i = 0;
  if (s[0] == '-' || s[0] == '+') {
    neg = s[0] == '-';
    i = 1;
  }
  if (i == s.size()) bad_literal(whole);
  int64_t v = 0;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) bad_literal(whole);
    v = checked_add(checked_mul(v, 10), s[i] - '0');
  }
  return neg ? -v : v;
}

}  // namespace

void Dyadic::normalize() {
  if (mant_ == 0) {
    exp_ = 0;
    return;
  }
  if (exp_ > 0) {
    int tz = __builtin_ctzll(static_cast<uint64_t>(mant_));
    int k = tz < exp_ ? tz : exp_;
    mant_ >>= k;
    exp_ -= k;
  }
  if (exp_ > kMaxExp) throw std::overflow_error("Dyadic: denominator too large");
}

Dyadic Dyadic::from_parts(int64_t m, int e) {
  Dyadic d;
  if (e < 0) {
    d.mant_ = checked_shl(m, -e);
    d.exp_ = 0;
  } else {
    d.mant_ = m;
    d.exp_ = e;
  }
  d.normalize();
  return d;
}

Dyadic Dyadic::pow2(int k) {
  return k >= 0 ? from_parts(checked_shl(1, k), 0) : from_parts(1, -k);
}

Dyadic Dyadic::parse(std::string_view s) {
  std::string_view whole = s;
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.empty()) bad_literal(whole);
  auto slash = s.find('/');
  if (slash != std::string_view::npos) {
    int64_t num = parse_int(s.substr(0, slash), whole);
    std::string_view den = s.substr(slash + 1);
    if (den.size() > 2 && den[0] == '2' && den[1] == '^') {
      int64_t k = parse_int(den.substr(2), whole);
      if (k < 0 || k > kMaxExp) bad_literal(whole);
      return from_parts(num, static_cast<int>(k));
    }
    int64_t d = parse_int(den, whole);
    if (d <= 0 || (d & (d - 1)) != 0) bad_literal(whole);
    return from_parts(num, __builtin_ctzll(static_cast<uint64_t>(d)));
  }
  auto dot = s.find('.');
  if (dot == std::string_view::npos) return Dyadic(parse_int(s, whole));
  bool neg = s[0] == '-';
  std::string_view ip = s.substr(0, dot);
  std::string_view fp = s.substr(dot + 1);
  if (fp.empty()) bad_literal(whole);
  if (ip == "-" || ip == "+" || ip.empty()) ip = "0";
  Dyadic r(parse_int(ip, whole));
  if (neg) r = -r;
  // fractional digits: value = digits / 10^n, must be dyadic
  int64_t digits = parse_int(fp, whole);
  int n = static_cast<int>(fp.size());
  // 10^n = 2^n 5^n; digits must be divisible by 5^n
  int64_t five = 1;
  for (int i = 0; i < n; ++i) five = checked_mul(five, 5);
  if (digits % five != 0) bad_literal(whole);
  Dyadic frac = from_parts(digits / five, n);
  r += frac;
  return neg ? -r : r;
}

int64_t Dyadic::to_int() const {
  if (exp_ != 0) throw std::domain_error("Dyadic: value " + str() + " is not an integer");
  return mant_;
}

int64_t Dyadic::floor() const {
  return exp_ == 0 ? mant_ : (mant_ >> exp_);  // arithmetic shift floors
}

double Dyadic::to_double() const { return std::ldexp(static_cast<double>(mant_), -exp_); }

std::string Dyadic::str() const {
  if (exp_ == 0) return std::to_string(mant_);
  return std::to_string(mant_) + "/2^" + std::to_string(exp_);
}

std::string Dyadic::decimal() const {
  if (exp_ == 0) return std::to_string(mant_);
  // m/2^e = m*5^e / 10^e
  bool neg = mant_ < 0;
  uint64_t m = neg ? static_cast<uint64_t>(-(mant_ + 1)) + 1 : static_cast<uint64_t>(mant_);
  uint64_t ip = m >> exp_;
  uint64_t fr = m & ((uint64_t(1) << exp_) - 1);
  std::string digits;
  // long division of the fraction, exact since denominator is 2^e
  for (int i = 0; i < exp_ && fr != 0; ++i) {
    unsigned __int128 t = static_cast<unsigned __int128>(fr) * 10u;
    digits.push_back(static_cast<char>('0' + static_cast<int>(t >> exp_)));
    fr = static_cast<uint64_t>(t & ((static_cast<unsigned __int128>(1) << exp_) - 1));
  }
  return (neg ? "-" : "") + std::to_string(ip) + "." + digits;
}

Dyadic Dyadic::operator-() const {
  if (mant_ == std::numeric_limits<int64_t>::min()) throw std::overflow_error("Dyadic: negation overflow");
  Dyadic r;
  r.mant_ = -mant_;
  r.exp_ = exp_;
  return r;
}

Dyadic& Dyadic::operator+=(const Dyadic& o) {
  if (exp_ == o.exp_) {
    mant_ = checked_add(mant_, o.mant_);
  } else if (exp_ > o.exp_) {
    mant_ = checked_add(mant_, checked_shl(o.mant_, exp_ - o.exp_));
  } else {
    mant_ = checked_add(checked_shl(mant_, o.exp_ - exp_), o.mant_);
    exp_ = o.exp_;
  }
  if (exp_ != 0) normalize();
  return *this;
}

Dyadic& Dyadic::operator-=(const Dyadic& o) { return *this += -o; }

Dyadic& Dyadic::operator*=(const Dyadic& o) {
  mant_ = checked_mul(mant_, o.mant_);
  exp_ += o.exp_;
  if (exp_ != 0) normalize();
  return *this;
}

Dyadic Dyadic::ldexp(int k) const {
  if (mant_ == 0) return *this;
  if (k >= 0) {
    if (exp_ >= k) return from_parts(mant_, exp_ - k);
    return from_parts(checked_shl(mant_, k - exp_), 0);
  }
  return from_parts(mant_, exp_ - k);
}

Dyadic operator/(const Dyadic& a, const Dyadic& b) {
  if (b.mant_ == 0) throw std::domain_error("Dyadic: division by zero");
  int64_t bm = b.mant_ < 0 ? -b.mant_ : b.mant_;
  int sgn = b.mant_ < 0 ? -1 : 1;
  if ((bm & (bm - 1)) == 0) {
    int k = __builtin_ctzll(static_cast<uint64_t>(bm));
    Dyadic r = a.ldexp(b.exp_ - k);
    return sgn < 0 ? -r : r;
  }
  // b = odd * 2^j: exact only if the odd part divides a's mantissa
  int j = __builtin_ctzll(static_cast<uint64_t>(bm));
  int64_t odd = bm >> j;
  if (a.mant_ % odd != 0) throw std::domain_error("Dyadic: inexact division");
  Dyadic r = Dyadic::from_parts(a.mant_ / odd, a.exp_).ldexp(b.exp_ - j);
  return sgn < 0 ? -r : r;
}

bool operator<(const Dyadic& a, const Dyadic& b) {
  if (a.exp_ == b.exp_) return a.mant_ < b.mant_;
  // compare a.m * 2^(b.e) vs b.m * 2^(a.e) using 128-bit
  __int128 l = static_cast<__int128>(a.mant_) << (b.exp_ > a.exp_ ? b.exp_ - a.exp_ : 0);
  __int128 r = static_cast<__int128>(b.mant_) << (a.exp_ > b.exp_ ? a.exp_ - b.exp_ : 0);
  return l < r;
}

std::ostream& operator<<(std::ostream& os, const Dyadic& d) { return os << d.decimal(); }

}  // namespace circnet
