#include "circnet/valueset.hpp"

#include <stdexcept>
#include <vector>

#include "circnet/fixnum.hpp"

namespace circnet {

ValueSet ValueSet::grid(int q) {
  Dyadic m = grid_max(q);
  return lattice(q, -m, m);
}

ValueSet ValueSet::lattice(int step, Dyadic lo, Dyadic hi) {
  if (step < 0) throw std::invalid_argument("ValueSet: negative step");
  if (hi < lo) throw std::invalid_argument("ValueSet: empty range");
  if (lo.exponent() > step || hi.exponent() > step)
    throw std::invalid_argument("ValueSet: endpoints off the 2^-" + std::to_string(step) + " lattice");
  ValueSet v;
  v.step = step;
  v.lo = lo;
  v.hi = hi;
  return v;
}

bool ValueSet::contains(const Dyadic& x) const {
  if (real) return true;
  return x.exponent() <= step && lo <= x && x <= hi;
}

bool ValueSet::subset_of(const ValueSet& o) const {
  if (o.real) return true;
  if (real) return false;
  if (step > o.step) {
    // a finer lattice can still sit inside o if it is a single point
    return lo == hi && o.contains(lo);
  }
  return o.lo <= lo && hi <= o.hi;
}

uint64_t ValueSet::size() const {
  if (real) throw std::domain_error("ValueSet: real line is not enumerable");
  Dyadic n = (hi - lo).ldexp(step);
  return static_cast<uint64_t>(n.to_int()) + 1;
}

Dyadic ValueSet::at(uint64_t i) const {
  if (i >= size()) throw std::out_of_range("ValueSet::at");
  return lo + Dyadic::from_parts(static_cast<int64_t>(i), step);
}

uint64_t ValueSet::index_of(const Dyadic& x) const {
  if (!contains(x)) throw std::domain_error("ValueSet: value not in set");
  return static_cast<uint64_t>((x - lo).ldexp(step).to_int());
}

ValueSet ValueSet::hull(const ValueSet& o) const {
  if (real || o.real) return all();
  return lattice(std::max(step, o.step), min(lo, o.lo), max(hi, o.hi));
}

std::string ValueSet::str() const {
  if (real) return "real";
  if (*this == bit()) return "bit";
  if (step >= 1 && step <= kMaxPrecision && *this == grid(step)) return "grid(" + std::to_string(step) + ")";
  if (step == 0) return "int(" + lo.str() + "," + hi.str() + ")";
  return "lattice(" + std::to_string(step) + "," + lo.str() + "," + hi.str() + ")";
}

namespace {

std::vector<std::string> split_args(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

ValueSet ValueSet::parse(std::string_view s) {
  auto trim = [](std::string_view v) {
    while (!v.empty() && v.front() == ' ') v.remove_prefix(1);
    while (!v.empty() && v.back() == ' ') v.remove_suffix(1);
    return v;
  };
  s = trim(s);
  if (s == "bit") return bit();
  if (s == "real") return all();
  auto open = s.find('(');
  if (open == std::string_view::npos || s.back() != ')')
    throw std::invalid_argument("unknown value set '" + std::string(s) + "'");
  std::string_view head = s.substr(0, open);
  auto args = split_args(s.substr(open + 1, s.size() - open - 2));
  if (head == "grid" && args.size() == 1) return grid(std::stoi(args[0]));
  if (head == "int" && args.size() == 2)
    return lattice(0, Dyadic::parse(args[0]), Dyadic::parse(args[1]));
  if (head == "lattice" && args.size() == 3)
    return lattice(std::stoi(args[0]), Dyadic::parse(args[1]), Dyadic::parse(args[2]));
  throw std::invalid_argument("unknown value set '" + std::string(s) + "'");
}

}  // namespace circnet
