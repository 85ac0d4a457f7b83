#include "circnet/gate.hpp"

#include <algorithm>
#include <map>
#include <optional>
#include <sstream>

#include "circnet/fixnum.hpp"

namespace circnet {

namespace {

struct OpInfo {
  GateOp op;
  const char* name;
};

const OpInfo kOps[] = {
    {GateOp::Not, "NOT"},
    {GateOp::And, "AND"},
    {GateOp::Or, "OR"},
    {GateOp::Xor, "XOR"},
    {GateOp::Nand, "NAND"},
    {GateOp::Imply, "IMPLY"},
    {GateOp::Equal, "EQUAL"},
    {GateOp::Leq, "LEQ"},
    {GateOp::Geq, "GEQ"},
    {GateOp::Forall, "FORALL"},
    {GateOp::Exists, "EXISTS"},
    {GateOp::Constant, "CONST"},
    {GateOp::IndHalfLine, "IND_GE"},
    {GateOp::IndOpenHalfLine, "IND_LT"},
    {GateOp::IndClosed, "IND_CLOSED"},
    {GateOp::IndHalfOpen, "IND_HALFOPEN"},
    {GateOp::IndHalfOpenComplement, "IND_HALFOPEN_C"},
    {GateOp::PointIndicator, "POINT"},
    {GateOp::Floor, "FLOOR"},
    {GateOp::Mod2, "MOD2"},
    {GateOp::LShift, "LSHIFT"},
    {GateOp::RShift, "RSHIFT"},
    {GateOp::BitAdd, "ADD"},
    {GateOp::BitAddN, "ADDN"},
    {GateOp::BitMult, "MULT"},
    {GateOp::Comp, "COMP"},
    {GateOp::Embed, "EMBED"},
    {GateOp::IntToTwos, "INT2TWOS"},
    {GateOp::ExactAdd, "EXACT_ADD"},
    {GateOp::BitDecoder, "BIT_DEC"},
    {GateOp::BitEncoder, "BIT_ENC"},
    {GateOp::SignIntRem, "SIGN_INT_REM"},
    {GateOp::RemainderBits, "REM_BITS"},
    {GateOp::IntegerBits, "INT_BITS"},
    {GateOp::ModAdd, "MOD_ADD"},
    {GateOp::ModMult, "MOD_MULT"},
    {GateOp::Min, "MIN"},
    {GateOp::Max, "MAX"},
    {GateOp::Median, "MEDIAN"},
    {GateOp::Majority, "MAJ"},
    {GateOp::Identity, "ID"},
};

bool is_logic(GateOp op) {
  switch (op) {
    case GateOp::Not: case GateOp::And: case GateOp::Or: case GateOp::Xor: case GateOp::Nand:
    case GateOp::Imply: case GateOp::Equal: case GateOp::Leq: case GateOp::Geq:
      return true;
    default:
      return false;
  }
}

bool is_bitwise(GateOp op) {
  switch (op) {
    case GateOp::LShift: case GateOp::RShift: case GateOp::BitAdd: case GateOp::BitAddN:
    case GateOp::BitMult: case GateOp::Comp: case GateOp::Embed: case GateOp::IntToTwos:
    case GateOp::ExactAdd:
      return true;
    default:
      return false;
  }
}

bool is_interval(GateOp op) {
  return op == GateOp::IndHalfLine || op == GateOp::IndOpenHalfLine || op == GateOp::IndClosed ||
         op == GateOp::IndHalfOpen || op == GateOp::IndHalfOpenComplement;
}

bool two_endpoints(GateOp op) {
  return op == GateOp::IndClosed || op == GateOp::IndHalfOpen || op == GateOp::IndHalfOpenComplement;
}

bool is_tropical(GateOp op) {
  return op == GateOp::Min || op == GateOp::Max || op == GateOp::Median || op == GateOp::Majority;
}

bool is_codec(GateOp op) {
  return op == GateOp::BitDecoder || op == GateOp::BitEncoder || op == GateOp::SignIntRem ||
         op == GateOp::RemainderBits || op == GateOp::IntegerBits;
}

void need(bool ok, const GateKind& g, const std::string& msg) {
  if (!ok) throw std::invalid_argument(std::string(gate_name(g.op)) + ": " + msg);
}

constexpr int kMaxBits = 16;
constexpr int kMaxForallBits = 12;
constexpr int kMaxModularPrecision = 6;
constexpr int kMaxFloorRange = 1 << 12;

int64_t pow2i(int k) { return int64_t(1) << k; }

// decoder needs K = M + 2^-q-1 above every magnitude; encoder needs floor(|x|) <= M
int default_codec_m(GateOp op, int q) {
  if (op == GateOp::BitDecoder) return static_cast<int>(pow2i(q + 1));
  if (op == GateOp::RemainderBits) return 0;
  return static_cast<int>(pow2i(q + 1) - 1);
}

Dyadic sign_int_rem_reach(const GateKind& g) {
  // |x| must stay below M + 1 for the floor candidates to cover it
  Dyadic r = Dyadic(g.M + 1) - Dyadic::pow2(-g.q);
  return min(r, grid_max(g.q));
}

ValueSet bit() { return ValueSet::bit(); }

std::vector<ValueSet> repeat(const ValueSet& v, int n) { return std::vector<ValueSet>(static_cast<size_t>(n), v); }

}  // namespace

const char* gate_name(GateOp op) {
  for (const auto& o : kOps)
    if (o.op == op) return o.name;
  return "?";
}

GateOp gate_op_from_name(std::string_view name) {
  for (const auto& o : kOps)
    if (name == o.name) return o.op;
  throw std::invalid_argument("unknown gate kind '" + std::string(name) + "'");
}

const std::vector<GateOp>& all_gate_ops() {
  static const std::vector<GateOp> ops = [] {
    std::vector<GateOp> v;
    for (const auto& o : kOps) v.push_back(o.op);
    return v;
  }();
  return ops;
}

GateKind GateKind::logic(GateOp op, int B) {
  GateKind g;
  g.op = op;
  g.B = B;
  validate_gate(g);
  return g;
}

GateKind GateKind::forall(const GateKind& inner, int B1, bool exists) {
  GateKind g;
  g.op = exists ? GateOp::Exists : GateOp::Forall;
  g.B1 = B1;
  g.inner = std::make_shared<const GateKind>(inner);
  validate_gate(g);
  return g;
}

GateKind GateKind::constant(std::vector<Dyadic> c, int in_arity) {
  GateKind g;
  g.op = GateOp::Constant;
  g.vec = std::move(c);
  g.n = in_arity;
  validate_gate(g);
  return g;
}

GateKind GateKind::indicator(GateOp op, Dyadic a, Dyadic b, int q) {
  GateKind g;
  g.op = op;
  g.a = a;
  g.b = two_endpoints(op) ? b : Dyadic(0);
  g.q = q;
  validate_gate(g);
  return g;
}

GateKind GateKind::point(std::vector<Dyadic> a, int q) {
  GateKind g;
  g.op = GateOp::PointIndicator;
  g.vec = std::move(a);
  g.q = q;
  validate_gate(g);
  return g;
}

GateKind GateKind::floor(int M, int q) {
  GateKind g;
  g.op = GateOp::Floor;
  g.M = M;
  g.q = q;
  validate_gate(g);
  return g;
}

GateKind GateKind::mod2() {
  GateKind g;
  g.op = GateOp::Mod2;
  return g;
}

GateKind GateKind::bitwise(GateOp op, int B) {
  GateKind g;
  g.op = op;
  g.B = B;
  validate_gate(g);
  return g;
}

GateKind GateKind::add_n(int B, int n) {
  GateKind g;
  g.op = GateOp::BitAddN;
  g.B = B;
  g.n = n;
  validate_gate(g);
  return g;
}

GateKind GateKind::codec(GateOp op, int q, int M) {
  GateKind g;
  g.op = op;
  g.q = q;
  g.M = M;
  if (M == 0 && q >= 1 && q <= kMaxPrecision) g.M = default_codec_m(op, q);
  validate_gate(g);
  return g;
}

GateKind GateKind::modular(GateOp op, int q, bool bit_ports) {
  GateKind g;
  g.op = op;
  g.q = q;
  g.bits = bit_ports;
  validate_gate(g);
  return g;
}

GateKind GateKind::tropical(GateOp op, int n) {
  GateKind g;
  g.op = op;
  g.n = n;
  validate_gate(g);
  return g;
}

GateKind GateKind::identity(int n) {
  GateKind g;
  g.op = GateOp::Identity;
  g.n = n;
  validate_gate(g);
  return g;
}

bool GateKind::operator==(const GateKind& o) const {
  if (op != o.op || B != o.B || B1 != o.B1 || q != o.q || M != o.M || n != o.n || a != o.a || b != o.b ||
      vec != o.vec || bits != o.bits)
    return false;
  if (!inner || !o.inner) return !inner && !o.inner;
  return *inner == *o.inner;
}

void validate_gate(const GateKind& g) {
  GateOp op = g.op;
  if (is_logic(op) || is_bitwise(op)) {
    need(g.B >= 1 && g.B <= kMaxBits, g, "B must lie in [1," + std::to_string(kMaxBits) + "]");
    if (op == GateOp::BitAddN) need(g.n >= 2 && g.n <= 64, g, "n must lie in [2,64]");
    return;
  }
  switch (op) {
    case GateOp::Forall:
    case GateOp::Exists: {
      need(g.inner != nullptr, g, "missing inner gate");
      validate_gate(*g.inner);
      need(g.B1 >= 1 && g.B1 <= kMaxForallBits, g, "B1 must lie in [1," + std::to_string(kMaxForallBits) + "]");
      need(output_arity(*g.inner) == 1, g, "inner gate must have a single output");
      need(input_arity(*g.inner) > g.B1, g, "inner gate needs at least one free input");
      for (const auto& d : input_domain(*g.inner)) need(d == ValueSet::bit(), g, "inner gate must read bits");
      for (const auto& d : output_codomain(*g.inner, input_domain(*g.inner)))
        need(d.subset_of(ValueSet::bit()), g, "inner gate must output a bit");
      return;
    }
    case GateOp::Constant:
      need(!g.vec.empty(), g, "empty constant");
      need(g.n >= 1, g, "input arity must be positive");
      return;
    case GateOp::PointIndicator:
      check_precision(g.q);
      need(!g.vec.empty(), g, "empty point");
      for (const auto& v : g.vec) need(on_grid(v, g.q), g, "point " + v.decimal() + " off the grid");
      return;
    case GateOp::Floor:
      check_precision(g.q);
      need(g.M >= 1 && g.M <= kMaxFloorRange, g, "M must lie in [1," + std::to_string(kMaxFloorRange) + "]");
      return;
    case GateOp::Mod2:
      return;
    case GateOp::ModAdd:
    case GateOp::ModMult:
      need(g.q >= 1 && g.q <= kMaxModularPrecision, g,
           "q must lie in [1," + std::to_string(kMaxModularPrecision) + "]");
      return;
    case GateOp::Identity:
      need(g.n >= 1, g, "n must be positive");
      return;
    default:
      break;
  }
  if (is_interval(op)) {
    check_precision(g.q);
    need(on_grid(g.a, g.q), g, "endpoint a=" + g.a.decimal() + " off the grid");
    if (two_endpoints(op)) {
      need(on_grid(g.b, g.q), g, "endpoint b=" + g.b.decimal() + " off the grid");
      need(g.a <= g.b, g, "a must not exceed b");
    }
    return;
  }
  if (is_codec(op)) {
    check_precision(g.q);
    need(g.q <= 10, g, "q must lie in [1,10]");
    if (op == GateOp::BitDecoder) need(g.M >= pow2i(g.q + 1), g, "M must be at least 2^(q+1)");
    if (op == GateOp::BitEncoder) need(g.M >= pow2i(g.q + 1) - 1, g, "M must be at least 2^(q+1)-1");
    if (op == GateOp::SignIntRem || op == GateOp::IntegerBits)
      need(g.M >= 1 && g.M <= kMaxFloorRange, g, "M must lie in [1," + std::to_string(kMaxFloorRange) + "]");
    return;
  }
  if (is_tropical(op)) {
    need(g.n >= 2 && g.n <= 256, g, "n must lie in [2,256]");
    if (op == GateOp::Median) need(g.n % 2 == 1, g, "median arity must be odd");
    return;
  }
  throw std::invalid_argument("unknown gate op");
}

int input_arity(const GateKind& g) {
  switch (g.op) {
    case GateOp::Not:
    case GateOp::LShift:
    case GateOp::RShift:
      return g.B;
    case GateOp::And: case GateOp::Or: case GateOp::Xor: case GateOp::Nand: case GateOp::Imply:
    case GateOp::Equal: case GateOp::Leq: case GateOp::Geq: case GateOp::BitAdd: case GateOp::BitMult:
      return 2 * g.B;
    case GateOp::BitAddN:
      return g.n * g.B;
    case GateOp::Comp:
    case GateOp::Embed:
    case GateOp::IntToTwos:
      return g.B + 1;
    case GateOp::ExactAdd:
      return 2 * (g.B + 1);
    case GateOp::Forall:
    case GateOp::Exists:
      return input_arity(*g.inner) - g.B1;
    case GateOp::Constant:
      return g.n;
    case GateOp::PointIndicator:
      return static_cast<int>(g.vec.size());
    case GateOp::BitDecoder:
      return 2 * g.q + 2;
    case GateOp::ModAdd:
    case GateOp::ModMult:
      return g.bits ? 2 * (2 * g.q + 2) : 2;
    case GateOp::Min: case GateOp::Max: case GateOp::Median: case GateOp::Majority: case GateOp::Identity:
      return g.n;
    default:
      return 1;
  }
}

int output_arity(const GateKind& g) {
  switch (g.op) {
    case GateOp::Not: case GateOp::And: case GateOp::Or: case GateOp::Xor: case GateOp::Nand:
    case GateOp::Imply: case GateOp::Equal: case GateOp::Leq: case GateOp::Geq: case GateOp::LShift:
    case GateOp::RShift: case GateOp::BitAdd: case GateOp::BitAddN: case GateOp::BitMult:
      return g.B;
    case GateOp::Comp:
    case GateOp::IntToTwos:
      return g.B + 1;
    case GateOp::Embed:
    case GateOp::ExactAdd:
      return g.B + 2;
    case GateOp::Constant:
      return static_cast<int>(g.vec.size());
    case GateOp::BitEncoder:
      return 2 * g.q + 2;
    case GateOp::SignIntRem:
      return 3;
    case GateOp::RemainderBits:
      return g.q;
    case GateOp::IntegerBits:
      return g.q + 1;
    case GateOp::ModAdd:
    case GateOp::ModMult:
      return g.bits ? 2 * g.q + 2 : 1;
    case GateOp::Identity:
      return g.n;
    default:
      return 1;
  }
}

std::vector<ValueSet> input_domain(const GateKind& g) {
  int k = input_arity(g);
  switch (g.op) {
    case GateOp::Constant: case GateOp::Min: case GateOp::Max: case GateOp::Median: case GateOp::Identity:
      return repeat(ValueSet::all(), k);
    case GateOp::IndHalfLine: case GateOp::IndOpenHalfLine: case GateOp::IndClosed: case GateOp::IndHalfOpen:
    case GateOp::IndHalfOpenComplement: case GateOp::PointIndicator: case GateOp::BitEncoder:
      return repeat(ValueSet::grid(g.q), k);
    case GateOp::Floor:
      return {ValueSet::lattice(g.q, Dyadic(-g.M), Dyadic(g.M))};
    case GateOp::Mod2:
      return {ValueSet::integers(-2, 2)};
    case GateOp::SignIntRem: {
      Dyadic r = sign_int_rem_reach(g);
      return {ValueSet::lattice(g.q, -r, r)};
    }
    case GateOp::RemainderBits:
      return {ValueSet::lattice(g.q, Dyadic(0), Dyadic(1) - Dyadic::pow2(-g.q))};
    case GateOp::IntegerBits:
      return {ValueSet::integers(0, std::min<int64_t>(g.M, pow2i(g.q + 1) - 1))};
    case GateOp::ModAdd:
    case GateOp::ModMult:
      return g.bits ? repeat(bit(), k) : repeat(ValueSet::grid(g.q), k);
    default:
      return repeat(bit(), k);
  }
}

std::vector<ValueSet> output_codomain(const GateKind& g, const std::vector<ValueSet>& in) {
  int k = output_arity(g);
  switch (g.op) {
    case GateOp::Constant: {
      std::vector<ValueSet> out;
      for (const auto& c : g.vec) out.push_back(ValueSet::singleton(c));
      return out;
    }
    case GateOp::Floor: {
      if (in.size() == 1 && in[0].finite())
        return {ValueSet::integers(in[0].lo.floor(), in[0].hi.floor())};
      return {ValueSet::integers(-g.M, g.M)};
    }
    case GateOp::BitDecoder:
      return {ValueSet::grid(g.q)};
    case GateOp::SignIntRem:
      return {ValueSet::integers(0, sign_int_rem_reach(g).floor()),
              ValueSet::lattice(g.q, Dyadic(0), Dyadic(1) - Dyadic::pow2(-g.q)), bit()};
    case GateOp::ModAdd:
    case GateOp::ModMult:
      return g.bits ? repeat(bit(), k) : repeat(ValueSet::grid(g.q), k);
    case GateOp::Min:
    case GateOp::Max:
    case GateOp::Median: {
      if (in.empty()) return {ValueSet::all()};
      ValueSet h = in.front();
      for (const auto& v : in) h = h.hull(v);
      return {h};
    }
    case GateOp::Identity:
      if (static_cast<int>(in.size()) == k) return in;
      return repeat(ValueSet::all(), k);
    default:
      return repeat(bit(), k);
  }
}

bool is_commutative(const GateKind& g) {
  switch (g.op) {
    case GateOp::And: case GateOp::Or: case GateOp::Xor: case GateOp::Nand: case GateOp::Equal:
    case GateOp::Min: case GateOp::Max: case GateOp::Median: case GateOp::Majority:
      return true;
    case GateOp::BitAdd: case GateOp::BitMult: case GateOp::ModAdd: case GateOp::ModMult:
    case GateOp::ExactAdd: case GateOp::BitAddN:
      return false;  // commutative on operands, not on individual bit ports
    default:
      return false;
  }
}

namespace {

std::vector<Dyadic> bits_out(const BitString& b) { return b.to_values(); }

BitString bits_in(const std::vector<Dyadic>& x, size_t from, size_t len) {
  return BitString::from_values(std::vector<Dyadic>(x.begin() + static_cast<long>(from),
                                                     x.begin() + static_cast<long>(from + len)));
}

Dyadic b2d(bool v) { return v ? Dyadic(1) : Dyadic(0); }

std::vector<Dyadic> binary_logic(const GateKind& g, const std::vector<Dyadic>& x) {
  std::vector<Dyadic> out;
  size_t B = static_cast<size_t>(g.B);
  for (size_t i = 0; i < B; ++i) {
    bool a = x[i] == Dyadic(1), b = x[B + i] == Dyadic(1);
    bool r = false;
    switch (g.op) {
      case GateOp::And: r = a && b; break;
      case GateOp::Or: r = a || b; break;
      case GateOp::Xor: r = a != b; break;
      case GateOp::Nand: r = !(a && b); break;
      case GateOp::Imply:
      case GateOp::Leq: r = !a || b; break;
      case GateOp::Geq: r = a || !b; break;
      case GateOp::Equal: r = a == b; break;
      default: break;
    }
    out.push_back(b2d(r));
  }
  return out;
}

std::vector<Dyadic> quantify(const GateKind& g, const std::vector<Dyadic>& y) {
  bool forall = g.op == GateOp::Forall;
  size_t n = size_t(1) << g.B1;
  for (size_t v = 0; v < n; ++v) {
    std::vector<Dyadic> x = BitString::from_uint(v, static_cast<size_t>(g.B1)).to_values();
    x.insert(x.end(), y.begin(), y.end());
    bool r = gate_reference(*g.inner, x).front() == Dyadic(1);
    if (forall && !r) return {Dyadic(0)};
    if (!forall && r) return {Dyadic(1)};
  }
  return {b2d(forall)};
}

std::vector<Dyadic> modular(const GateKind& g, const std::vector<Dyadic>& x) {
  FxNumber a, b;
  if (g.bits) {
    size_t w = static_cast<size_t>(2 * g.q + 2);
    a = bits_to_fx(bits_in(x, 0, w));
    b = bits_to_fx(bits_in(x, w, w));
  } else {
    a = fx_from_value(x[0], g.q);
    b = fx_from_value(x[1], g.q);
  }
  FxNumber r = g.op == GateOp::ModAdd ? fx_add_mod(a, b) : fx_mult_mod(a, b);
  if (g.bits) return bits_out(fx_to_bits(r));
  return {r.value()};
}

}  // namespace

std::vector<Dyadic> gate_reference(const GateKind& g, const std::vector<Dyadic>& x) {
  if (static_cast<int>(x.size()) != input_arity(g))
    throw std::invalid_argument(std::string(gate_name(g.op)) + ": expected " + std::to_string(input_arity(g)) +
                                " inputs, got " + std::to_string(x.size()));
  auto dom = input_domain(g);
  for (size_t i = 0; i < x.size(); ++i)
    if (!dom[i].contains(x[i]))
      throw DomainFault(static_cast<int>(i), std::string(gate_name(g.op)) + ": input " + std::to_string(i) + " = " +
                                                 x[i].decimal() + " outside " + dom[i].str());
  size_t B = static_cast<size_t>(g.B);
  switch (g.op) {
    case GateOp::Not: {
      std::vector<Dyadic> out;
      for (const auto& v : x) out.push_back(Dyadic(1) - v);
      return out;
    }
    case GateOp::And: case GateOp::Or: case GateOp::Xor: case GateOp::Nand: case GateOp::Imply:
    case GateOp::Equal: case GateOp::Leq: case GateOp::Geq:
      return binary_logic(g, x);
    case GateOp::Forall:
    case GateOp::Exists:
      return quantify(g, x);
    case GateOp::Constant:
      return g.vec;
    case GateOp::IndHalfLine:
      return {b2d(x[0] >= g.a)};
    case GateOp::IndOpenHalfLine:
      return {b2d(x[0] < g.a)};
    case GateOp::IndClosed:
      return {b2d(g.a <= x[0] && x[0] <= g.b)};
    case GateOp::IndHalfOpen:
      return {b2d(g.a <= x[0] && x[0] < g.b)};
    case GateOp::IndHalfOpenComplement:
      return {b2d(!(g.a <= x[0] && x[0] < g.b))};
    case GateOp::PointIndicator:
      return {b2d(x == g.vec)};
    case GateOp::Floor:
      return {Dyadic(static_cast<long long>(oracle_floor(x[0])))};
    case GateOp::Mod2: {
      int64_t v = x[0].to_int();
      return {Dyadic(static_cast<long long>(((v % 2) + 2) % 2))};
    }
    case GateOp::LShift: {
      BitString a = bits_in(x, 0, B), r(B);
      for (size_t i = 0; i + 1 < B; ++i) r[i] = a[i + 1];
      return bits_out(r);
    }
    case GateOp::RShift: {
      BitString a = bits_in(x, 0, B), r(B);
      for (size_t i = 1; i < B; ++i) r[i] = a[i - 1];
      return bits_out(r);
    }
    case GateOp::BitAdd:
      return bits_out(bits_add(bits_in(x, 0, B), bits_in(x, B, B)));
    case GateOp::BitAddN: {
      BitString acc = bits_in(x, 0, B);
      for (int i = 1; i < g.n; ++i) acc = bits_add(acc, bits_in(x, static_cast<size_t>(i) * B, B));
      return bits_out(acc);
    }
    case GateOp::BitMult:
      return bits_out(bits_mult(bits_in(x, 0, B), bits_in(x, B, B)));
    case GateOp::Comp:
      return bits_out(bits_comp(bits_in(x, 0, B + 1)));
    case GateOp::Embed:
      return bits_out(bits_embed(bits_in(x, 0, B + 1)));
    case GateOp::IntToTwos:
      return bits_out(bits_int_to_twos(bits_in(x, 0, B + 1)));
    case GateOp::ExactAdd:
      return bits_out(bits_exact_add(bits_in(x, 0, B + 1), bits_in(x, B + 1, B + 1)));
    case GateOp::BitDecoder:
      return {bits_to_fx(bits_in(x, 0, x.size())).value()};
    case GateOp::BitEncoder:
      return bits_out(fx_to_bits(fx_from_value(x[0], g.q)));
    case GateOp::SignIntRem: {
      Dyadic m = abs(x[0]);
      Dyadic n(static_cast<long long>(m.floor()));
      return {n, m - n, b2d(x[0] >= Dyadic(0))};
    }
    case GateOp::RemainderBits:
      return bits_out(BitString::from_uint(static_cast<uint64_t>(x[0].ldexp(g.q).to_int()), static_cast<size_t>(g.q)));
    case GateOp::IntegerBits:
      return bits_out(BitString::from_uint(static_cast<uint64_t>(x[0].to_int()), static_cast<size_t>(g.q + 1)));
    case GateOp::ModAdd:
    case GateOp::ModMult:
      return modular(g, x);
    case GateOp::Min:
      return {oracle_min(x)};
    case GateOp::Max:
      return {oracle_max(x)};
    case GateOp::Median:
      return {oracle_median(x)};
    case GateOp::Majority:
      return {oracle_majority(x)};
    case GateOp::Identity:
      return x;
  }
  throw std::logic_error("gate_reference: unhandled op");
}

namespace {

std::string list_str(const std::vector<Dyadic>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += v[i].decimal();
  }
  return s + ")";
}

}  // namespace

std::string gate_to_string(const GateKind& g) {
  std::ostringstream os;
  os << gate_name(g.op);
  std::vector<std::string> kv;
  auto add = [&](const std::string& k, const std::string& v) { kv.push_back(k + "=" + v); };
  GateOp op = g.op;
  if (is_logic(op) || is_bitwise(op)) {
    add("B", std::to_string(g.B));
    if (op == GateOp::BitAddN) add("n", std::to_string(g.n));
  } else if (op == GateOp::Forall || op == GateOp::Exists) {
    add("B1", std::to_string(g.B1));
    add("inner", gate_to_string(*g.inner));
  } else if (op == GateOp::Constant) {
    add("c", list_str(g.vec));
    add("in", std::to_string(g.n));
  } else if (is_interval(op)) {
    add("a", g.a.decimal());
    if (two_endpoints(op)) add("b", g.b.decimal());
    add("q", std::to_string(g.q));
  } else if (op == GateOp::PointIndicator) {
    add("a", list_str(g.vec));
    add("q", std::to_string(g.q));
  } else if (op == GateOp::Floor || (is_codec(op) && op != GateOp::RemainderBits)) {
    add("M", std::to_string(g.M));
    add("q", std::to_string(g.q));
  } else if (op == GateOp::RemainderBits) {
    add("q", std::to_string(g.q));
  } else if (op == GateOp::ModAdd || op == GateOp::ModMult) {
    add("q", std::to_string(g.q));
    if (g.bits) add("bits", "1");
  } else if (is_tropical(op) || op == GateOp::Identity) {
    add("n", std::to_string(g.n));
  }
  if (!kv.empty()) {
    os << "[";
    for (size_t i = 0; i < kv.size(); ++i) os << (i ? "," : "") << kv[i];
    os << "]";
  }
  return os.str();
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

// split on commas that are not nested in brackets or parentheses
std::vector<std::string_view> split_top(std::string_view s) {
  std::vector<std::string_view> out;
  int depth = 0;
  size_t start = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    char c = s[i];
    if (c == '[' || c == '(') ++depth;
    else if (c == ']' || c == ')') --depth;
    else if (c == ',' && depth == 0) {
      out.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
    if (depth < 0) throw std::invalid_argument("unbalanced brackets in '" + std::string(s) + "'");
  }
  if (depth != 0) throw std::invalid_argument("unbalanced brackets in '" + std::string(s) + "'");
  out.push_back(trim(s.substr(start)));
  return out;
}

std::vector<Dyadic> parse_list(std::string_view s) {
  s = trim(s);
  if (s.size() < 2 || s.front() != '(' || s.back() != ')')
    throw std::invalid_argument("expected a parenthesised list, got '" + std::string(s) + "'");
  std::vector<Dyadic> v;
  for (auto item : split_top(s.substr(1, s.size() - 2))) v.push_back(Dyadic::parse(item));
  return v;
}

int parse_int(std::string_view key, std::string_view s) {
  try {
    size_t pos = 0;
    std::string str(s);
    int v = std::stoi(str, &pos);
    if (pos != str.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("parameter " + std::string(key) + ": expected integer, got '" + std::string(s) + "'");
  }
}

}  // namespace

GateKind parse_gate(std::string_view text) {
  text = trim(text);
  size_t open = text.find('[');
  std::string_view name = trim(text.substr(0, open));
  GateKind g;
  g.op = gate_op_from_name(name);
  std::map<std::string, std::string_view> kv;
  if (open != std::string_view::npos) {
    if (text.back() != ']') throw std::invalid_argument("missing ']' in '" + std::string(text) + "'");
    std::string_view body = text.substr(open + 1, text.size() - open - 2);
    if (!trim(body).empty()) {
      for (auto item : split_top(body)) {
        size_t eq = item.find('=');
        if (eq == std::string_view::npos) throw std::invalid_argument("expected key=value, got '" + std::string(item) + "'");
        std::string key(trim(item.substr(0, eq)));
        if (kv.count(key)) throw std::invalid_argument("duplicate parameter '" + key + "'");
        kv[key] = trim(item.substr(eq + 1));
      }
    }
  }
  auto take = [&](const std::string& k) -> std::optional<std::string_view> {
    auto it = kv.find(k);
    if (it == kv.end()) return std::nullopt;
    std::string_view v = it->second;
    kv.erase(it);
    return v;
  };
  auto req = [&](const std::string& k) {
    auto v = take(k);
    if (!v) throw std::invalid_argument(std::string(gate_name(g.op)) + ": missing parameter '" + k + "'");
    return *v;
  };
  GateOp op = g.op;
  if (is_logic(op) || is_bitwise(op)) {
    g.B = parse_int("B", req("B"));
    if (op == GateOp::BitAddN) g.n = parse_int("n", req("n"));
  } else if (op == GateOp::Forall || op == GateOp::Exists) {
    g.B1 = parse_int("B1", req("B1"));
    g.inner = std::make_shared<const GateKind>(parse_gate(req("inner")));
  } else if (op == GateOp::Constant) {
    g.vec = parse_list(req("c"));
    auto in = take("in");
    g.n = in ? parse_int("in", *in) : 1;
  } else if (is_interval(op)) {
    g.a = Dyadic::parse(req("a"));
    if (two_endpoints(op)) g.b = Dyadic::parse(req("b"));
    g.q = parse_int("q", req("q"));
  } else if (op == GateOp::PointIndicator) {
    g.vec = parse_list(req("a"));
    g.q = parse_int("q", req("q"));
  } else if (op == GateOp::RemainderBits) {
    g.q = parse_int("q", req("q"));
  } else if (op == GateOp::Floor) {
    g.M = parse_int("M", req("M"));
    g.q = parse_int("q", req("q"));
  } else if (is_codec(op)) {
    g.q = parse_int("q", req("q"));
    check_precision(g.q);
    auto m = take("M");
    g.M = m ? parse_int("M", *m) : default_codec_m(op, g.q);
  } else if (op == GateOp::ModAdd || op == GateOp::ModMult) {
    g.q = parse_int("q", req("q"));
    auto b = take("bits");
    g.bits = b ? parse_int("bits", *b) != 0 : false;
  } else if (is_tropical(op) || op == GateOp::Identity) {
    g.n = parse_int("n", req("n"));
  }
  if (!kv.empty()) throw std::invalid_argument(std::string(gate_name(g.op)) + ": unknown parameter '" + kv.begin()->first + "'");
  validate_gate(g);
  return g;
}

}  // namespace circnet
