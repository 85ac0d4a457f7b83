#include <gtest/gtest.h>

#include <algorithm>
#include <functional>

#include "circnet/compiler.hpp"
#include "circnet/fixnum.hpp"
#include "circnet/gatelib.hpp"

using namespace circnet;

namespace {

using Vals = std::vector<Dyadic>;
using Oracle = std::function<Vals(const Vals&)>;

Vals run(const Net& n, const Vals& x) { return from_vec(n.evaluate(to_vec(x))); }

uint64_t uint_of(const Vals& x, size_t from, size_t len) {
  uint64_t v = 0;
  for (size_t i = 0; i < len; ++i) v = 2 * v + static_cast<uint64_t>(x[from + i].to_int());
  return v;
}

Vals bits(uint64_t v, size_t len) {
  Vals r(len);
  for (size_t i = 0; i < len; ++i) r[i] = Dyadic(int((v >> (len - 1 - i)) & 1));
  return r;
}

Vals cat(Vals a, const Vals& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

// two's-complement reading of a len-bit pattern
int64_t signed_of(uint64_t v, size_t len) {
  return v >= (uint64_t(1) << (len - 1)) ? int64_t(v) - (int64_t(1) << len) : int64_t(v);
}

uint64_t wrap(int64_t v, size_t len) {
  int64_t m = int64_t(1) << len;
  return static_cast<uint64_t>(((v % m) + m) % m);
}

// exhaustive sweep of the gate's own input domain against an oracle
void sweep(const GateKind& g, const Oracle& want) {
  Net n = gate_network(g);
  auto dom = input_domain(g);
  uint64_t size = domain_size(dom);
  ASSERT_LE(size, uint64_t(1) << 20) << gate_to_string(g);
  for (uint64_t i = 0; i < size; ++i) {
    Vals x = domain_point(dom, i);
    ASSERT_EQ(run(n, x), want(x)) << gate_to_string(g) << " at point " << i;
  }
}

// sweep over a value set of my choosing for gates on all of R
void sweep_values(const GateKind& g, const Vals& values, const Oracle& want) {
  Net n = gate_network(g);
  int k = input_arity(g);
  std::vector<ValueSet> dom;
  for (int i = 0; i < k; ++i) dom.push_back(ValueSet::lattice(0, Dyadic(0), Dyadic(int(values.size()) - 1)));
  for (uint64_t i = 0; i < domain_size(dom); ++i) {
    Vals idx = domain_point(dom, i), x;
    for (const auto& v : idx) x.push_back(values[static_cast<size_t>(v.to_int())]);
    ASSERT_EQ(run(n, x), want(x)) << gate_to_string(g);
  }
}

Oracle logic_oracle(GateOp op, int B) {
  return [op, B](const Vals& x) {
    Vals out;
    for (int i = 0; i < B; ++i) {
      int a = int(x[i].to_int()), b = op == GateOp::Not ? 0 : int(x[B + i].to_int());
      int r = 0;
      switch (op) {
        case GateOp::Not: r = 1 - a; break;
        case GateOp::And: r = a & b; break;
        case GateOp::Or: r = a | b; break;
        case GateOp::Xor: r = a ^ b; break;
        case GateOp::Nand: r = 1 - (a & b); break;
        case GateOp::Imply: case GateOp::Leq: r = a <= b; break;
        case GateOp::Geq: r = a >= b; break;
        case GateOp::Equal: r = a == b; break;
        default: break;
      }
      out.push_back(Dyadic(r));
    }
    return out;
  };
}

Dyadic grid_value(const Vals& x, size_t from, int q) {
  uint64_t mag = uint_of(x, from, static_cast<size_t>(2 * q + 1));
  Dyadic v = Dyadic::from_parts(static_cast<int64_t>(mag), q);
  return x[from + 2 * q + 1] == Dyadic(1) ? -v : v;
}

Vals grid_bits(const Dyadic& v, int q) {
  return cat(bits(static_cast<uint64_t>(abs(v).ldexp(q).to_int()), static_cast<size_t>(2 * q + 1)),
             {Dyadic(v.sign() < 0 ? 1 : 0)});
}

Dyadic add_oracle(const Dyadic& a, const Dyadic& b, int q) {
  int64_t m = int64_t(1) << (2 * q + 2);
  int64_t s = wrap(a.ldexp(q).to_int() + b.ldexp(q).to_int(), static_cast<size_t>(2 * q + 2));
  if (s >= m / 2) s -= m;
  if (s == -m / 2) s = 0;
  return Dyadic::from_parts(s, q);
}

Dyadic mult_oracle(const Dyadic& a, const Dyadic& b, int q) {
  uint64_t p = static_cast<uint64_t>(abs(a).ldexp(q).to_int() * abs(b).ldexp(q).to_int());
  int64_t r = static_cast<int64_t>(((p + (uint64_t(1) << (q - 1))) >> q) % (uint64_t(1) << (2 * q + 1)));
  return Dyadic::from_parts((a.sign() < 0) != (b.sign() < 0) ? -r : r, q);
}

}  // namespace

TEST(GateLogic, Examples) {
  Net x = gate_network(GateKind::logic(GateOp::Xor, 1));
  EXPECT_EQ(run(x, {1, 1}), Vals{0});
  EXPECT_EQ(run(x, {1, 0}), Vals{1});
  EXPECT_EQ(run(x, {0, 0}), Vals{0});
  for (int B = 1; B <= 4; ++B) {
    Net eq = gate_network(GateKind::logic(GateOp::Equal, B));
    for (uint64_t a = 0; a < (uint64_t(1) << B); ++a)
      EXPECT_EQ(run(eq, cat(bits(a, B), bits(a, B))), Vals(B, Dyadic(1)));
  }
}

TEST(GateLogic, ExhaustiveUpToSixBits) {
  for (GateOp op : {GateOp::Not, GateOp::And, GateOp::Or, GateOp::Xor, GateOp::Nand, GateOp::Imply, GateOp::Equal,
                    GateOp::Leq, GateOp::Geq})
    for (int B = 1; B <= 6; ++B) sweep(GateKind::logic(op, B), logic_oracle(op, B));
}

TEST(GateLogic, AlgebraOnEmulators) {
  for (int B = 1; B <= 4; ++B) {
    Net nt = gate_network(GateKind::logic(GateOp::Not, B));
    Net nn = compose(nt, nt, true);
    Net nand = gate_network(GateKind::logic(GateOp::Nand, B));
    // not a or not b, built from emulators
    Net demorgan = compose(parallelize<Dyadic>({nt, nt}), gate_network(GateKind::logic(GateOp::Or, B)));
    for (uint64_t a = 0; a < (uint64_t(1) << B); ++a) {
      EXPECT_EQ(run(nn, bits(a, B)), bits(a, B));
      for (uint64_t b = 0; b < (uint64_t(1) << B); ++b) {
        Vals x = cat(bits(a, B), bits(b, B));
        EXPECT_EQ(run(nand, x), bits(~(a & b) & ((uint64_t(1) << B) - 1), B));
        EXPECT_EQ(run(demorgan, x), run(nand, x));
      }
    }
  }
}

TEST(GateQuantifier, Forall) {
  // forall x: x AND y is false for every y
  Net f = gate_network(GateKind::forall(GateKind::logic(GateOp::And, 1), 1));
  EXPECT_EQ(run(f, {1}), Vals{0});
  EXPECT_EQ(run(f, {0}), Vals{0});
  // forall x: x OR y equals y
  Net g = gate_network(GateKind::forall(GateKind::logic(GateOp::Or, 1), 1));
  EXPECT_EQ(run(g, {1}), Vals{1});
  EXPECT_EQ(run(g, {0}), Vals{0});
  // x IMPLY y holds for every x only when y = 1
  Net h = gate_network(GateKind::forall(GateKind::logic(GateOp::Imply, 1), 1));
  EXPECT_EQ(run(h, {1}), Vals{1});
  EXPECT_EQ(run(h, {0}), Vals{0});
}

TEST(GateQuantifier, BruteForce) {
  std::vector<GateKind> inners;
  for (GateOp op : {GateOp::And, GateOp::Or, GateOp::Xor, GateOp::Equal, GateOp::Imply, GateOp::Nand})
    inners.push_back(GateKind::logic(op, 1));
  inners.push_back(GateKind::tropical(GateOp::Majority, 3));
  inners.push_back(GateKind::tropical(GateOp::Majority, 4));
  for (const auto& inner : inners)
    for (int B1 = 1; B1 < input_arity(inner); ++B1)
      for (bool exists : {false, true}) {
        GateKind g = GateKind::forall(inner, B1, exists);
        sweep(g, [&](const Vals& y) {
          bool acc = !exists;
          for (uint64_t v = 0; v < (uint64_t(1) << B1); ++v) {
            Vals x = cat(bits(v, static_cast<size_t>(B1)), y);
            int s = 0;
            for (const auto& b : x) s += int(b.to_int());
            bool holds;
            if (inner.op == GateOp::Majority) holds = 2 * s >= inner.n;
            else holds = logic_oracle(inner.op, 1)(x)[0] == Dyadic(1);
            acc = exists ? (acc || holds) : (acc && holds);
          }
          return Vals{Dyadic(acc ? 1 : 0)};
        });
      }
}

TEST(GateAnalytic, Indicators) {
  int q = 2;
  Net ge0 = gate_network(GateKind::indicator(GateOp::IndHalfLine, Dyadic(0), Dyadic(0), q));
  EXPECT_EQ(run(ge0, {0}), Vals{1});
  EXPECT_EQ(run(ge0, {-Dyadic::pow2(-q)}), Vals{0});
  for (int qq = 1; qq <= 3; ++qq)
    for (const auto& a : enumerate_grid(qq)) {
      if ((a.mantissa() + 7) % 5 != 0) continue;  // a spread of thresholds
      Dyadic b = min(a + Dyadic(1), grid_max(qq));
      sweep(GateKind::indicator(GateOp::IndHalfLine, a, a, qq), [&](const Vals& x) { return Vals{Dyadic(x[0] >= a)}; });
      sweep(GateKind::indicator(GateOp::IndOpenHalfLine, a, a, qq), [&](const Vals& x) { return Vals{Dyadic(x[0] < a)}; });
      sweep(GateKind::indicator(GateOp::IndClosed, a, b, qq),
            [&](const Vals& x) { return Vals{Dyadic(a <= x[0] && x[0] <= b)}; });
      sweep(GateKind::indicator(GateOp::IndHalfOpen, a, b, qq),
            [&](const Vals& x) { return Vals{Dyadic(a <= x[0] && x[0] < b)}; });
      sweep(GateKind::indicator(GateOp::IndHalfOpenComplement, a, b, qq),
            [&](const Vals& x) { return Vals{Dyadic(!(a <= x[0] && x[0] < b))}; });
    }
}

TEST(GateAnalytic, PointIndicator) {
  Vals a{Dyadic::parse("0.5"), Dyadic(-1)};
  GateKind g = GateKind::point(a, 1);
  Net n = gate_network(g);
  auto dom = input_domain(g);
  uint64_t ones = 0;
  for (uint64_t i = 0; i < domain_size(dom); ++i) {
    Vals y = run(n, domain_point(dom, i));
    ASSERT_TRUE(y[0] == Dyadic(0) || y[0] == Dyadic(1));
    ones += y[0] == Dyadic(1);
  }
  EXPECT_EQ(ones, 1u);
  EXPECT_EQ(run(n, a), Vals{1});
  for (int q = 1; q <= 3; ++q) {
    Vals p{grid_max(q) - Dyadic(1)};
    sweep(GateKind::point(p, q), [&](const Vals& x) { return Vals{Dyadic(x == p)}; });
  }
  Vals p2{Dyadic::parse("-1.5"), Dyadic::parse("0.75")};
  sweep(GateKind::point(p2, 2), [&](const Vals& x) { return Vals{Dyadic(x == p2)}; });
}

TEST(GateAnalytic, FloorAndMod2) {
  Net f = gate_network(GateKind::floor(2, 2));
  EXPECT_EQ(run(f, {Dyadic::parse("1.75")}), Vals{1});
  EXPECT_EQ(run(f, {Dyadic::parse("-0.25")}), Vals{-1});
  EXPECT_EQ(run(f, {2}), Vals{2});
  for (int q = 1; q <= 3; ++q)
    for (int M = 1; M <= 4; ++M)
      sweep(GateKind::floor(M, q), [](const Vals& x) { return Vals{Dyadic(static_cast<long long>(x[0].floor()))}; });
  Net m = gate_network(GateKind::mod2());
  Vals want{0, 1, 0, 1, 0};
  for (int v = -2; v <= 2; ++v) EXPECT_EQ(run(m, {v}), Vals{want[v + 2]});
}

TEST(GateAnalytic, Constant) {
  Vals c{Dyadic::parse("1.5"), Dyadic(-2)};
  Net n = gate_network(GateKind::constant(c, 2));
  EXPECT_EQ(run(n, {0, 1}), c);
  EXPECT_EQ(run(n, {7, -3}), c);
}

TEST(GateBitwise, WorkedExample) {
  Net add = gate_network(GateKind::bitwise(GateOp::BitAdd, 4));
  EXPECT_EQ(run(add, cat(bits(0b0001, 4), bits(0b0111, 4))), bits(0b1000, 4));
  Net ls = gate_network(GateKind::bitwise(GateOp::LShift, 4));
  EXPECT_EQ(run(ls, bits(0b0001, 4)), bits(0b0010, 4));
}

TEST(GateBitwise, Shifts) {
  for (int B = 1; B <= 6; ++B) {
    size_t b = static_cast<size_t>(B);
    uint64_t mask = (uint64_t(1) << B) - 1;
    sweep(GateKind::bitwise(GateOp::LShift, B), [&](const Vals& x) { return bits((uint_of(x, 0, b) << 1) & mask, b); });
    sweep(GateKind::bitwise(GateOp::RShift, B), [&](const Vals& x) { return bits(uint_of(x, 0, b) >> 1, b); });
    Net rl = compose(gate_network(GateKind::bitwise(GateOp::LShift, B)), gate_network(GateKind::bitwise(GateOp::RShift, B)), true);
    for (uint64_t v = 0; v <= mask; ++v) EXPECT_EQ(run(rl, bits(v, b)), bits(v & (mask >> 1), b));
  }
}

TEST(GateBitwise, AddMult) {
  for (int B = 1; B <= 5; ++B) {
    size_t b = static_cast<size_t>(B);
    uint64_t m = uint64_t(1) << B;
    sweep(GateKind::bitwise(GateOp::BitAdd, B),
          [&](const Vals& x) { return bits((uint_of(x, 0, b) + uint_of(x, b, b)) % m, b); });
    sweep(GateKind::bitwise(GateOp::BitMult, B),
          [&](const Vals& x) { return bits((uint_of(x, 0, b) * uint_of(x, b, b)) % m, b); });
  }
  Net add6 = gate_network(GateKind::bitwise(GateOp::BitAdd, 6));
  for (uint64_t a = 0; a < 64; ++a) EXPECT_EQ(run(add6, cat(bits(a, 6), bits(0, 6))), bits(a, 6));
  for (auto [B, n] : std::vector<std::pair<int, int>>{{2, 2}, {2, 3}, {3, 3}, {2, 4}, {1, 5}}) {
    size_t b = static_cast<size_t>(B);
    sweep(GateKind::add_n(B, n), [&](const Vals& x) {
      uint64_t s = 0;
      for (int i = 0; i < n; ++i) s += uint_of(x, i * b, b);
      return bits(s % (uint64_t(1) << B), b);
    });
  }
}

TEST(GateBitwise, TwosComplementFamily) {
  for (int B = 1; B <= 5; ++B) {
    size_t w = static_cast<size_t>(B + 1);
    sweep(GateKind::bitwise(GateOp::Comp, B), [&](const Vals& x) { return bits(wrap(-int64_t(uint_of(x, 0, w)), w), w); });
    sweep(GateKind::bitwise(GateOp::Embed, B), [&](const Vals& x) { return cat({x[0]}, x); });
    sweep(GateKind::bitwise(GateOp::IntToTwos, B), [&](const Vals& x) {
      int64_t mag = static_cast<int64_t>(uint_of(x, 1, w - 1));
      return bits(wrap(x[0] == Dyadic(1) ? -mag : mag, w), w);
    });
    sweep(GateKind::bitwise(GateOp::ExactAdd, B), [&](const Vals& x) {
      int64_t s = signed_of(uint_of(x, 0, w), w) + signed_of(uint_of(x, w, w), w);
      return bits(wrap(s, w + 1), w + 1);
    });
  }
}

TEST(GateBitwise, CompThenAddIsZero) {
  for (int B = 1; B <= 5; ++B) {
    size_t w = static_cast<size_t>(B + 1);
    Net comp = gate_network(GateKind::bitwise(GateOp::Comp, B));
    Net add = gate_network(GateKind::bitwise(GateOp::BitAdd, B + 1));
    Net both = compose(parallelize<Dyadic>({identity_net<Dyadic>(static_cast<Index>(w)), comp}, InputMode::Shared), add, true);
    for (uint64_t a = 0; a < (uint64_t(1) << w); ++a) EXPECT_EQ(run(both, bits(a, w)), Vals(w, Dyadic(0)));
  }
}

TEST(GateBitwise, IntConversionInvolution) {
  for (int B = 1; B <= 5; ++B) {
    size_t w = static_cast<size_t>(B + 1);
    Net c = gate_network(GateKind::bitwise(GateOp::IntToTwos, B));
    Net cc = compose(c, c, true);
    for (uint64_t a = 0; a < (uint64_t(1) << w); ++a) {
      // 10..0 is the negative zero of sign-magnitude; it collapses to 0..0
      Vals want = a == (uint64_t(1) << B) ? Vals(w, Dyadic(0)) : bits(a, w);
      EXPECT_EQ(run(cc, bits(a, w)), want);
    }
  }
}

TEST(GateBitwise, ExactAdderNoWrap) {
  for (int B = 1; B <= 5; ++B) {
    size_t w = static_cast<size_t>(B + 1);
    Net n = gate_network(GateKind::bitwise(GateOp::ExactAdd, B));
    uint64_t top = (uint64_t(1) << B) - 1;  // 0 1..1
    EXPECT_EQ(run(n, cat(bits(top, w), bits(1, w))), bits(uint64_t(1) << B, w + 1));
  }
}

TEST(GateCodec, DecoderEncoder) {
  for (int q = 1; q <= 3; ++q) {
    sweep(GateKind::codec(GateOp::BitEncoder, q), [&](const Vals& x) { return grid_bits(x[0], q); });
    Net dec = gate_network(GateKind::codec(GateOp::BitDecoder, q));
    for (const auto& a : enumerate_codes(q)) EXPECT_EQ(run(dec, fx_to_bits(a).to_values()), Vals{a.value()});
    sweep(GateKind::codec(GateOp::BitDecoder, q), [&](const Vals& x) { return Vals{grid_value(x, 0, q)}; });
  }
}

TEST(GateCodec, SubBuilders) {
  Net sir = gate_network(GateKind::codec(GateOp::SignIntRem, 2));
  EXPECT_EQ(run(sir, {Dyadic::parse("-1.75")}), (Vals{1, Dyadic::parse("0.75"), 0}));
  Net rb = gate_network(GateKind::codec(GateOp::RemainderBits, 2));
  EXPECT_EQ(run(rb, {Dyadic::parse("0.75")}), (Vals{1, 1}));
  for (int q = 1; q <= 3; ++q) {
    sweep(GateKind::codec(GateOp::SignIntRem, q), [](const Vals& x) {
      Dyadic m = abs(x[0]);
      Dyadic n(static_cast<long long>(m.floor()));
      return Vals{n, m - n, Dyadic(x[0].sign() >= 0)};
    });
    sweep(GateKind::codec(GateOp::RemainderBits, q),
          [&](const Vals& x) { return bits(static_cast<uint64_t>(x[0].ldexp(q).to_int()), static_cast<size_t>(q)); });
    sweep(GateKind::codec(GateOp::IntegerBits, q),
          [&](const Vals& x) { return bits(static_cast<uint64_t>(x[0].to_int()), static_cast<size_t>(q + 1)); });
  }
}

TEST(GateModular, GridPortsAllPairs) {
  for (int q = 1; q <= 2; ++q) {
    sweep(GateKind::modular(GateOp::ModAdd, q), [&](const Vals& x) { return Vals{add_oracle(x[0], x[1], q)}; });
    sweep(GateKind::modular(GateOp::ModMult, q), [&](const Vals& x) { return Vals{mult_oracle(x[0], x[1], q)}; });
  }
}

// bit ports may emit either zero pattern; compare decoded values
TEST(GateModular, BitPortsAllCodePairs) {
  int q = 1;
  size_t w = static_cast<size_t>(2 * q + 2);
  for (GateOp op : {GateOp::ModAdd, GateOp::ModMult}) {
    GateKind g = GateKind::modular(op, q, true);
    Net n = gate_network(g);
    auto dom = input_domain(g);
    for (uint64_t i = 0; i < domain_size(dom); ++i) {
      Vals x = domain_point(dom, i);
      Dyadic a = grid_value(x, 0, q), b = grid_value(x, w, q);
      Dyadic want = op == GateOp::ModAdd ? add_oracle(a, b, q) : mult_oracle(a, b, q);
      Vals y = run(n, x);
      ASSERT_EQ(y, gate_reference(g, x));
      ASSERT_EQ(grid_value(y, 0, q), want) << gate_to_string(g) << " at " << i;
    }
  }
}

TEST(GateModular, TimesZero) {
  Net n = gate_network(GateKind::modular(GateOp::ModMult, 2));
  for (const auto& x : enumerate_grid(2)) EXPECT_EQ(run(n, {x, 0}), Vals{0});
}

TEST(GateModular, LoweredPiecesCompose) {
  for (GateOp op : {GateOp::ModAdd, GateOp::ModMult}) {
    GateKind g = GateKind::modular(op, 1);
    LoweredGate lg = lower_gate(g);
    ASSERT_TRUE(lg.pre && lg.post);
    Net whole = compose(compose(*lg.pre, lg.core, true), *lg.post, true);
    Net direct = gate_network(g);
    for (const auto& a : enumerate_grid(1))
      for (const auto& b : enumerate_grid(1)) EXPECT_EQ(run(whole, {a, b}), run(direct, {a, b}));
  }
  EXPECT_FALSE(lower_gate(GateKind::logic(GateOp::And, 1)).pre);
}

TEST(GateTropical, Examples) {
  EXPECT_EQ(run(gate_network(GateKind::tropical(GateOp::Min, 3)), {3, 1, 2}), Vals{1});
  EXPECT_EQ(run(gate_network(GateKind::tropical(GateOp::Max, 3)), {3, 1, 2}), Vals{3});
  sweep_values(GateKind::tropical(GateOp::Median, 5), {0, 1, 2}, [](Vals x) {
    std::sort(x.begin(), x.end());
    return Vals{x[2]};
  });
  sweep(GateKind::tropical(GateOp::Majority, 5), [](const Vals& x) {
    int s = 0;
    for (const auto& v : x) s += int(v.to_int());
    return Vals{Dyadic(2 * s >= 5)};
  });
}

TEST(GateTropical, UpToSeven) {
  Vals values{Dyadic(-2), Dyadic::parse("-0.5"), Dyadic(0), Dyadic::parse("1.25"), Dyadic(3)};
  for (int n = 2; n <= 7; ++n) {
    Vals vs = n <= 5 ? values : Vals{Dyadic(-1), Dyadic(0), Dyadic::parse("2.5")};
    sweep_values(GateKind::tropical(GateOp::Min, n), vs,
                 [](const Vals& x) { return Vals{*std::min_element(x.begin(), x.end())}; });
    sweep_values(GateKind::tropical(GateOp::Max, n), vs,
                 [](const Vals& x) { return Vals{*std::max_element(x.begin(), x.end())}; });
    if (n % 2 == 1)
      sweep_values(GateKind::tropical(GateOp::Median, n), vs, [n](Vals x) {
        std::sort(x.begin(), x.end());
        return Vals{x[static_cast<size_t>(n / 2)]};
      });
    sweep(GateKind::tropical(GateOp::Majority, n), [n](const Vals& x) {
      int s = 0;
      for (const auto& v : x) s += int(v.to_int());
      return Vals{Dyadic(2 * s >= n)};
    });
  }
}

TEST(GateIdentity, PassesThrough) {
  sweep_values(GateKind::identity(3), {Dyadic(-3), Dyadic::parse("0.25"), Dyadic(7)}, [](const Vals& x) { return x; });
}

TEST(Gatelib, BuildReportsMeasuredStats) {
  GateEmulator e = build_gate(parse_gate("XOR[B=2]"));
  EXPECT_EQ(e.report.depth, e.net.depth());
  EXPECT_EQ(e.report.width, e.net.width());
  EXPECT_EQ(e.report.nonzero_params, e.net.nonzeros());
  EXPECT_TRUE(e.report.bound_params.has_value());
  EXPECT_TRUE(e.report.within_bounds());
  EXPECT_EQ(e.evaluate({1, 0, 1, 1}), (Vals{0, 1}));
}

TEST(Gatelib, ParameterValidation) {
  EXPECT_THROW(GateKind::logic(GateOp::And, 0), std::invalid_argument);
  EXPECT_THROW(GateKind::tropical(GateOp::Median, 4), std::invalid_argument);
  EXPECT_THROW(GateKind::tropical(GateOp::Majority, 1), std::invalid_argument);
  EXPECT_THROW(GateKind::indicator(GateOp::IndClosed, Dyadic(1), Dyadic(0), 1), std::invalid_argument);
  EXPECT_THROW(GateKind::point({Dyadic::parse("0.25")}, 1), std::invalid_argument);
  EXPECT_THROW(parse_gate("FROB[B=1]"), std::invalid_argument);
  EXPECT_THROW(gate_reference(GateKind::logic(GateOp::And, 1), {2, 0}), DomainFault);
}

TEST(Gatelib, GateTextRoundTrip) {
  for (const char* s : {"AND[B=2]", "FORALL[B1=1,inner=OR[B=1]]", "CONST[c=(1,0.5),in=1]", "MOD_ADD[q=2]",
                        "POINT[a=(0.5,-1),q=1]", "MEDIAN[n=5]"}) {
    GateKind g = parse_gate(s);
    EXPECT_EQ(parse_gate(gate_to_string(g)), g) << s;
  }
}
