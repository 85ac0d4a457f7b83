#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "circnet/ffnn.hpp"
#include "circnet/gatelib.hpp"
#include "circnet/netio.hpp"
#include "circnet/relunet.hpp"

using namespace circnet;

namespace {

std::vector<Dyadic> bits_of(uint64_t v, int B) {
  std::vector<Dyadic> x(B);
  for (int i = 0; i < B; ++i) x[i] = Dyadic(int((v >> (B - 1 - i)) & 1));
  return x;
}

std::vector<Dyadic> run(const Net& n, const std::vector<Dyadic>& x) { return from_vec(n.evaluate(to_vec(x))); }

Dyadic random_dyadic(std::mt19937_64& rng) {
  std::uniform_int_distribution<int64_t> m(-5000, 5000);
  std::uniform_int_distribution<int> e(0, 10);
  return Dyadic::from_parts(m(rng), e(rng));
}

// small entries keep products of several layers inside int64
Dyadic small_dyadic(std::mt19937_64& rng) {
  std::uniform_int_distribution<int64_t> m(-8, 8);
  std::uniform_int_distribution<int> e(0, 3);
  return Dyadic::from_parts(m(rng), e(rng));
}

Net random_net(std::mt19937_64& rng, int in, int depth, int width, int out) {
  std::vector<AffineLayer<Dyadic>> layers;
  int w_in = in;
  for (int l = 0; l <= depth; ++l) {
    int w_out = l == depth ? out : width;
    MatrixX<Dyadic> w(w_out, w_in);
    Vec b(w_out);
    for (int i = 0; i < w_out; ++i) {
      b[i] = small_dyadic(rng);
      for (int j = 0; j < w_in; ++j) w(i, j) = rng() % 3 == 0 ? Dyadic(0) : small_dyadic(rng);
    }
    layers.push_back(AffineLayer<Dyadic>::from_dense(w, b));
    w_in = w_out;
  }
  return Net(layers);
}

}  // namespace

TEST(Relunet, IdentityNet) {
  Net id = identity_net<Dyadic>(3);
  for (auto x : std::vector<std::vector<Dyadic>>{{0, 0, 0}, {1, 2, Dyadic::parse("0.5")}, {-1, -7, Dyadic::parse("-2.25")}})
    EXPECT_EQ(run(id, x), x);
  EXPECT_EQ(id.depth(), 1);
  EXPECT_EQ(id.width(), 6);
  EXPECT_EQ(id.nonzeros(), 12);
}

TEST(Relunet, SingleLayer) {
  MatrixX<Dyadic> w(1, 2);
  w << Dyadic(1), Dyadic(1);
  Net n = linear_net<Dyadic>(w, Vec::Zero(1));
  EXPECT_EQ(run(n, {2, 3}), std::vector<Dyadic>{5});
  EXPECT_EQ(n.depth(), 0);
}

TEST(Relunet, NotGateNet) {
  Net n = gate_network(GateKind::logic(GateOp::Not, 3));
  EXPECT_EQ(run(n, {1, 0, 1}), (std::vector<Dyadic>{0, 1, 0}));
}

TEST(Relunet, ComposeIdentities) {
  std::mt19937_64 rng(11);
  Net f = random_net(rng, 3, 2, 4, 2);
  Net id3 = identity_net<Dyadic>(3);
  for (int i = 0; i < 50; ++i) {
    std::vector<Dyadic> x{random_dyadic(rng), random_dyadic(rng), random_dyadic(rng)};
    EXPECT_EQ(run(compose(id3, f), x), run(f, x));
    EXPECT_EQ(run(compose(id3, f, true), x), run(f, x));
  }
  Net nt = gate_network(GateKind::logic(GateOp::Not, 4));
  for (bool fuse : {false, true}) {
    Net nn = compose(nt, nt, fuse);
    for (uint64_t v = 0; v < 16; ++v) EXPECT_EQ(run(nn, bits_of(v, 4)), bits_of(v, 4));
  }
}

TEST(Relunet, ComposeSemanticsAndDepth) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 20; ++t) {
    int df = 1 + rng() % 3, dg = 1 + rng() % 3;
    Net f = random_net(rng, 2, df, 3, 3);
    Net g = random_net(rng, 3, dg, 2, 2);
    Net c = compose(f, g);
    Net cf = compose(f, g, true);
    EXPECT_EQ(c.depth(), df + dg + 1);
    EXPECT_EQ(cf.depth(), df + dg);
    for (int i = 0; i < 20; ++i) {
      std::vector<Dyadic> x{random_dyadic(rng), random_dyadic(rng)};
      auto want = run(g, run(f, x));
      EXPECT_EQ(run(c, x), want);
      EXPECT_EQ(run(cf, x), want);
    }
  }
}

TEST(Relunet, Parallelize) {
  Net a = gate_network(GateKind::logic(GateOp::And, 1));
  Net o = gate_network(GateKind::logic(GateOp::Or, 1));
  EXPECT_EQ(run(parallelize<Dyadic>({a, o}), {1, 0, 1, 0}), (std::vector<Dyadic>{0, 1}));
  std::mt19937_64 rng(9);
  Net f = random_net(rng, 2, 2, 3, 1);
  for (int i = 0; i < 10; ++i) {
    std::vector<Dyadic> x{random_dyadic(rng), random_dyadic(rng)};
    EXPECT_EQ(run(parallelize<Dyadic>({f}), x), run(f, x));
  }
}

TEST(Relunet, ParallelizeSlicesAndBounds) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 20; ++t) {
    std::vector<Net> nets;
    int k = 2 + rng() % 3;
    for (int i = 0; i < k; ++i) nets.push_back(random_net(rng, 1 + rng() % 2, rng() % 4, 1 + rng() % 3, 1 + rng() % 2));
    Net p = parallelize(nets);
    long wsum = 0;
    int dmax = 0;
    for (const auto& n : nets) {
      wsum += std::max<long>(n.width(), n.out_width());
      dmax = std::max(dmax, n.depth());
    }
    EXPECT_EQ(p.depth(), dmax);
    EXPECT_LE(p.width(), 2 * wsum);
    std::vector<Dyadic> x, want;
    for (const auto& n : nets) {
      std::vector<Dyadic> xi;
      for (Index j = 0; j < n.in_width(); ++j) xi.push_back(random_dyadic(rng));
      auto yi = run(n, xi);
      x.insert(x.end(), xi.begin(), xi.end());
      want.insert(want.end(), yi.begin(), yi.end());
    }
    EXPECT_EQ(run(p, x), want);
  }
}

TEST(Relunet, SharedInput) {
  Net a = gate_network(GateKind::logic(GateOp::And, 1));
  Net x = gate_network(GateKind::logic(GateOp::Xor, 1));
  Net p = parallelize<Dyadic>({a, x}, InputMode::Shared);
  EXPECT_EQ(p.in_width(), 2);
  for (uint64_t v = 0; v < 4; ++v) {
    auto in = bits_of(v, 2);
    auto want = run(a, in);
    auto wx = run(x, in);
    want.insert(want.end(), wx.begin(), wx.end());
    EXPECT_EQ(run(p, in), want);
  }
}

TEST(Relunet, SpecialMatrices) {
  using M = MatrixX<Dyadic>;
  const Index B = 4;
  Vec a = Vec::Constant(B, Dyadic(1));
  Vec ab(2 * B);
  ab << a, a;
  EXPECT_EQ(Vec(special_matrix<Dyadic>(SpecialMatrix::A2B, B) * ab), Vec::Constant(B, Dyadic(2)));
  EXPECT_EQ(Vec(special_matrix<Dyadic>(SpecialMatrix::A2BMinus, B) * ab), Vec::Zero(B));
  Vec u = to_vec({1, 2, 3, 4}), w = to_vec({5, 6, 7, 8});
  Vec uw(2 * B), wu(2 * B);
  uw << u, w;
  wu << w, u;
  EXPECT_EQ(Vec(special_matrix<Dyadic>(SpecialMatrix::Pi2B, B) * uw), wu);
  // (b3, b2, b1, b0) = 0011 -> 0110
  EXPECT_EQ(Vec(special_matrix<Dyadic>(SpecialMatrix::LShift, B) * to_vec({0, 0, 1, 1})), to_vec({0, 1, 1, 0}));
  EXPECT_EQ(Vec(special_matrix<Dyadic>(SpecialMatrix::RShift, B) * to_vec({1, 1, 0, 0})), to_vec({0, 1, 1, 0}));
  EXPECT_EQ(M(special_matrix<Dyadic>(SpecialMatrix::Ones, 3)), M::Constant(3, 1, Dyadic(1)));
}

TEST(Netio, RoundTrip) {
  for (const char* g : {"XOR[B=2]", "ADD[B=3]", "MOD_ADD[q=1]"}) {
    Net n = gate_network(parse_gate(g));
    std::string text = serialize_net(n);
    Net back = deserialize_net(text);
    EXPECT_EQ(back, n) << g;
    EXPECT_EQ(serialize_net(back), text);
  }
  EXPECT_THROW(deserialize_net("{\"format_version\": 9, \"kind\": \"mlp\"}"), std::exception);
}

TEST(Netio, ExactEntries) {
  MatrixX<Dyadic> w(1, 1);
  w << Dyadic::parse("-3/2^5");
  Vec b(1);
  b << Dyadic::parse("1.5");
  Net n = linear_net<Dyadic>(w, b);
  auto j = net_to_json(n);
  EXPECT_EQ(j["layers"][0]["weights"][0][0], "-3/2^5");
  EXPECT_EQ(j["layers"][0]["bias"][0], "3/2^1");
  EXPECT_EQ(deserialize_net(serialize_net(n)), n);
}

TEST(Netio, PrecisionLint) {
  Net n = gate_network(GateKind::logic(GateOp::Xor, 2));
  auto lint = precision_lint(n, 1);
  EXPECT_EQ(lint.entries, n.nonzeros());
  EXPECT_EQ(lint.off_grid, 0);
}

namespace {

// a -> NOT, (a, b) -> AND, (not_a, and) -> XOR
FfnnGraph small_graph() {
  FfnnGraph g;
  g.input_names = {"a", "b"};
  g.input_domain = {ValueSet::bit(), ValueSet::bit()};
  g.blocks.push_back({"n", "NOT[B=1]", BlockRole::Gate, gate_network(parse_gate("NOT[B=1]")), {{-1, 0}}});
  g.blocks.push_back({"m", "AND[B=1]", BlockRole::Gate, gate_network(parse_gate("AND[B=1]")), {{-1, 0}, {-1, 1}}});
  g.blocks.push_back({"x", "XOR[B=1]", BlockRole::Gate, gate_network(parse_gate("XOR[B=1]")), {{0, 0}, {1, 0}}});
  g.output_names = {"y", "z"};
  g.outputs = {{2, 0}, {-1, 1}};
  return g;
}

}  // namespace

TEST(Ffnn, EvaluateAndOrderInvariance) {
  FfnnGraph g = small_graph();
  g.check();
  for (uint64_t v = 0; v < 4; ++v) {
    auto x = bits_of(v, 2);
    int a = v >> 1, b = v & 1;
    std::vector<Dyadic> want{Dyadic((1 - a) ^ (a & b)), Dyadic(b)};
    EXPECT_EQ(g.evaluate(x), want);
    EXPECT_EQ(g.evaluate_in_order(x, {1, 0, 2}), want);
  }
  EXPECT_THROW(g.evaluate_in_order(bits_of(0, 2), {2, 0, 1}), std::invalid_argument);
}

TEST(Ffnn, LayerAccounting) {
  FfnnGraph g = small_graph();
  auto s = g.start_layers();
  EXPECT_EQ(s, (std::vector<int>{0, 0, 1}));
  EXPECT_EQ(g.depth(), 1 + g.blocks[2].net.depth());
  EXPECT_EQ(g.params(), g.blocks[0].net.nonzeros() + g.blocks[1].net.nonzeros() + g.blocks[2].net.nonzeros());
  auto skips = g.skip_wires();
  ASSERT_EQ(skips.size(), 1u);  // input b read by the graph output after the XOR finishes
  EXPECT_EQ(skips[0].to_block, -1);
}

TEST(Ffnn, FlattenMatches) {
  FfnnGraph g = small_graph();
  Net flat = flatten(g);
  EXPECT_EQ(flat.depth(), g.depth());
  for (uint64_t v = 0; v < 4; ++v) EXPECT_EQ(run(flat, bits_of(v, 2)), g.evaluate(bits_of(v, 2)));
}

TEST(Ffnn, JsonRoundTrip) {
  FfnnGraph g = small_graph();
  std::string text = serialize_graph(g);
  FfnnGraph back = deserialize_graph(text);
  EXPECT_EQ(serialize_graph(back), text);
  for (uint64_t v = 0; v < 4; ++v) EXPECT_EQ(back.evaluate(bits_of(v, 2)), g.evaluate(bits_of(v, 2)));
  // a plain MLP file loads as a one-block graph
  FfnnGraph one = deserialize_graph(serialize_net(gate_network(parse_gate("XOR[B=1]"))));
  EXPECT_EQ(one.blocks.size(), 1u);
  EXPECT_EQ(one.evaluate({1, 0}), std::vector<Dyadic>{1});
}

TEST(Ffnn, CheckRejectsBadWiring) {
  FfnnGraph g = small_graph();
  g.blocks[2].inputs[1] = {5, 0};
  EXPECT_THROW(g.check(), std::invalid_argument);
  g = small_graph();
  g.blocks[0].inputs.push_back({-1, 1});
  EXPECT_THROW(g.check(), std::invalid_argument);
}

TEST(Ffnn, Dot) {
  std::string dot = to_dot(small_graph());
  EXPECT_NE(dot.find("digraph"), std::string::npos);
  EXPECT_NE(dot.find("XOR[B=1]"), std::string::npos);
}
