// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
// FAIL not excused by --known.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "circnet/apps.hpp"
#include "circnet/bounds.hpp"
#include "circnet/compiler.hpp"
#include "circnet/gatelib.hpp"

using namespace circnet;

namespace {

using Vals = std::vector<Dyadic>;

struct Outcome {
  bool pass = false;
  std::string detail;
  // a failure that matches its recorded analysis exactly
  bool explained = false;
};

// ------------------------------------------------------------------ tolerances

// all comparisons below are exact dyadic equality
constexpr long kApspConstant = 1710;       // params <= C k^3 at q = 2, frozen from k = 3..5
constexpr double kSlopeTarget = 3.0;
constexpr double kSlopeTolerance = 0.3;
constexpr double kRatioLo = 1.8;
constexpr double kRatioHi = 2.2;

// ------------------------------------------------------------------ 1. gates

struct SweepStats {
  uint64_t gates = 0;
  uint64_t points = 0;
  uint64_t mismatches = 0;
  std::set<GateOp> ops;
  std::string first_failure;
};

// emulator against reference semantics on the gate's domain; coordinates on
// all of R are replaced by `probe`
void sweep_gate(const GateKind& g, const ValueSet& probe, SweepStats& st) {
  Net net = gate_network(g);
  auto dom = input_domain(g);
  for (auto& d : dom)
    if (!d.finite()) d = probe;
  uint64_t n = domain_size(dom);
  ++st.gates;
  st.ops.insert(g.op);
  for (uint64_t i = 0; i < n; ++i) {
    Vals x = domain_point(dom, i);
    Vals want = gate_reference(g, x);
    Vals got = from_vec(net.evaluate(to_vec(x)));
    ++st.points;
    if (got != want) {
      if (st.mismatches++ == 0) st.first_failure = gate_to_string(g) + " at point " + std::to_string(i);
    }
  }
}

Outcome gate_exactness() {
  SweepStats st;
  ValueSet small = ValueSet::lattice(0, Dyadic(-1), Dyadic(2));
  const GateOp logic[] = {GateOp::Not,  GateOp::And,   GateOp::Or,    GateOp::Xor, GateOp::Nand,
                          GateOp::Imply, GateOp::Equal, GateOp::Leq, GateOp::Geq};
  for (GateOp op : logic)
    for (int B = 1; B <= 6; ++B) sweep_gate(GateKind::logic(op, B), small, st);
  for (bool ex : {false, true}) {
    sweep_gate(GateKind::forall(GateKind::logic(GateOp::Or, 1), 1, ex), small, st);
    sweep_gate(GateKind::forall(GateKind::logic(GateOp::And, 1), 1, ex), small, st);
    sweep_gate(GateKind::forall(GateKind::tropical(GateOp::Majority, 3), 2, ex), small, st);
    sweep_gate(GateKind::forall(GateKind::tropical(GateOp::Majority, 5), 3, ex), small, st);
  }
  sweep_gate(GateKind::constant({Dyadic::parse("0.5")}), ValueSet::grid(1), st);
  sweep_gate(GateKind::constant({Dyadic(1), Dyadic::parse("-0.75")}, 2), ValueSet::grid(1), st);
  sweep_gate(GateKind::mod2(), small, st);
  for (int q = 1; q <= 3; ++q) {
    ValueSet grid = ValueSet::grid(q);
    Dyadic step = Dyadic::pow2(-q);
    std::vector<std::pair<Dyadic, Dyadic>> ab{{Dyadic(-1), Dyadic(1)}, {step, Dyadic(1) + step}, {Dyadic(0), Dyadic(0)}};
    for (auto [a, b] : ab) {
      sweep_gate(GateKind::indicator(GateOp::IndHalfLine, a, Dyadic(0), q), grid, st);
      sweep_gate(GateKind::indicator(GateOp::IndOpenHalfLine, a, Dyadic(0), q), grid, st);
      sweep_gate(GateKind::indicator(GateOp::IndClosed, a, b, q), grid, st);
      if (a < b) {
        sweep_gate(GateKind::indicator(GateOp::IndHalfOpen, a, b, q), grid, st);
        sweep_gate(GateKind::indicator(GateOp::IndHalfOpenComplement, a, b, q), grid, st);
      }
    }
    int M = (1 << (q + 1)) - 1;
    sweep_gate(GateKind::floor(M, q), grid, st);
    sweep_gate(GateKind::point({Dyadic(0)}, q), grid, st);
    sweep_gate(GateKind::point({-grid_max(q)}, q), grid, st);
    sweep_gate(GateKind::point({step, Dyadic(-1)}, q), grid, st);
    sweep_gate(GateKind::point({grid_max(q), Dyadic(0)}, q), grid, st);
    sweep_gate(GateKind::codec(GateOp::BitDecoder, q, 1 << (q + 1)), grid, st);
    for (GateOp op : {GateOp::BitEncoder, GateOp::SignIntRem, GateOp::IntegerBits})
      sweep_gate(GateKind::codec(op, q, M), grid, st);
    sweep_gate(GateKind::codec(GateOp::RemainderBits, q), grid, st);
  }
  for (int B = 1; B <= 5; ++B) {
    for (GateOp op : {GateOp::LShift, GateOp::RShift, GateOp::BitAdd, GateOp::BitMult, GateOp::Comp, GateOp::Embed,
                      GateOp::IntToTwos, GateOp::ExactAdd}) {
      if (B == 1 && (op == GateOp::Comp || op == GateOp::IntToTwos)) continue;  // need a magnitude bit
      sweep_gate(GateKind::bitwise(op, B), small, st);
    }
    if (B <= 3)
      for (int n = 2; n <= 3; ++n) sweep_gate(GateKind::add_n(B, n), small, st);
  }
  // q = 3 bit ports give the 256 x 256 code-pair sweep
  for (int q = 1; q <= 3; ++q)
    for (GateOp op : {GateOp::ModAdd, GateOp::ModMult}) {
      sweep_gate(GateKind::modular(op, q, false), small, st);
      sweep_gate(GateKind::modular(op, q, true), small, st);
    }
  for (GateOp op : {GateOp::Min, GateOp::Max, GateOp::Median, GateOp::Majority})
    for (int n = 2; n <= 7; ++n)
      if (op != GateOp::Median || n % 2 == 1) sweep_gate(GateKind::tropical(op, n), small, st);
  for (int n = 1; n <= 3; ++n) sweep_gate(GateKind::identity(n), ValueSet::grid(1), st);

  std::string missing;
  for (GateOp op : all_gate_ops())
    if (!st.ops.count(op)) missing += std::string(" ") + gate_name(op);
  std::ostringstream os;
  os << st.gates << " gates, " << st.points << " points, " << st.mismatches << " mismatches";
  if (!missing.empty()) os << "; not covered:" << missing;
  if (st.mismatches) os << "; first " << st.first_failure;
  return {st.mismatches == 0 && missing.empty(), os.str()};
}

// ------------------------------------------------------------- 2. ADD_4

Outcome adder_example() {
  Circuit c = single_gate_circuit(GateKind::bitwise(GateOp::BitAdd, 4));
  CompileResult r = compile(c);
  Vals in{0, 0, 0, 1, 0, 1, 1, 1};
  Vals got = r.graph.evaluate(in);
  bool ok = got == Vals{1, 0, 0, 0};
  std::string s;
  for (const auto& v : got) s += v.decimal();
  return {ok, "ADD_4(0001, 0111) = " + s};
}

// ------------------------------------------------------ 3. random circuits

Outcome random_circuits() {
  uint64_t points = 0;
  int bad = 0;
  std::string why;
  for (uint64_t seed = 1; seed <= 25; ++seed) {
    Circuit c = random_mixed_circuit(seed);
    if (c.compute_nodes().size() > 12) {
      ++bad;
      why = "seed " + std::to_string(seed) + " has more than 12 gates";
      continue;
    }
    CompileResult r = compile(c);
    std::string iso;
    if (!block_dag_isomorphic(c, r.graph, &iso)) {
      ++bad;
      why = "seed " + std::to_string(seed) + ": " + iso;
      continue;
    }
    Certificate cert = verify_equivalence(c, r.graph);
    points += cert.checked;
    if (!cert.passed() || cert.mode != VerifyMode::Exhaustive) {
      ++bad;
      why = "seed " + std::to_string(seed) + ": " + std::to_string(cert.mismatches) + " mismatches";
    }
  }
  std::string d = "25 circuits, " + std::to_string(points) + " points checked exhaustively";
  if (bad) d += ", " + std::to_string(bad) + " failed (" + why + ")";
  return {bad == 0, d};
}

// ------------------------------------------------------------ 4. universal

Outcome universal() {
  int bad = 0;
  std::string why;
  long worst_params = 0, worst_bound = 0;
  for (auto [d, q] : {std::pair{1, 1}, {1, 2}, {2, 1}}) {
    std::mt19937_64 rng(static_cast<uint64_t>(100 * d + q));
    std::uniform_int_distribution<int64_t> m(-256, 256);
    long bound = 3L << (2 * d * (q + 1));
    for (int rep = 0; rep < 50; ++rep) {
      GridTable f = GridTable::from_function(d, q, [&](const Vals&) { return Dyadic::from_parts(m(rng), 4); });
      LookupNetwork L = build_universal(f);
      Net net = L.network();
      long params = static_cast<long>(net.nonzeros());
      worst_params = std::max(worst_params, params);
      worst_bound = std::max(worst_bound, bound);
      if (L.encoder.depth() != 4 || net.depth() != 4 || params > bound) {
        ++bad;
        why = "d=" + std::to_string(d) + " q=" + std::to_string(q) + " depth " + std::to_string(L.encoder.depth()) +
              " params " + std::to_string(params);
        continue;
      }
      for (uint64_t i = 0; i < f.points(); ++i)
        if (net.evaluate(to_vec(f.point(i)))[0] != f.values[i]) {
          ++bad;
          why = "d=" + std::to_string(d) + " q=" + std::to_string(q) + " wrong at point " + std::to_string(i);
          break;
        }
    }
  }
  std::string det = "150 tables exact, depth 4, params within 3*4^(d(q+1)) (largest " + std::to_string(worst_params) +
                    " of " + std::to_string(worst_bound) + ")";
  if (bad) det = std::to_string(bad) + " tables failed: " + why;
  return {bad == 0, det};
}

// ----------------------------------------------------------------- 5. APSP

Outcome apsp() {
  int q = 2, bad = 0;
  std::string why;
  std::vector<double> lk, lp;
  std::ostringstream counts;
  for (int k = 3; k <= 5; ++k) {
    CompileResult r = compile_apsp(k, q);
    for (uint64_t s = 1; s <= 100; ++s) {
      WeightedCompleteGraph g = random_apsp_graph(k, q, 1000 * static_cast<uint64_t>(k) + s);
      if (r.graph.evaluate(g.weights) != floyd_warshall(g)) {
        ++bad;
        why = "k=" + std::to_string(k) + " seed " + std::to_string(s);
      }
    }
    long p = r.report.total.nonzero_params;
    if (p > kApspConstant * k * k * k) {
      ++bad;
      why = "k=" + std::to_string(k) + " params " + std::to_string(p) + " over the frozen constant";
    }
    counts << (k > 3 ? ", " : "") << "k=" << k << ":" << p;
    lk.push_back(std::log(k));
    lp.push_back(std::log(static_cast<double>(p)));
  }
  // least-squares slope of log params against log k
  double mk = (lk[0] + lk[1] + lk[2]) / 3, mp = (lp[0] + lp[1] + lp[2]) / 3, num = 0, den = 0;
  for (int i = 0; i < 3; ++i) {
    num += (lk[i] - mk) * (lp[i] - mp);
    den += (lk[i] - mk) * (lk[i] - mk);
  }
  double slope = num / den;
  bool slope_ok = std::fabs(slope - kSlopeTarget) <= kSlopeTolerance;
  std::ostringstream os;
  os << "300 graphs, " << bad << " failures; params " << counts.str() << "; log-log slope " << slope;
  if (bad) os << " (" << why << ")";
  return {bad == 0 && slope_ok, os.str()};
}

// ----------------------------------------------------------- 6. transductor

Outcome transductor() {
  // counts ones mod 3 and writes 1 when the count wraps
  Transductor t;
  t.n_states = 3;
  t.B = 1;
  t.delta = {{{0, 0}, {1, 0}}, {{1, 0}, {2, 0}}, {{2, 0}, {0, 1}}};
  int T = 8;
  Circuit c = unroll_transductor(t, T);
  CompileResult r = compile(c);
  int bad = 0, points = 0;
  for (int x = 0; x < 2; ++x) {
    TransductorTrace tr = simulate(t, {static_cast<uint8_t>(x)}, T);
    for (int s = 0; s <= T; ++s) {
      Vals want(3, Dyadic(0));
      want[static_cast<size_t>(tr.state[static_cast<size_t>(s)])] = 1;
      want.push_back(tr.output[static_cast<size_t>(s)]);
      ++points;
      if (r.graph.evaluate({x, s}) != want) ++bad;
    }
  }
  Certificate cert = verify_equivalence(c, r.graph);
  return {bad == 0 && cert.passed(), std::to_string(points) + " (x, t) points, " + std::to_string(bad) +
                                         " disagree with the simulator; " + std::to_string(c.compute_nodes().size()) +
                                         " gates, network depth " + std::to_string(r.graph.depth())};
}

// ----------------------------------------------------- 7. derandomization

Outcome derandomization() {
  RandomizedCircuitSpec s;
  // XNOR(x, r): equals x exactly when the coin shows 1
  s.base = parse_circuit(R"(circuit 1
inputs: x:bit, r:bit
nx = NOT[B=1](x)
nr = NOT[B=1](r)
a1 = AND[B=1](x, r)
a2 = AND[B=1](nx, nr)
o = OR[B=1](a1, a2)
outputs: y = o
)");
  s.n = 1;
  s.m = 1;
  s.p = 0.75;
  auto target = [](const std::vector<uint8_t>& x) { return x[0] == 1; };
  AdviceResult a = search_advice(s, target, AdviceSearch::Random, 1000, 1);
  if (!a.found) return {false, a.message};
  Circuit d = derandomize(s, a.advice);
  bool ok = true;
  for (int x = 0; x < 2; ++x) ok = ok && interpret(d, {x}) == Vals{x};
  CompileResult r = compile(d);
  for (int x = 0; x < 2; ++x) ok = ok && r.graph.evaluate({x}) == Vals{x};
  return {ok, std::to_string(s.replicas()) + " replicas (8BK+1, K=" + std::to_string(s.gate_count()) + "), " +
                  a.message + ", derandomized circuit and network match the target on both inputs"};
}

// ------------------------------------------------------------ 8. bound audit

Outcome bound_audit() {
  auto audits = audit_bound_table();
  int strict = 0, discrepant = 0, bad = 0;
  std::ostringstream report;
  std::string why;
  for (const auto& a : audits) {
    if (!a.ok) {
      ++bad;
      why = a.row + " " + a.gate;
    }
    if (a.status == BoundStatus::Strict) {
      ++strict;
      if (!a.discrepancy.empty()) {
        ++bad;
        why = a.row + " strict row exceeds its table entry";
      }
    }
    if (a.status == BoundStatus::Discrepant) {
      ++discrepant;
      const BoundRow* row = find_bound_row(parse_gate(a.gate));
      report << a.row << "  " << a.gate << "  measured depth " << a.measured.depth << " width " << a.measured.width
             << " params " << a.measured.nonzero_params;
      if (!a.discrepancy.empty()) report << "  exceeds table: " << a.discrepancy;
      if (row && !row->note.empty()) report << "  note: " << row->note;
      report << "\n";
    }
  }
  std::ofstream("bound_discrepancies.txt") << report.str();
  std::ostringstream os;
  os << audits.size() << " cases (" << strict << " strict, " << discrepant
     << " discrepant, report in bound_discrepancies.txt)";
  if (bad) os << "; " << bad << " out of bound, e.g. " << why;
  return {bad == 0 && (discrepant == 0 || !report.str().empty()), os.str()};
}

// ---------------------------------------------------------- 9. decomposition

Outcome decomposition() {
  auto st = decomposition_study([](const Dyadic& x) { return x * x; }, {2, 3, 4}, Dyadic(0), Dyadic(1));
  bool ok = true;
  Dyadic worst_compute;
  std::ostringstream os;
  os << "errors";
  for (const auto& r : st.rows) {
    ok = ok && r.compute_error == Dyadic(0);
    worst_compute = max(worst_compute, r.compute_error);
    os << " q=" << r.q << ":" << r.discretization_error.decimal();
  }
  os << "; ratios";
  for (double r : st.ratios()) {
    ok = ok && r >= kRatioLo && r <= kRatioHi;
    os << " " << r;
  }
  os << "; largest compute error " << worst_compute.decimal();
  return {ok, os.str()};
}

// -------------------------------------------------------------- 10. mutation

Outcome mutation() {
  int mutants = 0, caught = 0, masked = 0;
  std::string escaped;
  const Dyadic deltas[] = {Dyadic(1), Dyadic(-1), Dyadic::parse("0.5"), Dyadic::parse("-0.25")};
  for (int B : {1, 2}) {
    Circuit c = single_gate_circuit(GateKind::logic(GateOp::Xor, B));
    Net net = gate_network(GateKind::logic(GateOp::Xor, B));
    if (!verify_equivalence(c, net).passed()) return {false, "unmutated XOR does not verify"};
    const auto& layers = net.layers();
    for (size_t l = 0; l < layers.size(); ++l) {
      MatrixX<Dyadic> w0(layers[l].weights);
      Index rows = w0.rows(), cols = w0.cols();
      // every weight entry, zeros included, then every bias entry
      for (Index e = 0; e < rows * (cols + 1); ++e)
        for (const Dyadic& dlt : deltas) {
          std::vector<AffineLayer<Dyadic>> mut(layers.begin(), layers.end());
          MatrixX<Dyadic> w = w0;
          Vec b = layers[l].bias;
          Dyadic before = e < rows * cols ? w(e / cols, e % cols) : b[e - rows * cols];
          if (e < rows * cols) w(e / cols, e % cols) += dlt;
          else b[e - rows * cols] += dlt;
          mut[l] = AffineLayer<Dyadic>::from_dense(w, b);
          Certificate cert = verify_equivalence(c, Net(std::move(mut)));
          ++mutants;
          bool real_ce = !cert.passed() && !cert.counterexamples.empty() &&
                         interpret(c, cert.counterexamples.front().input) == cert.counterexamples.front().expected &&
                         cert.counterexamples.front().expected != cert.counterexamples.front().got;
          if (real_ce) {
            ++caught;
            continue;
          }
          // relu(relu(a+b) - 2 relu(a+b-1)) is already clamped at 0 on (1,1),
          // so a steeper -2 on the hidden layer's second unit cannot show
          if (l + 2 == layers.size() && before == Dyadic(-2) && dlt < Dyadic(0)) {
            ++masked;
            continue;
          }
          if (escaped.empty())
            escaped = "XOR[B=" + std::to_string(B) + "] layer " + std::to_string(l) + " entry " + std::to_string(e) +
                      " delta " + dlt.decimal();
        }
    }
  }
  std::string d = std::to_string(caught) + "/" + std::to_string(mutants) + " single-parameter mutants fail with a counterexample";
  if (masked) d += "; " + std::to_string(masked) + " survive by lowering the -2 coefficient under the output ReLU";
  if (!escaped.empty()) d += "; unexplained survivor: " + escaped;
  Outcome o{caught == mutants, d};
  o.explained = !o.pass && escaped.empty();
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  // --known N: criterion N has a recorded failure; it still prints FAIL but
  // does not set the exit status as long as the failure matches its analysis
  std::set<int> known;
  for (int a = 1; a + 1 < argc; ++a)
    if (std::string(argv[a]) == "--known") known.insert(std::atoi(argv[a + 1]));
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion all[] = {
      {"gate exactness", gate_exactness},
      {"ADD_4 worked example", adder_example},
      {"random mixed circuits end to end", random_circuits},
      {"universal lookup network", universal},
      {"APSP network", apsp},
      {"transductor unrolling", transductor},
      {"derandomization", derandomization},
      {"complexity bound audit", bound_audit},
      {"decomposition study", decomposition},
      {"mutation sensitivity", mutation},
  };
  int failed = 0, blocking = 0, i = 0;
  for (const auto& c : all) {
    ++i;
    auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += !o.pass;
    bool tolerated = !o.pass && o.explained && known.count(i);
    blocking += !o.pass && !tolerated;
    std::printf("%s %2d %s: %s (%.1f s)%s\n", o.pass ? "PASS" : "FAIL", i, c.name, o.detail.c_str(), secs,
                tolerated ? " [recorded deviation]" : "");
    std::fflush(stdout);
  }
  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return blocking ? 1 : 0;
}
