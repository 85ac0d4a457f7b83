#ifndef CIRCNET_APPS_HPP
#define CIRCNET_APPS_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "circnet/compiler.hpp"
#include "circnet/fixnum.hpp"

namespace circnet {

// ------------------------------------------------------------------- APSP

/**
 * Complete graph on vertices 1..k with positive grid weights.  weight(i, j)
 * is symmetric; storage is the upper triangle in row order.
 **/
struct WeightedCompleteGraph {
  int k = 2;
  int q = 1;
  std::vector<Dyadic> weights;

  static WeightedCompleteGraph make(int k, int q, std::vector<Dyadic> w);
  const Dyadic& weight(int i, int j) const;  // 1-based, i != j
  void check() const;
};

size_t edge_index(int k, int i, int j);  // 1-based, i < j

/**
 * Edge list text: "k <k>" and "q <q>" lines, then one "i j w" line per
 * edge with 1-based vertices and a dyadic weight.  '#' starts a comment.
 **/
WeightedCompleteGraph parse_weighted_graph(std::string_view text);
std::string format_weighted_graph(const WeightedCompleteGraph& g);

// upper-triangle distances d(i, j), i < j, in row order
std::vector<Dyadic> floyd_warshall(const WeightedCompleteGraph& g);

struct ApspOptions {
  // false: every (r, i, j) triple of the textbook triple loop gets an update;
  // true: only i < j with r distinct from both
  bool pruned = false;
};

// inputs w_i_j (i < j), outputs d_i_j (i < j); gates MIN[n=2], MOD_ADD[q]
// and one CONST per diagonal entry
Circuit build_apsp_circuit(int k, int q, const ApspOptions& opt = {});
CompileResult compile_apsp(int k, int q, const ApspOptions& opt = {}, const CompileOptions& copt = {});
// positive grid weights up to apsp_weight_limit, so no relaxation wraps past M
WeightedCompleteGraph random_apsp_graph(int k, int q, uint64_t seed);
// largest grid value <= M / 2
Dyadic apsp_weight_limit(int k, int q);

// ------------------------------------------------------- Boolean functions

// value of input (x_1..x_B) sits at index sum x_i 2^(B-i)
struct TruthTable {
  int B = 1;
  std::vector<uint8_t> bits;

  bool at(uint64_t i) const { return bits.at(i) != 0; }
};

constexpr int kMaxSynthBits = 16;

/**
 * File: first line B, then 2^B bits as hex digits, first entry in the top
 * bit of the first digit; tables shorter than 4 entries use one digit with
 * the unused low bits zero.  Whitespace between digits is ignored.
 **/
TruthTable parse_truth_table(std::string_view text);
std::string format_truth_table(const TruthTable& t);

/**
 * Shannon expansion on x_1 first, identical subfunctions shared, constant
 * cofactors folded away.  Gates AND[B=1], OR[B=1], NOT[B=1]; a constant
 * table becomes one CONST gate.  At most 2 * 2^B gates.
 **/
Circuit synthesize_boolean(const TruthTable& t, int cap = kMaxSynthBits);
constexpr long kSynthGateFactor = 2;

// ---------------------------------------------------------- derandomizing

/**
 * base: single-output circuit over AND[B=1], OR[B=1], NOT[B=1]; its first n
 * inputs are deterministic and the remaining m are Bernoulli(p).
 **/
struct RandomizedCircuitSpec {
  Circuit base;
  int n = 1;
  int m = 1;
  double p = 0.75;
  std::optional<int> replication;  // default 8 n K + 1, K = compute nodes

  int gate_count() const;
  int replicas() const;
  void check() const;
};

// advice[r] holds the m random bits of replica r
using Advice = std::vector<std::vector<uint8_t>>;

Circuit derandomize(const RandomizedCircuitSpec& spec, const Advice& advice);

enum class AdviceSearch { Random, Exhaustive };

struct AdviceResult {
  bool found = false;
  Advice advice;
  uint64_t tries = 0;
  std::string message;
};

// target(x) over {0,1}^n; every candidate is checked on all 2^n inputs
AdviceResult search_advice(const RandomizedCircuitSpec& spec, const std::function<bool(const std::vector<uint8_t>&)>& target,
                           AdviceSearch mode = AdviceSearch::Random, uint64_t budget = 1000, uint64_t seed = 1);

// probability over the random inputs that base(x, .) = target(x), for each x
std::vector<double> success_probability(const RandomizedCircuitSpec& spec,
                                        const std::function<bool(const std::vector<uint8_t>&)>& target);

// ------------------------------------------------------------ transductor

/**
 * Finite-state transducer over the alphabet {0,1}^B.  delta[s][a] gives the
 * next state and the output bit for state s reading symbol a (the symbol
 * index is the bits read most significant first).  Accept and reject states
 * are absorbing and emit 0.
 **/
struct Transductor {
  int n_states = 1;
  int B = 1;
  std::vector<std::vector<std::pair<int, int>>> delta;
  int initial = 0;
  std::optional<int> accept;
  std::optional<int> reject;

  void check() const;
  std::pair<int, int> step(int state, uint64_t symbol) const;
};

struct TransductorTrace {
  std::vector<int> state;   // state[t], t = 0..T
  std::vector<int> output;  // output[t], output[0] = 0
};

// the same symbol x is read at every step
TransductorTrace simulate(const Transductor& t, const std::vector<uint8_t>& x, int T);

/**
 * Circuit with inputs x_1..x_B (bits) and the query time t in {0..T};
 * outputs the one-hot state s_0..s_{n-1} after t steps and the bit o
 * written at step t.
 **/
Circuit unroll_transductor(const Transductor& t, int T);
int time_precision(int T);  // smallest q whose grid contains 0..T

// ------------------------------------------------------ decomposition study

struct DecompositionRow {
  int q = 0;
  Dyadic discretization_error;  // sup over probes of |f(x) - fbar_q(x)|
  Dyadic compute_error;         // sup over probes of |net(pi_q x) - fbar_q(x)|
  uint64_t probes = 0;
  uint64_t grid_points = 0;
  long params = 0;
};

struct DecompositionStudy {
  std::vector<DecompositionRow> rows;
  // error(q) / error(q + 1) per consecutive pair
  std::vector<double> ratios() const;
  nlohmann::ordered_json to_json() const;
  std::string csv() const;
};

/**
 * fbar_q = pi_q o f o pi_q realized by the lookup network over R_q; probes
 * are every multiple of 2^-(q + probe_extra) in [lo, hi].
 **/
DecompositionStudy decomposition_study(const std::function<Dyadic(const Dyadic&)>& f, const std::vector<int>& qs,
                                       const Dyadic& lo, const Dyadic& hi, int probe_extra = 6,
                                       RoundingMode mode = RoundingMode::TowardZero);

// --------------------------------------------------- random mixed circuits

struct RandomCircuitOptions {
  int max_gates = 12;
  int min_gates = 4;
  int max_q = 2;
  uint64_t max_domain = uint64_t(1) << 14;
};

// valid circuit mixing bit and grid values; deterministic in the seed
Circuit random_mixed_circuit(uint64_t seed, const RandomCircuitOptions& opt = {});

}  // namespace circnet

#endif
