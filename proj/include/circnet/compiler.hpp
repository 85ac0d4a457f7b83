#ifndef CIRCNET_COMPILER_HPP
#define CIRCNET_COMPILER_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "circnet/circuit.hpp"
#include "circnet/ffnn.hpp"
#include "circnet/gatelib.hpp"

namespace circnet {

// ---------------------------------------------------------------- surgery

/**
 * target[i] is the emulator input fed by the node's i-th parent.  Must be
 * onto the emulator inputs; flawless when also one-to-one.  When two
 * parents share a target the first one is the one wired.
 **/
struct RewiringMap {
  std::string node;
  std::vector<int> target;

  static RewiringMap identity(const std::string& node, int n);
  bool surjective(int emulator_inputs) const;
  bool flawless(int emulator_inputs) const;
};

struct SurgeryStep {
  std::string node;
  GateEmulator emulator;
  RewiringMap rewiring;
};

struct SurgeryPlan {
  std::vector<SurgeryStep> steps;
  // every step flawless and every compute node covered exactly once
  bool completely_flawless(const Circuit& c) const;
};

/**
 * A circuit with some compute nodes replaced by emulator blocks.  The
 * replaced node keeps its id: its parents now feed the block through the
 * rewiring and its children read the block's outputs.
 **/
struct PartialLowering {
  Circuit circuit;
  std::map<std::string, SurgeryStep> replaced;

  std::vector<Dyadic> evaluate(const std::vector<Dyadic>& x) const;
  // emulator input ports in wiring order for a replaced node
  std::vector<PortRef> block_inputs(const std::string& node) const;
};

PartialLowering surgery_at_node(const PartialLowering& p, const std::string& node, const GateEmulator& emulator,
                                const RewiringMap& rewiring);
PartialLowering surgery_at_node(const Circuit& c, const std::string& node, const GateEmulator& emulator,
                                const RewiringMap& rewiring);
// applies the steps in plan order
PartialLowering apply_plan(const Circuit& c, const SurgeryPlan& plan);
// canonical emulators with identity rewiring, nodes in ascending id order
SurgeryPlan canonical_plan(const Circuit& c);

// ---------------------------------------------------------------- compile

struct CompileOptions {
  bool strict_surgery = false;  // reject gates that need codec adapters
  bool fuse = false;            // merge adapters into their gate block
};

struct GateLine {
  std::string node;
  std::string gate;
  ComplexityReport stats;  // of the core block, with the declared bound
};

struct CompileReport {
  std::vector<GateLine> gates;
  long adapter_blocks = 0;
  long adapter_params = 0;
  long gate_params = 0;
  std::vector<SkipWire> skips;
  long skip_span_total = 0;  // identity layers a flattened network would spend on skips
  ComplexityReport total;   // of the FFNN graph

  nlohmann::ordered_json to_json() const;
  std::string str() const;
};

struct CompileResult {
  FfnnGraph graph;
  SurgeryPlan plan;
  CompileReport report;
};

CompileResult compile(const Circuit& c, const CompileOptions& opt = {});

// labelled DAG check with adapter blocks contracted into their gate; the
// witness is the node-id correspondence itself
bool block_dag_isomorphic(const Circuit& c, const FfnnGraph& g, std::string* why = nullptr);

// one compute node wired straight from fresh inputs to outputs
Circuit single_gate_circuit(const GateKind& g);

// ---------------------------------------------------------------- verify

enum class VerifyMode { Exhaustive, Random };

struct VerifyOptions {
  VerifyMode mode = VerifyMode::Exhaustive;
  uint64_t samples = 10000;
  uint64_t seed = 1;
  uint64_t exhaustive_cap = uint64_t(1) << 20;
  unsigned threads = 1;  // 0 = hardware concurrency
  bool allow_fallback = false;  // exhaustive over the cap drops to random sampling
};

struct Counterexample {
  uint64_t index = 0;  // position in the enumeration or sample stream
  std::vector<Dyadic> input;
  std::vector<Dyadic> expected;
  std::vector<Dyadic> got;
};

struct Certificate {
  std::string circuit_hash;
  std::string network_hash;
  std::string domain;
  uint64_t domain_size = 0;
  VerifyMode mode = VerifyMode::Exhaustive;
  uint64_t seed = 0;
  uint64_t checked = 0;
  uint64_t mismatches = 0;
  std::vector<Counterexample> counterexamples;  // at most 10, smallest index first
  double seconds = 0;

  bool passed() const { return mismatches == 0 && checked > 0; }
  nlohmann::ordered_json to_json() const;
};

// throws std::invalid_argument on signature mismatch, or when exhaustive
// mode is over the cap without fallback
Certificate verify_equivalence(const Circuit& c, const FfnnGraph& g, const VerifyOptions& opt = {});
Certificate verify_equivalence(const Circuit& c, const Net& net, const VerifyOptions& opt = {});

uint64_t domain_size(const std::vector<ValueSet>& dom);  // saturates at UINT64_MAX
// mixed radix, last coordinate fastest
std::vector<Dyadic> domain_point(const std::vector<ValueSet>& dom, uint64_t index);
// coordinate-wise uniform draw keyed by (seed, index)
std::vector<Dyadic> domain_sample(const std::vector<ValueSet>& dom, uint64_t seed, uint64_t index);
uint64_t splitmix64(uint64_t x);

// -------------------------------------------------------------- universal

/**
 * f : R_q^d -> R given on every grid point.  Grid values of one coordinate
 * are indexed in increasing order (the two zeros share an index); the flat
 * index is sum_i idx_i * G^(d-1-i) with G = 2^(2q+2) - 1.
 **/
struct GridTable {
  int d = 1;
  int q = 1;
  std::vector<Dyadic> values;

  uint64_t points() const;
  std::vector<Dyadic> point(uint64_t index) const;
  uint64_t index_of(const std::vector<Dyadic>& x) const;
  template <typename F>
  static GridTable from_function(int d, int q, F f) {
    GridTable t;
    t.d = d;
    t.q = q;
    uint64_t n = t.points();
    t.values.reserve(n);
    for (uint64_t i = 0; i < n; ++i) t.values.push_back(f(t.point(i)));
    return t;
  }
};

enum class EncoderKind {
  Hat,              // one scalar code, hat functions over its integer values
  PointIndicators,  // one point-indicator network per grid point, run in parallel
};

struct LookupNetwork {
  Net encoder;  // R^d -> R^N1, one-hot on grid points
  std::vector<Dyadic> beta;
  int d = 1;
  int q = 1;
  EncoderKind kind = EncoderKind::Hat;

  uint64_t n1() const { return beta.size(); }
  // beta^T folded into the encoder's last layer
  Net network() const;
  Dyadic evaluate(const std::vector<Dyadic>& x) const;
};

constexpr uint64_t kUniversalCap = uint64_t(1) << 22;

LookupNetwork build_universal(const GridTable& f, EncoderKind kind = EncoderKind::Hat, uint64_t cap = kUniversalCap);

enum class ProductMode {
  MinTree,  // min over the trapezoid factors
  BitAnd,   // pairwise ReLU(x + y - 1), the one-bit product
};

struct BumpOptions {
  ProductMode product = ProductMode::MinTree;
};

/**
 * sum_n Y_n * prod_j g(a (x_j - X_nj)) with the trapezoid
 * g(t) = ReLU(t+3/2) - ReLU(t+1/2) - ReLU(t-1/2) + ReLU(t-3/2).
 * Samples must be distinct grid points; Y rows share one length.
 **/
Net build_universal_bump(const std::vector<std::vector<Dyadic>>& X, const std::vector<std::vector<Dyadic>>& Y, int q,
                         const BumpOptions& opt = {});
// scale used for sample set X at precision q
Dyadic bump_scale(const std::vector<std::vector<Dyadic>>& X, int q);

}  // namespace circnet

#endif
