#ifndef CIRCNET_GATELIB_HPP
#define CIRCNET_GATELIB_HPP

#include <optional>
#include <vector>

#include "circnet/gate.hpp"
#include "circnet/relunet.hpp"

namespace circnet {

/**
 * A gate together with its ReLU network.  report carries the measured
 * complexity and the declared bound from the shipped bound table.
 **/
struct GateEmulator {
  GateKind kind;
  Net net;
  ComplexityReport report;
  std::vector<ValueSet> domain;

  std::vector<Dyadic> evaluate(const std::vector<Dyadic>& x) const { return from_vec(net.evaluate(to_vec(x))); }
};

/**
 * Network pieces of a gate as the compiler places them.  Grid-port modular
 * gates run their bit-level core between encoder and decoder adapters;
 * every other gate is a single core block.
 **/
struct LoweredGate {
  Net core;
  std::optional<Net> pre;
  std::optional<Net> post;
};

Net gate_network(const GateKind& g);
LoweredGate lower_gate(const GateKind& g);
GateEmulator build_gate(const GateKind& g);

GateEmulator build_logic(GateOp op, int B);
GateEmulator build_forall(const GateKind& inner, int B1);
// NOT . forall . NOT
GateEmulator build_exists(const GateKind& inner, int B1);
GateEmulator build_constant(const std::vector<Dyadic>& c, int in_arity = 1);
GateEmulator build_indicator(GateOp variant, const Dyadic& a, const Dyadic& b, int q);
GateEmulator build_point_indicator(const std::vector<Dyadic>& a, int q);
GateEmulator build_floor(int M, int q);
GateEmulator build_mod2();
GateEmulator build_shift(GateOp dir, int B);
GateEmulator build_bit_adder(int B);
GateEmulator build_bit_adder_n(int B, int n);
GateEmulator build_bit_multiplier(int B);
GateEmulator build_comp(int B);
GateEmulator build_embed(int B);
GateEmulator build_int_conversion(int B);
GateEmulator build_exact_adder(int B);
GateEmulator build_bit_decoder(int M, int q);
GateEmulator build_bit_encoder(int M, int q);
GateEmulator build_sign_int_rem(int M, int q);
GateEmulator build_remainder_bits(int q);
GateEmulator build_integer_bits(int M, int q);
GateEmulator build_modular_add(int q, bool bit_ports = true);
GateEmulator build_modular_mult(int q, bool bit_ports = true);
GateEmulator build_min(int n);
GateEmulator build_max(int n);
GateEmulator build_median(int n);
GateEmulator build_majority(int n);
GateEmulator build_identity(int n);

}  // namespace circnet

#endif
