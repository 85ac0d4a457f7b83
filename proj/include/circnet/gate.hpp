#ifndef CIRCNET_GATE_HPP
#define CIRCNET_GATE_HPP

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "circnet/dyadic.hpp"
#include "circnet/valueset.hpp"

namespace circnet {

enum class GateOp {
  // logic on B bits
  Not, And, Or, Xor, Nand, Imply, Equal, Leq, Geq,
  // quantifiers over an inner predicate
  Forall, Exists,
  // analytic
  Constant, IndHalfLine, IndOpenHalfLine, IndClosed, IndHalfOpen, IndHalfOpenComplement,
  PointIndicator, Floor, Mod2,
  // bit manipulation and bitwise arithmetic
  LShift, RShift, BitAdd, BitAddN, BitMult, Comp, Embed, IntToTwos, ExactAdd,
  // codecs
  BitDecoder, BitEncoder, SignIntRem, RemainderBits, IntegerBits,
  // modular arithmetic on R_q
  ModAdd, ModMult,
  // tropical
  Min, Max, Median, Majority,
  Identity,
};

/**
 * A gate with its parameters.  Which fields are meaningful depends on op;
 * see gate_to_string for the canonical parameter list of each op.
 **/
struct GateKind {
  GateOp op = GateOp::Identity;
  int B = 0;
  int B1 = 0;
  int q = 0;
  int M = 0;
  int n = 0;
  Dyadic a;
  Dyadic b;
  std::vector<Dyadic> vec;
  bool bits = false;
  std::shared_ptr<const GateKind> inner;

  static GateKind logic(GateOp op, int B);
  static GateKind forall(const GateKind& inner, int B1, bool exists = false);
  static GateKind constant(std::vector<Dyadic> c, int in_arity = 1);
  static GateKind indicator(GateOp op, Dyadic a, Dyadic b, int q);
  static GateKind point(std::vector<Dyadic> a, int q);
  static GateKind floor(int M, int q);
  static GateKind mod2();
  static GateKind bitwise(GateOp op, int B);
  static GateKind add_n(int B, int n);
  static GateKind codec(GateOp op, int q, int M = 0);
  static GateKind modular(GateOp op, int q, bool bit_ports = false);
  static GateKind tropical(GateOp op, int n);
  static GateKind identity(int n);

  bool operator==(const GateKind& o) const;
};

class DomainFault : public std::domain_error {
public:
  DomainFault(int port, const std::string& what) : std::domain_error(what), port_(port) {}
  int port() const { return port_; }

private:
  int port_;
};

const char* gate_name(GateOp op);
GateOp gate_op_from_name(std::string_view name);
const std::vector<GateOp>& all_gate_ops();

// throws std::invalid_argument on bad parameters
void validate_gate(const GateKind& g);

int input_arity(const GateKind& g);
int output_arity(const GateKind& g);
// one entry per input port
std::vector<ValueSet> input_domain(const GateKind& g);
// one entry per output port, given the sets flowing into the inputs
std::vector<ValueSet> output_codomain(const GateKind& g, const std::vector<ValueSet>& in);
bool is_commutative(const GateKind& g);

// reference semantics; throws DomainFault when an input leaves the domain
std::vector<Dyadic> gate_reference(const GateKind& g, const std::vector<Dyadic>& x);

// "AND[B=2]", "FORALL[B1=2,inner=OR[B=1]]", "CONST[c=(1,0.5),in=1]"
std::string gate_to_string(const GateKind& g);
GateKind parse_gate(std::string_view text);

}  // namespace circnet

#endif
