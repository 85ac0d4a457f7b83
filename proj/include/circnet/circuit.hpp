#ifndef CIRCNET_CIRCUIT_HPP
#define CIRCNET_CIRCUIT_HPP

#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "circnet/gate.hpp"
#include "circnet/valueset.hpp"

namespace circnet {

enum class NodeRole { Input, Output, Compute };

struct PortRef {
  std::string node;
  int port = 0;
  bool operator==(const PortRef& o) const { return node == o.node && port == o.port; }
};

/**
 * Input and output nodes carry identity gates of arity 1.  An input node's
 * values are drawn from `domain`; an output node has exactly one parent.
 **/
struct Node {
  std::string id;
  NodeRole role = NodeRole::Compute;
  GateKind gate = GateKind::identity(1);
  std::vector<PortRef> parents;
  ValueSet domain = ValueSet::bit();  // inputs only
};

// natural order on ids: digit runs compare numerically ("n2" < "n10")
bool id_less(std::string_view a, std::string_view b);

class CircuitFault : public std::runtime_error {
public:
  CircuitFault(std::string node, const std::string& what) : std::runtime_error(what), node_(std::move(node)) {}
  const std::string& node() const { return node_; }

private:
  std::string node_;
};

class Circuit {
public:
  void add_input(const std::string& id, ValueSet domain);
  void add_gate(const std::string& id, GateKind gate, std::vector<PortRef> parents);
  void add_output(const std::string& id, PortRef parent);

  const std::map<std::string, Node>& nodes() const { return nodes_; }
  const Node& node(const std::string& id) const;
  Node& node_mut(const std::string& id);
  bool has(const std::string& id) const { return nodes_.count(id) != 0; }
  const std::vector<std::string>& inputs() const { return inputs_; }
  const std::vector<std::string>& outputs() const { return outputs_; }
  std::vector<std::string> compute_nodes() const;

  // output ports of a node (1 for inputs and outputs)
  int arity_out(const std::string& id) const;
  // children ids in ascending id order, with repetition for duplicate wires
  std::vector<std::string> children(const std::string& id) const;
  // throws CircuitFault on a cycle or a missing parent
  std::vector<std::string> topological_order() const;
  std::vector<ValueSet> input_domain() const;

  bool operator==(const Circuit& o) const;

private:
  void insert(Node n);

  std::map<std::string, Node> nodes_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

enum class IssueKind { Cycle, DanglingPort, Arity, Domain, Structure, Unused };

struct Issue {
  IssueKind kind;
  std::string node;
  std::string message;
};

struct ValidationReport {
  std::vector<Issue> errors;
  std::vector<Issue> warnings;  // unused inputs and dead compute nodes
  bool ok() const { return errors.empty(); }
  std::string str() const;
};

const char* issue_name(IssueKind k);

ValidationReport validate(const Circuit& c);
// codomain of every output port of every node, in topological order
std::map<std::string, std::vector<ValueSet>> port_sets(const Circuit& c);

// per-node values in topological order; throws CircuitFault with the node id
std::map<std::string, std::vector<Dyadic>> interpret_all(const Circuit& c, const std::vector<Dyadic>& x);
std::vector<Dyadic> interpret(const Circuit& c, const std::vector<Dyadic>& x);

/**
 * Text format, one statement per line, '#' starts a comment:
 *   circuit 1
 *   inputs: a:bit, b:grid(2)
 *   n1 = XOR[B=1](a, b)
 *   n2 = BIT_ENC[M=7,q=2](b)
 *   outputs: y = n1, s = n2.5
 * A parent reference is "id" (port 0) or "id.port".
 **/
Circuit parse_circuit(std::string_view text);
std::string emit_circuit(const Circuit& c);

std::string to_dot(const Circuit& c);

// sort each compute node's parents by ascending parent id, then port
Circuit normalize_parent_order(const Circuit& c);

}  // namespace circnet

#endif
