#ifndef CIRCNET_FFNN_HPP
#define CIRCNET_FFNN_HPP

#include <string>
#include <vector>

#include <json.hpp>

#include "circnet/relunet.hpp"
#include "circnet/valueset.hpp"

namespace circnet {

// block < 0 addresses graph input `port`
struct GraphPort {
  int block = -1;
  int port = 0;
  bool operator==(const GraphPort& o) const { return block == o.block && port == o.port; }
};

enum class BlockRole { Gate, Adapter };

struct GraphBlock {
  std::string node;   // circuit node the block came from
  std::string label;  // gate text
  BlockRole role = BlockRole::Gate;
  Net net;
  std::vector<GraphPort> inputs;  // one per net input
};

/**
 * Edge whose source finishes before its consumer starts; the value rides
 * along unchanged for `span` hidden layers.
 **/
struct SkipWire {
  GraphPort from;
  int to_block = 0;
  int to_input = 0;
  int span = 0;
};

/**
 * Feedforward DAG of MLP blocks.  Blocks are stored in topological order.
 * Layer accounting: a block starts at the latest end of its sources (graph
 * inputs end at 0) and ends depth(net) later; seams between blocks are
 * affine-affine and cost no hidden layer.
 **/
class FfnnGraph {
public:
  std::vector<std::string> input_names;
  std::vector<ValueSet> input_domain;
  std::vector<GraphBlock> blocks;
  std::vector<std::string> output_names;
  std::vector<GraphPort> outputs;

  static FfnnGraph from_net(const Net& net, std::vector<ValueSet> domain);

  // throws std::invalid_argument when ports or widths do not line up
  void check() const;
  std::vector<Dyadic> evaluate(const std::vector<Dyadic>& x) const;
  // evaluates blocks in the given order, which must be a topological one
  std::vector<Dyadic> evaluate_in_order(const std::vector<Dyadic>& x, const std::vector<int>& order) const;

  std::vector<int> start_layers() const;
  int depth() const;
  long width() const;   // max over hidden layers of the units active there
  long params() const;  // sum over blocks; skip wires are free
  std::vector<SkipWire> skip_wires() const;
  ComplexityReport stats() const;
};

// network files with kind "ffnn"
nlohmann::ordered_json graph_to_json(const FfnnGraph& g);
FfnnGraph graph_from_json(const nlohmann::json& j);
std::string serialize_graph(const FfnnGraph& g);
// accepts kind "ffnn" or "mlp" (wrapped as one block)
FfnnGraph deserialize_graph(const std::string& text);

/**
 * Plain MLP with the same function: skip wires become identity padding,
 * blocks sharing a layer are stacked.  Width and parameter growth is the
 * price of dropping the skips.
 **/
Net flatten(const FfnnGraph& g);

std::string to_dot(const FfnnGraph& g);

}  // namespace circnet

#endif
