#include "circnet/ffnn.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "circnet/netio.hpp"
#include "stage.hpp"

namespace circnet {

namespace {

std::string port_str(const GraphPort& p) {
  return (p.block < 0 ? std::string("in") : "b" + std::to_string(p.block)) + ":" + std::to_string(p.port);
}

GraphPort parse_port(const std::string& s) {
  auto colon = s.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("graph file: bad port '" + s + "'");
  GraphPort p;
  std::string head = s.substr(0, colon);
  p.port = std::stoi(s.substr(colon + 1));
  if (head == "in") p.block = -1;
  else if (head.size() > 1 && head[0] == 'b') p.block = std::stoi(head.substr(1));
  else throw std::invalid_argument("graph file: bad port '" + s + "'");
  return p;
}

}  // namespace

FfnnGraph FfnnGraph::from_net(const Net& net, std::vector<ValueSet> domain) {
  FfnnGraph g;
  if (static_cast<Index>(domain.size()) != net.in_width())
    throw std::invalid_argument("from_net: domain size differs from network input width");
  for (Index i = 0; i < net.in_width(); ++i) g.input_names.push_back("x" + std::to_string(i));
  g.input_domain = std::move(domain);
  GraphBlock b;
  b.node = "net";
  b.label = "mlp";
  b.net = net;
  for (Index i = 0; i < net.in_width(); ++i) b.inputs.push_back({-1, static_cast<int>(i)});
  g.blocks.push_back(std::move(b));
  for (Index i = 0; i < net.out_width(); ++i) {
    g.output_names.push_back("y" + std::to_string(i));
    g.outputs.push_back({0, static_cast<int>(i)});
  }
  return g;
}

void FfnnGraph::check() const {
  if (input_names.size() != input_domain.size()) throw std::invalid_argument("graph: input names and domains differ in length");
  if (output_names.size() != outputs.size()) throw std::invalid_argument("graph: output names and ports differ in length");
  auto ok_port = [&](const GraphPort& p, int before) {
    if (p.block < 0) return p.port >= 0 && static_cast<size_t>(p.port) < input_names.size();
    if (p.block >= before) return false;
    return p.port >= 0 && p.port < blocks[static_cast<size_t>(p.block)].net.out_width();
  };
  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& blk = blocks[b];
    if (static_cast<Index>(blk.inputs.size()) != blk.net.in_width())
      throw std::invalid_argument("graph: block " + std::to_string(b) + " has " + std::to_string(blk.inputs.size()) +
                                  " wires for " + std::to_string(blk.net.in_width()) + " inputs");
    for (const auto& p : blk.inputs)
      if (!ok_port(p, static_cast<int>(b)))
        throw std::invalid_argument("graph: block " + std::to_string(b) + " reads invalid port " + port_str(p));
  }
  for (const auto& p : outputs)
    if (!ok_port(p, static_cast<int>(blocks.size()))) throw std::invalid_argument("graph: invalid output port " + port_str(p));
}

std::vector<Dyadic> FfnnGraph::evaluate_in_order(const std::vector<Dyadic>& x, const std::vector<int>& order) const {
  if (x.size() != input_names.size())
    throw std::invalid_argument("evaluate: " + std::to_string(x.size()) + " inputs given, graph has " +
                                std::to_string(input_names.size()));
  if (order.size() != blocks.size()) throw std::invalid_argument("evaluate: order must list every block once");
  std::vector<std::optional<Vec>> out(blocks.size());
  auto read = [&](const GraphPort& p) -> Dyadic {
    if (p.block < 0) return x.at(static_cast<size_t>(p.port));
    const auto& v = out.at(static_cast<size_t>(p.block));
    if (!v) throw std::invalid_argument("evaluate: block order is not topological");
    return (*v)[p.port];
  };
  for (int b : order) {
    const auto& blk = blocks.at(static_cast<size_t>(b));
    if (out[static_cast<size_t>(b)]) throw std::invalid_argument("evaluate: block listed twice");
    Vec in(static_cast<Index>(blk.inputs.size()));
    for (size_t i = 0; i < blk.inputs.size(); ++i) in[static_cast<Index>(i)] = read(blk.inputs[i]);
    out[static_cast<size_t>(b)] = blk.net.evaluate(in);
  }
  std::vector<Dyadic> y;
  for (const auto& p : outputs) y.push_back(read(p));
  return y;
}

std::vector<Dyadic> FfnnGraph::evaluate(const std::vector<Dyadic>& x) const {
  std::vector<int> order(blocks.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  return evaluate_in_order(x, order);
}

std::vector<int> FfnnGraph::start_layers() const {
  std::vector<int> start(blocks.size(), 0), end(blocks.size(), 0);
  for (size_t b = 0; b < blocks.size(); ++b) {
    int s = 0;
    for (const auto& p : blocks[b].inputs)
      if (p.block >= 0) s = std::max(s, end[static_cast<size_t>(p.block)]);
    start[b] = s;
    end[b] = s + blocks[b].net.depth();
  }
  return start;
}

int FfnnGraph::depth() const {
  auto start = start_layers();
  int d = 0;
  for (size_t b = 0; b < blocks.size(); ++b) d = std::max(d, start[b] + blocks[b].net.depth());
  return d;
}

long FfnnGraph::width() const {
  auto start = start_layers();
  std::map<int, long> per_layer;
  for (size_t b = 0; b < blocks.size(); ++b) {
    const auto& layers = blocks[b].net.layers();
    for (size_t l = 0; l + 1 < layers.size(); ++l) per_layer[start[b] + static_cast<int>(l)] += layers[l].out_width();
  }
  long w = 0;
  for (const auto& [l, n] : per_layer) w = std::max(w, n);
  return w;
}

long FfnnGraph::params() const {
  long n = 0;
  for (const auto& b : blocks) n += static_cast<long>(b.net.nonzeros());
  return n;
}

std::vector<SkipWire> FfnnGraph::skip_wires() const {
  auto start = start_layers();
  std::vector<SkipWire> out;
  for (size_t b = 0; b < blocks.size(); ++b)
    for (size_t i = 0; i < blocks[b].inputs.size(); ++i) {
      const GraphPort& p = blocks[b].inputs[i];
      int end = p.block < 0 ? 0 : start[static_cast<size_t>(p.block)] + blocks[static_cast<size_t>(p.block)].net.depth();
      if (end < start[b]) out.push_back({p, static_cast<int>(b), static_cast<int>(i), start[b] - end});
    }
  int d = depth();
  for (size_t o = 0; o < outputs.size(); ++o) {
    const GraphPort& p = outputs[o];
    int end = p.block < 0 ? 0 : start[static_cast<size_t>(p.block)] + blocks[static_cast<size_t>(p.block)].net.depth();
    if (end < d) out.push_back({p, -1, static_cast<int>(o), d - end});
  }
  return out;
}

ComplexityReport FfnnGraph::stats() const {
  ComplexityReport r;
  r.depth = depth();
  r.width = width();
  r.nonzero_params = params();
  return r;
}

nlohmann::ordered_json graph_to_json(const FfnnGraph& g) {
  g.check();
  nlohmann::ordered_json j;
  j["format_version"] = kNetFormatVersion;
  j["kind"] = "ffnn";
  auto ins = nlohmann::ordered_json::array();
  for (size_t i = 0; i < g.input_names.size(); ++i)
    ins.push_back({{"name", g.input_names[i]}, {"domain", g.input_domain[i].str()}});
  j["inputs"] = std::move(ins);
  auto blocks = nlohmann::ordered_json::array();
  for (const auto& b : g.blocks) {
    nlohmann::ordered_json jb;
    jb["node"] = b.node;
    jb["label"] = b.label;
    jb["role"] = b.role == BlockRole::Gate ? "gate" : "adapter";
    auto wires = nlohmann::ordered_json::array();
    for (const auto& p : b.inputs) wires.push_back(port_str(p));
    jb["inputs"] = std::move(wires);
    jb["net"] = net_to_json(b.net);
    blocks.push_back(std::move(jb));
  }
  j["blocks"] = std::move(blocks);
  auto outs = nlohmann::ordered_json::array();
  for (size_t i = 0; i < g.outputs.size(); ++i) outs.push_back({{"name", g.output_names[i]}, {"from", port_str(g.outputs[i])}});
  j["outputs"] = std::move(outs);
  return j;
}

FfnnGraph graph_from_json(const nlohmann::json& j) {
  if (j.at("format_version").get<int>() != kNetFormatVersion) throw std::invalid_argument("graph file: unsupported format_version");
  if (j.at("kind").get<std::string>() != "ffnn") throw std::invalid_argument("graph file: kind must be \"ffnn\"");
  FfnnGraph g;
  for (const auto& in : j.at("inputs")) {
    g.input_names.push_back(in.at("name").get<std::string>());
    g.input_domain.push_back(ValueSet::parse(in.at("domain").get<std::string>()));
  }
  for (const auto& jb : j.at("blocks")) {
    GraphBlock b;
    b.node = jb.at("node").get<std::string>();
    b.label = jb.at("label").get<std::string>();
    std::string role = jb.at("role").get<std::string>();
    if (role != "gate" && role != "adapter") throw std::invalid_argument("graph file: unknown block role '" + role + "'");
    b.role = role == "gate" ? BlockRole::Gate : BlockRole::Adapter;
    for (const auto& w : jb.at("inputs")) b.inputs.push_back(parse_port(w.get<std::string>()));
    b.net = net_from_json(jb.at("net"));
    g.blocks.push_back(std::move(b));
  }
  for (const auto& o : j.at("outputs")) {
    g.output_names.push_back(o.at("name").get<std::string>());
    g.outputs.push_back(parse_port(o.at("from").get<std::string>()));
  }
  g.check();
  return g;
}

std::string serialize_graph(const FfnnGraph& g) { return graph_to_json(g).dump(1) + "\n"; }

FfnnGraph deserialize_graph(const std::string& text) {
  auto j = nlohmann::json::parse(text);
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "mlp") {
    Net n = net_from_json(j);
    return FfnnGraph::from_net(n, std::vector<ValueSet>(static_cast<size_t>(n.in_width()), ValueSet::all()));
  }
  return graph_from_json(j);
}

Net flatten(const FfnnGraph& g) {
  using detail::Form;
  using detail::Forms;
  g.check();
  detail::Stage st(static_cast<Index>(g.input_names.size()));
  Forms xin = st.inputs();
  auto start = g.start_layers();
  size_t nb = g.blocks.size();

  // remaining readers per value, so carried values are dropped once consumed
  std::map<std::pair<int, int>, int> readers;
  for (const auto& b : g.blocks)
    for (const auto& p : b.inputs) ++readers[{p.block, p.port}];
  for (const auto& p : g.outputs) ++readers[{p.block, p.port}];

  std::map<std::pair<int, int>, int> slot;  // value -> held slot
  for (size_t i = 0; i < g.input_names.size(); ++i) {
    std::pair<int, int> key{-1, static_cast<int>(i)};
    if (readers.count(key)) slot[key] = st.hold({xin[i]}, !(g.input_domain[i].finite() && g.input_domain[i].lo >= Dyadic(0)));
  }
  auto read = [&](const GraphPort& p) {
    std::pair<int, int> key{p.block, p.port};
    Form f = st.peek(slot.at(key)).front();
    if (--readers[key] == 0) {
      st.take(slot.at(key));
      slot.erase(key);
    }
    return f;
  };

  std::vector<Forms> cur(nb);
  std::vector<int> layer_of(nb, -1);  // next layer index of a running block, -1 = not started
  int depth = g.depth();
  size_t next = 0;
  for (int l = 0;; ++l) {
    // start every block whose start layer is l; depth-0 blocks finish at once
    bool progress = true;
    while (progress) {
      progress = false;
      for (size_t b = next; b < nb; ++b) {
        if (layer_of[b] >= 0 || start[b] != l) continue;
        bool ready = true;
        for (const auto& p : g.blocks[b].inputs)
          if (p.block >= 0 && !slot.count({p.block, p.port}) && layer_of[static_cast<size_t>(p.block)] != -2) ready = false;
        if (!ready) continue;
        Forms in;
        for (const auto& p : g.blocks[b].inputs) in.push_back(read(p));
        cur[b] = in;
        layer_of[b] = 0;
        if (g.blocks[b].net.depth() == 0) {
          Forms outv = detail::affine_apply(g.blocks[b].net.layers().back(), cur[b]);
          for (size_t o = 0; o < outv.size(); ++o) {
            std::pair<int, int> key{static_cast<int>(b), static_cast<int>(o)};
            if (readers.count(key)) slot[key] = st.hold({outv[o]}, true);
          }
          layer_of[b] = -2;
        }
        progress = true;
      }
      while (next < nb && layer_of[next] == -2) ++next;
    }
    if (l == depth) break;
    Forms pre;
    std::vector<std::pair<size_t, size_t>> pos(nb, {0, 0});
    for (size_t b = 0; b < nb; ++b) {
      if (layer_of[b] < 0) continue;
      Forms z = detail::affine_apply(g.blocks[b].net.layers()[static_cast<size_t>(layer_of[b])], cur[b]);
      pos[b] = {pre.size(), z.size()};
      pre.insert(pre.end(), z.begin(), z.end());
    }
    Forms h = st.relu(pre);
    for (size_t b = 0; b < nb; ++b) {
      if (layer_of[b] < 0) continue;
      cur[b] = detail::slice(h, pos[b].first, pos[b].second);
      if (++layer_of[b] == g.blocks[b].net.depth()) {
        Forms outv = detail::affine_apply(g.blocks[b].net.layers().back(), cur[b]);
        for (size_t o = 0; o < outv.size(); ++o) {
          std::pair<int, int> key{static_cast<int>(b), static_cast<int>(o)};
          if (readers.count(key)) slot[key] = st.hold({outv[o]}, true);
        }
        layer_of[b] = -2;
      }
    }
  }
  Forms outs;
  for (const auto& p : g.outputs) outs.push_back(read(p));
  return st.finish(outs);
}

std::string to_dot(const FfnnGraph& g) {
  std::ostringstream os;
  os << "digraph ffnn {\n  rankdir=LR;\n";
  for (size_t i = 0; i < g.input_names.size(); ++i)
    os << "  in" << i << " [label=\"" << g.input_names[i] << "\\n" << g.input_domain[i].str() << "\", shape=invhouse];\n";
  for (size_t b = 0; b < g.blocks.size(); ++b) {
    const auto& blk = g.blocks[b];
    auto s = stats(blk.net);
    os << "  b" << b << " [label=\"" << blk.node << "\\n" << blk.label << "\\nD=" << s.depth << " W=" << s.width
       << " P=" << s.nonzero_params << "\", shape=box" << (blk.role == BlockRole::Adapter ? ", style=dashed" : "")
       << "];\n";
  }
  for (size_t o = 0; o < g.output_names.size(); ++o)
    os << "  out" << o << " [label=\"" << g.output_names[o] << "\", shape=house];\n";
  auto src = [](const GraphPort& p) { return (p.block < 0 ? "in" + std::to_string(p.port) : "b" + std::to_string(p.block)); };
  auto skips = g.skip_wires();
  for (size_t b = 0; b < g.blocks.size(); ++b)
    for (size_t i = 0; i < g.blocks[b].inputs.size(); ++i) {
      const auto& p = g.blocks[b].inputs[i];
      bool skip = std::any_of(skips.begin(), skips.end(), [&](const SkipWire& s) {
        return s.to_block == static_cast<int>(b) && s.to_input == static_cast<int>(i);
      });
      os << "  " << src(p) << " -> b" << b << " [label=\"" << p.port << ":" << i << "\"" << (skip ? ", style=dotted" : "")
         << "];\n";
    }
  for (size_t o = 0; o < g.outputs.size(); ++o) os << "  " << src(g.outputs[o]) << " -> out" << o << ";\n";
  os << "}\n";
  return os.str();
}

}  // namespace circnet
