#include "circnet/compiler.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "circnet/bounds.hpp"
#include "circnet/fixnum.hpp"
#include "circnet/netio.hpp"
#include "stage.hpp"

namespace circnet {

// ---------------------------------------------------------------- surgery

RewiringMap RewiringMap::identity(const std::string& node, int n) {
  RewiringMap r;
  r.node = node;
  for (int i = 0; i < n; ++i) r.target.push_back(i);
  return r;
}

bool RewiringMap::surjective(int emulator_inputs) const {
  std::vector<bool> hit(static_cast<size_t>(std::max(emulator_inputs, 0)), false);
  for (int t : target) {
    if (t < 0 || t >= emulator_inputs) return false;
    hit[static_cast<size_t>(t)] = true;
  }
  return std::all_of(hit.begin(), hit.end(), [](bool b) { return b; });
}

bool RewiringMap::flawless(int emulator_inputs) const {
  return surjective(emulator_inputs) && static_cast<int>(target.size()) == emulator_inputs;
}

bool SurgeryPlan::completely_flawless(const Circuit& c) const {
  std::set<std::string> seen;
  for (const auto& s : steps) {
    if (!seen.insert(s.node).second) return false;
    if (!s.rewiring.flawless(static_cast<int>(s.emulator.net.in_width()))) return false;
  }
  auto comp = c.compute_nodes();
  return seen == std::set<std::string>(comp.begin(), comp.end());
}

std::vector<PortRef> PartialLowering::block_inputs(const std::string& node) const {
  const SurgeryStep& s = replaced.at(node);
  const Node& n = circuit.node(node);
  std::vector<PortRef> in(static_cast<size_t>(s.emulator.net.in_width()));
  std::vector<bool> set(in.size(), false);
  for (size_t i = 0; i < n.parents.size(); ++i) {
    auto t = static_cast<size_t>(s.rewiring.target[i]);
    if (!set[t]) {
      in[t] = n.parents[i];
      set[t] = true;
    }
  }
  return in;
}

std::vector<Dyadic> PartialLowering::evaluate(const std::vector<Dyadic>& x) const {
  const Circuit& c = circuit;
  if (x.size() != c.inputs().size()) throw std::invalid_argument("evaluate: input count differs from circuit");
  std::map<std::string, std::vector<Dyadic>> val;
  for (size_t i = 0; i < x.size(); ++i) val[c.inputs()[i]] = {x[i]};
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    if (n.role == NodeRole::Input) continue;
    auto it = replaced.find(id);
    std::vector<Dyadic> in;
    if (it != replaced.end()) {
      for (const auto& p : block_inputs(id)) in.push_back(val.at(p.node).at(static_cast<size_t>(p.port)));
      val[id] = it->second.emulator.evaluate(in);
      continue;
    }
    for (const auto& p : n.parents) in.push_back(val.at(p.node).at(static_cast<size_t>(p.port)));
    val[id] = n.role == NodeRole::Output ? in : gate_reference(n.gate, in);
  }
  std::vector<Dyadic> out;
  for (const auto& o : c.outputs()) out.push_back(val.at(o).at(0));
  return out;
}

PartialLowering surgery_at_node(const PartialLowering& p, const std::string& node, const GateEmulator& emulator,
                                const RewiringMap& rewiring) {
  if (!p.circuit.has(node)) throw std::invalid_argument("surgery: no node '" + node + "'");
  const Node& n = p.circuit.node(node);
  if (n.role != NodeRole::Compute) throw std::invalid_argument("surgery: '" + node + "' is not a compute node");
  if (p.replaced.count(node)) throw std::invalid_argument("surgery: '" + node + "' was already replaced");
  if (rewiring.node != node) throw std::invalid_argument("surgery: rewiring map belongs to '" + rewiring.node + "'");
  int in_w = static_cast<int>(emulator.net.in_width());
  if (rewiring.target.size() != n.parents.size())
    throw std::invalid_argument("surgery: rewiring has " + std::to_string(rewiring.target.size()) + " entries for " +
                                std::to_string(n.parents.size()) + " parent ports of '" + node + "'");
  if (!rewiring.surjective(in_w))
    throw std::invalid_argument("surgery: rewiring of '" + node + "' is not onto the " + std::to_string(in_w) +
                                " emulator inputs");
  if (emulator.net.out_width() != p.circuit.arity_out(node))
    throw std::invalid_argument("surgery: emulator has " + std::to_string(emulator.net.out_width()) +
                                " outputs, node '" + node + "' has " + std::to_string(p.circuit.arity_out(node)));
  PartialLowering out = p;
  out.replaced[node] = SurgeryStep{node, emulator, rewiring};
  return out;
}

PartialLowering surgery_at_node(const Circuit& c, const std::string& node, const GateEmulator& emulator,
                                const RewiringMap& rewiring) {
  return surgery_at_node(PartialLowering{c, {}}, node, emulator, rewiring);
}

PartialLowering apply_plan(const Circuit& c, const SurgeryPlan& plan) {
  PartialLowering p{c, {}};
  for (const auto& s : plan.steps) p = surgery_at_node(p, s.node, s.emulator, s.rewiring);
  return p;
}

SurgeryPlan canonical_plan(const Circuit& c) {
  SurgeryPlan plan;
  for (const auto& id : c.compute_nodes()) {
    const Node& n = c.node(id);
    plan.steps.push_back({id, build_gate(n.gate), RewiringMap::identity(id, static_cast<int>(n.parents.size()))});
  }
  return plan;
}

// ---------------------------------------------------------------- compile

namespace {

nlohmann::ordered_json report_json(const ComplexityReport& r) {
  nlohmann::ordered_json j;
  j["depth"] = r.depth;
  j["width"] = r.width;
  j["params"] = r.nonzero_params;
  if (r.bound_depth || r.bound_width || r.bound_params) {
    j["bound_depth"] = r.bound_depth ? nlohmann::ordered_json(*r.bound_depth) : nlohmann::ordered_json();
    j["bound_width"] = r.bound_width ? nlohmann::ordered_json(*r.bound_width) : nlohmann::ordered_json();
    j["bound_params"] = r.bound_params ? nlohmann::ordered_json(*r.bound_params) : nlohmann::ordered_json();
    j["within_bounds"] = r.within_bounds();
  }
  if (!r.source.empty()) j["source"] = r.source;
  return j;
}

}  // namespace

nlohmann::ordered_json CompileReport::to_json() const {
  nlohmann::ordered_json j;
  auto gl = nlohmann::ordered_json::array();
  for (const auto& g : gates) {
    nlohmann::ordered_json e;
    e["node"] = g.node;
    e["gate"] = g.gate;
    auto r = report_json(g.stats);
    for (auto& [k, v] : r.items()) e[k] = v;
    gl.push_back(std::move(e));
  }
  j["gates"] = std::move(gl);
  j["gate_params"] = gate_params;
  j["adapter_blocks"] = adapter_blocks;
  j["adapter_params"] = adapter_params;
  auto sk = nlohmann::ordered_json::array();
  for (const auto& s : skips)
    sk.push_back({{"from_block", s.from.block}, {"from_port", s.from.port}, {"to_block", s.to_block},
                  {"to_input", s.to_input}, {"span", s.span}});
  j["skip_wires"] = std::move(sk);
  j["skip_span_total"] = skip_span_total;
  j["total"] = report_json(total);
  return j;
}

std::string CompileReport::str() const {
  std::ostringstream os;
  size_t wn = 4, wg = 4;
  for (const auto& g : gates) {
    wn = std::max(wn, g.node.size());
    wg = std::max(wg, g.gate.size());
  }
  auto pad = [](std::string s, size_t w) {
    s.resize(std::max(w, s.size()), ' ');
    return s;
  };
  auto opt = [](std::optional<long> v) { return v ? std::to_string(*v) : std::string("-"); };
  os << pad("node", wn) << "  " << pad("gate", wg) << "  depth  width  params  bound(d/w/p)  ok\n";
  for (const auto& g : gates) {
    const auto& s = g.stats;
    std::string b = s.source.empty() ? "-" : opt(s.bound_depth) + "/" + opt(s.bound_width) + "/" + opt(s.bound_params);
    os << pad(g.node, wn) << "  " << pad(g.gate, wg) << "  " << pad(std::to_string(s.depth), 5) << "  "
       << pad(std::to_string(s.width), 5) << "  " << pad(std::to_string(s.nonzero_params), 6) << "  " << pad(b, 12)
       << "  " << (s.within_bounds() ? "yes" : "NO") << "\n";
  }
  os << "gate params     " << gate_params << "\n";
  os << "adapter params  " << adapter_params << " in " << adapter_blocks << " block(s)\n";
  os << "skip wires      " << skips.size() << " spanning " << skip_span_total << " layer(s)\n";
  os << "network         depth " << total.depth << ", width " << total.width << ", params " << total.nonzero_params
     << "\n";
  return os.str();
}

CompileResult compile(const Circuit& c, const CompileOptions& opt) {
  ValidationReport v = validate(c);
  if (!v.ok()) throw CircuitFault(v.errors.front().node, "compile: invalid circuit\n" + v.str());
  CompileResult res;
  FfnnGraph& g = res.graph;
  std::map<std::string, int> input_index;
  for (const auto& id : c.inputs()) {
    input_index[id] = static_cast<int>(g.input_names.size());
    g.input_names.push_back(id);
    g.input_domain.push_back(c.node(id).domain);
  }
  res.plan = canonical_plan(c);

  std::map<std::string, int> last_block;  // node -> block holding its outputs
  auto port_of = [&](const PortRef& p) -> GraphPort {
    auto it = input_index.find(p.node);
    if (it != input_index.end()) return {-1, it->second};
    return {last_block.at(p.node), p.port};
  };
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    if (n.role != NodeRole::Compute) continue;
    std::string label = gate_to_string(n.gate);
    LoweredGate low = lower_gate(n.gate);
    bool adapters = low.pre || low.post;
    if (adapters && opt.strict_surgery)
      throw CircuitFault(id, "compile: node '" + id + "' (" + label + ") needs codec adapters, rejected by strict surgery");
    std::vector<GraphPort> wires;
    for (const auto& p : n.parents) wires.push_back(port_of(p));

    GateLine line;
    line.node = id;
    line.gate = label;
    if (adapters && !opt.fuse) {
      auto add = [&](Net net, BlockRole role, std::vector<GraphPort> in) {
        g.blocks.push_back(GraphBlock{id, role == BlockRole::Adapter ? label + "/adapter" : label, role, std::move(net),
                                      std::move(in)});
        return static_cast<int>(g.blocks.size()) - 1;
      };
      int b = -1;
      if (low.pre) {
        b = add(*low.pre, BlockRole::Adapter, wires);
        wires.clear();
        for (Index i = 0; i < low.pre->out_width(); ++i) wires.push_back({b, static_cast<int>(i)});
        ++res.report.adapter_blocks;
        res.report.adapter_params += static_cast<long>(low.pre->nonzeros());
      }
      b = add(low.core, BlockRole::Gate, wires);
      line.stats = stats(low.core);
      if (low.post) {
        std::vector<GraphPort> mid;
        for (Index i = 0; i < low.core.out_width(); ++i) mid.push_back({b, static_cast<int>(i)});
        b = add(*low.post, BlockRole::Adapter, mid);
        ++res.report.adapter_blocks;
        res.report.adapter_params += static_cast<long>(low.post->nonzeros());
      }
      last_block[id] = b;
    } else {
      Net net = adapters ? gate_network(n.gate) : low.core;
      g.blocks.push_back(GraphBlock{id, label, BlockRole::Gate, net, wires});
      last_block[id] = static_cast<int>(g.blocks.size()) - 1;
      line.stats = stats(net);
    }
    attach_declared_bounds(n.gate, line.stats);
    res.report.gate_params += line.stats.nonzero_params;
    res.report.gates.push_back(std::move(line));
  }
  for (const auto& o : c.outputs()) {
    g.output_names.push_back(o);
    g.outputs.push_back(port_of(c.node(o).parents.at(0)));
  }
  g.check();
  std::sort(res.report.gates.begin(), res.report.gates.end(),
            [](const GateLine& a, const GateLine& b) { return id_less(a.node, b.node); });
  res.report.skips = g.skip_wires();
  for (const auto& s : res.report.skips) res.report.skip_span_total += s.span;
  res.report.total = g.stats();
  return res;
}

bool block_dag_isomorphic(const Circuit& c, const FfnnGraph& g, std::string* why) {
  auto fail = [&](const std::string& m) {
    if (why) *why = m;
    return false;
  };
  using Edge = std::tuple<std::string, int, std::string, int>;
  std::multiset<Edge> ce, ge;
  std::map<std::string, std::string> clabel, glabel;
  for (const auto& id : c.compute_nodes()) {
    const Node& n = c.node(id);
    clabel[id] = gate_to_string(n.gate);
    for (size_t i = 0; i < n.parents.size(); ++i)
      ce.insert({n.parents[i].node, n.parents[i].port, id, static_cast<int>(i)});
  }
  for (const auto& o : c.outputs()) {
    const auto& p = c.node(o).parents.at(0);
    ce.insert({p.node, p.port, o, 0});
  }
  if (g.input_names != c.inputs()) return fail("graph inputs differ from circuit inputs");
  if (g.output_names != c.outputs()) return fail("graph outputs differ from circuit outputs");
  auto src = [&](const GraphPort& p) -> std::pair<std::string, int> {
    if (p.block < 0) return {g.input_names[static_cast<size_t>(p.port)], 0};
    return {g.blocks[static_cast<size_t>(p.block)].node, p.port};
  };
  for (size_t b = 0; b < g.blocks.size(); ++b) {
    const auto& blk = g.blocks[b];
    if (blk.role == BlockRole::Gate) {
      if (glabel.count(blk.node)) return fail("node '" + blk.node + "' has two gate blocks");
      glabel[blk.node] = blk.label;
    }
    for (size_t i = 0; i < blk.inputs.size(); ++i) {
      auto [sn, sp] = src(blk.inputs[i]);
      if (sn == blk.node) continue;  // inside a contracted group
      ge.insert({sn, sp, blk.node, static_cast<int>(i)});
    }
  }
  for (size_t o = 0; o < g.outputs.size(); ++o) {
    auto [sn, sp] = src(g.outputs[o]);
    ge.insert({sn, sp, g.output_names[o], 0});
  }
  if (clabel != glabel) return fail("block labels differ from gate labels");
  if (ce != ge) return fail("block wiring differs from circuit wiring");
  return true;
}

Circuit single_gate_circuit(const GateKind& g) {
  validate_gate(g);
  Circuit c;
  auto dom = input_domain(g);
  std::vector<PortRef> parents;
  for (size_t i = 0; i < dom.size(); ++i) {
    std::string id = "x" + std::to_string(i);
    c.add_input(id, dom[i]);
    parents.push_back({id, 0});
  }
  c.add_gate("g", g, parents);
  for (int o = 0; o < output_arity(g); ++o) c.add_output("y" + std::to_string(o), {"g", o});
  return c;
}

// ---------------------------------------------------------------- verify

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t domain_size(const std::vector<ValueSet>& dom) {
  uint64_t n = 1;
  for (const auto& v : dom) {
    uint64_t s = v.size();
    if (s != 0 && n > std::numeric_limits<uint64_t>::max() / s) return std::numeric_limits<uint64_t>::max();
    n *= s;
  }
  return n;
}

std::vector<Dyadic> domain_point(const std::vector<ValueSet>& dom, uint64_t index) {
  std::vector<Dyadic> x(dom.size());
  for (size_t i = dom.size(); i-- > 0;) {
    uint64_t s = dom[i].size();
    x[i] = dom[i].at(index % s);
    index /= s;
  }
  return x;
}

std::vector<Dyadic> domain_sample(const std::vector<ValueSet>& dom, uint64_t seed, uint64_t index) {
  std::vector<Dyadic> x(dom.size());
  uint64_t h = splitmix64(seed ^ splitmix64(index));
  for (size_t i = 0; i < dom.size(); ++i) {
    h = splitmix64(h + i);
    x[i] = dom[i].at(h % dom[i].size());
  }
  return x;
}

namespace {

// circuit flattened to slots for repeated interpretation
struct Program {
  struct Step {
    GateKind gate;
    std::vector<std::pair<int, int>> in;  // (step or -1-input, port)
  };
  std::vector<Step> steps;
  std::vector<std::pair<int, int>> out;

  explicit Program(const Circuit& c) {
    std::map<std::string, int> where, input;
    for (size_t i = 0; i < c.inputs().size(); ++i) input[c.inputs()[i]] = -1 - static_cast<int>(i);
    auto ref = [&](const PortRef& p) -> std::pair<int, int> {
      auto it = input.find(p.node);
      if (it != input.end()) return {it->second, 0};
      return {where.at(p.node), p.port};
    };
    for (const auto& id : c.topological_order()) {
      const Node& n = c.node(id);
      if (n.role != NodeRole::Compute) continue;
      Step s{n.gate, {}};
      for (const auto& p : n.parents) s.in.push_back(ref(p));
      where[id] = static_cast<int>(steps.size());
      steps.push_back(std::move(s));
    }
    for (const auto& o : c.outputs()) out.push_back(ref(c.node(o).parents.at(0)));
  }

  std::vector<Dyadic> run(const std::vector<Dyadic>& x) const {
    std::vector<std::vector<Dyadic>> val(steps.size());
    auto get = [&](std::pair<int, int> r) -> const Dyadic& {
      if (r.first < 0) return x[static_cast<size_t>(-1 - r.first)];
      return val[static_cast<size_t>(r.first)][static_cast<size_t>(r.second)];
    };
    std::vector<Dyadic> in;
    for (size_t i = 0; i < steps.size(); ++i) {
      in.clear();
      for (auto r : steps[i].in) in.push_back(get(r));
      val[i] = gate_reference(steps[i].gate, in);
    }
    std::vector<Dyadic> y;
    for (auto r : out) y.push_back(get(r));
    return y;
  }
};

struct Shard {
  uint64_t checked = 0;
  uint64_t mismatches = 0;
  std::vector<Counterexample> cex;
};

constexpr size_t kMaxCounterexamples = 10;

std::string vec_str(const std::vector<Dyadic>& v) {
  std::string s = "(";
  for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i].decimal();
  return s + ")";
}

}  // namespace

nlohmann::ordered_json Certificate::to_json() const {
  nlohmann::ordered_json j;
  j["circuit_hash"] = circuit_hash;
  j["network_hash"] = network_hash;
  j["domain"] = domain;
  j["domain_size"] = domain_size;
  j["mode"] = mode == VerifyMode::Exhaustive ? "exhaustive" : "random";
  if (mode == VerifyMode::Random) j["seed"] = seed;
  j["checked"] = checked;
  j["mismatches"] = mismatches;
  auto cx = nlohmann::ordered_json::array();
  for (const auto& c : counterexamples)
    cx.push_back({{"index", c.index}, {"input", vec_str(c.input)}, {"expected", vec_str(c.expected)},
                  {"got", vec_str(c.got)}});
  j["counterexamples"] = std::move(cx);
  j["passed"] = passed();
  j["seconds"] = seconds;
  return j;
}

Certificate verify_equivalence(const Circuit& c, const FfnnGraph& g, const VerifyOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  ValidationReport v = validate(c);
  if (!v.ok()) throw std::invalid_argument("verify: invalid circuit\n" + v.str());
  g.check();
  auto dom = c.input_domain();
  if (!(dom == g.input_domain)) throw std::invalid_argument("verify: circuit and network input domains differ");
  if (c.outputs().size() != g.outputs.size())
    throw std::invalid_argument("verify: circuit has " + std::to_string(c.outputs().size()) + " outputs, network " +
                                std::to_string(g.outputs.size()));
  Certificate cert;
  cert.circuit_hash = hex64(fnv1a(emit_circuit(c)));
  cert.network_hash = hex64(fnv1a(serialize_graph(g)));
  for (size_t i = 0; i < dom.size(); ++i) cert.domain += (i ? " x " : "") + dom[i].str();
  if (dom.empty()) cert.domain = "point";
  cert.domain_size = domain_size(dom);
  cert.mode = opt.mode;
  if (opt.exhaustive_cap < 1) throw std::invalid_argument("verify: exhaustive cap must be at least 1");
  if (cert.mode == VerifyMode::Exhaustive && cert.domain_size > opt.exhaustive_cap) {
    if (!opt.allow_fallback)
      throw std::invalid_argument("verify: domain of " + std::to_string(cert.domain_size) +
                                  " points exceeds the exhaustive cap " + std::to_string(opt.exhaustive_cap));
    cert.mode = VerifyMode::Random;
  }
  cert.seed = opt.seed;
  uint64_t total = cert.mode == VerifyMode::Exhaustive ? cert.domain_size : opt.samples;
  Program prog(c);

  unsigned threads = opt.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : opt.threads;
  threads = static_cast<unsigned>(std::min<uint64_t>(threads, std::max<uint64_t>(total, 1)));
  std::vector<Shard> shards(threads);
  auto work = [&](unsigned s) {
    uint64_t lo = total * s / threads, hi = total * (s + 1) / threads;
    Shard& sh = shards[s];
    for (uint64_t i = lo; i < hi; ++i) {
      auto x = cert.mode == VerifyMode::Exhaustive ? domain_point(dom, i) : domain_sample(dom, opt.seed, i);
      auto want = prog.run(x);
      auto got = g.evaluate(x);
      ++sh.checked;
      if (want != got) {
        ++sh.mismatches;
        if (sh.cex.size() < kMaxCounterexamples) sh.cex.push_back({i, x, want, got});
      }
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned s = 0; s < threads; ++s) pool.emplace_back(work, s);
    for (auto& t : pool) t.join();
  }
  for (auto& sh : shards) {
    cert.checked += sh.checked;
    cert.mismatches += sh.mismatches;
    cert.counterexamples.insert(cert.counterexamples.end(), sh.cex.begin(), sh.cex.end());
  }
  std::sort(cert.counterexamples.begin(), cert.counterexamples.end(),
            [](const Counterexample& a, const Counterexample& b) { return a.index < b.index; });
  if (cert.counterexamples.size() > kMaxCounterexamples) cert.counterexamples.resize(kMaxCounterexamples);
  cert.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return cert;
}

Certificate verify_equivalence(const Circuit& c, const Net& net, const VerifyOptions& opt) {
  FfnnGraph g = FfnnGraph::from_net(net, c.input_domain());
  g.input_names = c.inputs();
  g.output_names = c.outputs();
  if (static_cast<size_t>(net.out_width()) != c.outputs().size())
    throw std::invalid_argument("verify: circuit has " + std::to_string(c.outputs().size()) + " outputs, network " +
                                std::to_string(net.out_width()));
  return verify_equivalence(c, g, opt);
}

// -------------------------------------------------------------- universal

uint64_t GridTable::points() const {
  check_precision(q);
  if (d < 1) throw std::invalid_argument("GridTable: d must be positive");
  uint64_t g = ValueSet::grid(q).size(), n = 1;
  for (int i = 0; i < d; ++i) {
    if (n > std::numeric_limits<uint64_t>::max() / g) throw std::overflow_error("GridTable: too many points");
    n *= g;
  }
  return n;
}

std::vector<Dyadic> GridTable::point(uint64_t index) const {
  return domain_point(std::vector<ValueSet>(static_cast<size_t>(d), ValueSet::grid(q)), index);
}

uint64_t GridTable::index_of(const std::vector<Dyadic>& x) const {
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("GridTable: point has wrong dimension");
  ValueSet gs = ValueSet::grid(q);
  uint64_t i = 0;
  for (const auto& v : x) i = i * gs.size() + gs.index_of(v);
  return i;
}

namespace {

using detail::Form;
using detail::Forms;

Net hat_encoder(int d, int q) {
  ValueSet gs = ValueSet::grid(q);
  const int64_t G = static_cast<int64_t>(gs.size());
  int64_t n1 = 1;
  for (int i = 0; i < d; ++i) n1 *= G;
  NetBuilder<Dyadic> nb(d);
  Forms x = nb.inputs();
  // u_i = 2^q x_i + (G-1)/2 in {0..G-1}; s = sum u_i G^(d-1-i) in {0..N1-1}
  Form s(Dyadic(0));
  int64_t place = n1;
  for (int i = 0; i < d; ++i) {
    place /= G;
    s += x[static_cast<size_t>(i)] * Dyadic::pow2(q) * Dyadic(place);
    s += Form(Dyadic((G - 1) / 2 * place));
  }
  Form t = nb.relu1(s);
  t = nb.relu1(t);
  t = nb.relu1(t);
  Forms pre{t};
  for (int64_t j = 1; j <= n1 - 2; ++j) pre.push_back(t - Form(Dyadic(j)));
  Forms u = nb.relu(pre);  // u_j = ReLU(s - j), j = 0..N1-2
  Forms e;
  auto U = [&](int64_t j) { return u[static_cast<size_t>(j)]; };
  if (n1 == 1) {
    e.push_back(Form(Dyadic(1)));
  } else if (n1 == 2) {
    e.push_back(Form(Dyadic(1)) - U(0));
    e.push_back(U(0));
  } else {
    e.push_back(Form(Dyadic(1)) - U(0) + U(1));
    for (int64_t k = 1; k <= n1 - 3; ++k) e.push_back(U(k - 1) - U(k) * Dyadic(2) + U(k + 1));
    e.push_back(U(n1 - 3) - U(n1 - 2) * Dyadic(2));
    e.push_back(U(n1 - 2));
  }
  return nb.finish(e);
}

Net point_encoder(int d, int q) {
  GridTable t;
  t.d = d;
  t.q = q;
  std::vector<Net> nets;
  uint64_t n = t.points();
  for (uint64_t i = 0; i < n; ++i) nets.push_back(gate_network(GateKind::point(t.point(i), q)));
  return parallelize(nets, InputMode::Shared);
}

}  // namespace

Net LookupNetwork::network() const {
  SparseRows<Dyadic> b(1, static_cast<Index>(beta.size()));
  std::vector<Eigen::Triplet<Dyadic>> tr;
  for (size_t i = 0; i < beta.size(); ++i)
    if (!beta[i].is_zero()) tr.emplace_back(0, static_cast<Index>(i), beta[i]);
  b.setFromTriplets(tr.begin(), tr.end());
  Vec zero = Vec::Zero(1);
  return postcompose_linear(encoder, b, zero);
}

Dyadic LookupNetwork::evaluate(const std::vector<Dyadic>& x) const {
  Vec e = encoder.evaluate(to_vec(x));
  Dyadic y(0);
  for (size_t i = 0; i < beta.size(); ++i) y += beta[i] * e[static_cast<Index>(i)];
  return y;
}

LookupNetwork build_universal(const GridTable& f, EncoderKind kind, uint64_t cap) {
  uint64_t n1 = f.points();
  if (n1 > cap)
    throw std::invalid_argument("build_universal: " + std::to_string(n1) + " grid points exceed the cap " +
                                std::to_string(cap));
  if (f.values.size() != n1)
    throw std::invalid_argument("build_universal: table has " + std::to_string(f.values.size()) + " values for " +
                                std::to_string(n1) + " grid points");
  LookupNetwork L;
  L.d = f.d;
  L.q = f.q;
  L.kind = kind;
  L.encoder = kind == EncoderKind::Hat ? hat_encoder(f.d, f.q) : point_encoder(f.d, f.q);
  L.beta = f.values;
  return L;
}

Dyadic bump_scale(const std::vector<std::vector<Dyadic>>& X, int q) {
  // a = 1 / min(gap/2, 2^-(q+1)) where gap is the smallest coordinate gap
  Dyadic half_gap;
  bool have = false;
  for (size_t i = 0; i < X.size(); ++i)
    for (size_t k = i + 1; k < X.size(); ++k)
      for (size_t j = 0; j < X[i].size(); ++j) {
        Dyadic gap = abs(X[i][j] - X[k][j]);
        if (gap.is_zero()) continue;
        Dyadic h = gap.ldexp(-1);
        if (!have || h < half_gap) half_gap = h;
        have = true;
      }
  Dyadic cell = Dyadic::pow2(-(q + 1));
  Dyadic m = have ? min(half_gap, cell) : cell;
  return Dyadic(1) / m;
}

Net build_universal_bump(const std::vector<std::vector<Dyadic>>& X, const std::vector<std::vector<Dyadic>>& Y, int q,
                         const BumpOptions& opt) {
  check_precision(q);
  if (X.empty()) throw std::invalid_argument("bump: no samples");
  if (X.size() != Y.size()) throw std::invalid_argument("bump: X and Y differ in length");
  size_t d = X.front().size(), D = Y.front().size();
  if (d == 0 || D == 0) throw std::invalid_argument("bump: empty sample point or value");
  for (size_t n = 0; n < X.size(); ++n) {
    if (X[n].size() != d || Y[n].size() != D) throw std::invalid_argument("bump: ragged samples");
    for (const auto& v : X[n])
      if (!on_grid(v, q)) throw std::invalid_argument("bump: sample coordinate " + v.decimal() + " is off the grid");
  }
  {
    std::set<std::vector<std::pair<int64_t, int>>> seen;
    for (const auto& x : X) {
      std::vector<std::pair<int64_t, int>> key;
      for (const auto& v : x) key.emplace_back(v.mantissa(), v.exponent());
      if (!seen.insert(key).second) throw std::invalid_argument("bump: duplicate sample point " + vec_str(x));
    }
  }
  Dyadic a = bump_scale(X, q);
  NetBuilder<Dyadic> nb(static_cast<Index>(d));
  Forms x = nb.inputs();
  const Dyadic offs[4] = {Dyadic::from_parts(3, 1), Dyadic::from_parts(1, 1), Dyadic::from_parts(-1, 1),
                          Dyadic::from_parts(-3, 1)};
  // layer 1: ReLU(a (x_j - b) + c), shared between samples with equal (j, b)
  Forms pre;
  std::map<std::pair<size_t, std::pair<int64_t, int>>, size_t> unit;
  for (const auto& xs : X)
    for (size_t j = 0; j < d; ++j) {
      auto key = std::make_pair(j, std::make_pair(xs[j].mantissa(), xs[j].exponent()));
      if (unit.count(key)) continue;
      unit[key] = pre.size();
      for (const auto& c : offs) pre.push_back(x[j] * a - Form(a * xs[j]) + Form(c));
    }
  Forms h = nb.relu(pre);
  std::vector<Forms> factors;
  for (const auto& xs : X) {
    Forms f;
    for (size_t j = 0; j < d; ++j) {
      size_t u = unit.at(std::make_pair(j, std::make_pair(xs[j].mantissa(), xs[j].exponent())));
      f.push_back(h[u] - h[u + 1] - h[u + 2] + h[u + 3]);
    }
    factors.push_back(std::move(f));
  }
  // product over coordinates; all factors are 0 or 1 on grid points
  while (factors.front().size() > 1) {
    Forms layer;
    std::vector<std::vector<std::pair<size_t, int>>> plan(factors.size());
    for (size_t n = 0; n < factors.size(); ++n) {
      const Forms& f = factors[n];
      for (size_t k = 0; k + 1 < f.size(); k += 2) {
        if (opt.product == ProductMode::MinTree) {
          plan[n].push_back({layer.size(), 2});
          layer.push_back(f[k + 1]);
          layer.push_back(f[k + 1] - f[k]);
        } else {
          plan[n].push_back({layer.size(), 1});
          layer.push_back(f[k] + f[k + 1] - Form(Dyadic(1)));
        }
      }
      if (f.size() % 2) {
        plan[n].push_back({layer.size(), 0});
        layer.push_back(f.back());
      }
    }
    Forms r = nb.relu(layer);
    for (size_t n = 0; n < factors.size(); ++n) {
      Forms next;
      for (auto [at, kind] : plan[n]) next.push_back(kind == 2 ? r[at] - r[at + 1] : r[at]);
      factors[n] = std::move(next);
    }
  }
  Forms out(D, Form(Dyadic(0)));
  for (size_t n = 0; n < X.size(); ++n)
    for (size_t k = 0; k < D; ++k)
      if (!Y[n][k].is_zero()) out[k] += factors[n][0] * Y[n][k];
  return nb.finish(out);
}

}  // namespace circnet
