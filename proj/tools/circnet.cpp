// circnet: command-line front end for the circuit-to-network compiler.
#include <cctype>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "circnet/apps.hpp"
#include "circnet/bounds.hpp"
#include "circnet/circuit.hpp"
#include "circnet/compiler.hpp"
#include "circnet/ffnn.hpp"
#include "circnet/fixnum.hpp"
#include "circnet/gatelib.hpp"
#include "circnet/netio.hpp"

using namespace circnet;

namespace {

struct Globals {
  int q = 2;
  uint64_t seed = 1;
  unsigned threads = 1;
  uint64_t exhaustive_cap = uint64_t(1) << 20;
  bool strict_surgery = false;
  bool fuse = false;
};

// errors raised while reading `path` get the path prepended
template <typename F>
auto with_path(const std::string& path, F f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (msg.rfind(path, 0) == 0) throw;
    throw std::runtime_error(path + ": " + msg);
  }
}

bool looks_like_json(const std::string& text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) continue;
    return c == '{';
  }
  return false;
}

Circuit load_circuit(const std::string& path) {
  std::string text = load_text(path);
  return with_path(path, [&] { return parse_circuit(text); });
}

// a network file holds either one plain MLP or an FFNN block graph
using Network = std::variant<Net, FfnnGraph>;

Network load_network(const std::string& path) {
  std::string text = load_text(path);
  return with_path(path, [&]() -> Network {
    auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") == "mlp") return net_from_json(j);
    return graph_from_json(j);
  });
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") std::cout << text;
  else save_text(path, text);
}

std::string join(const std::vector<Dyadic>& v, bool as_bits) {
  if (as_bits) return BitString::from_values(v).str();
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) s += (i ? " " : "") + v[i].decimal();
  return s;
}

// "0b0101" expands to four bit values, anything else is one dyadic
std::vector<Dyadic> parse_values(const std::vector<std::string>& tokens) {
  std::vector<Dyadic> x;
  for (const auto& t : tokens) {
    if (t.rfind("0b", 0) == 0) {
      for (auto v : BitString::parse(t).to_values()) x.push_back(v);
    } else {
      x.push_back(Dyadic::parse(t));
    }
  }
  return x;
}

VerifyOptions verify_options(const Globals& g) {
  VerifyOptions o;
  o.seed = g.seed;
  o.threads = g.threads;
  o.exhaustive_cap = g.exhaustive_cap;
  return o;
}

std::string cert_text(const Certificate& c, bool omit_timing) {
  auto j = c.to_json();
  if (omit_timing) j.erase("seconds");
  return j.dump(1) + "\n";
}

void print_counterexample(const Certificate& cert) {
  if (cert.counterexamples.empty()) return;
  const auto& ce = cert.counterexamples.front();
  std::cerr << "counterexample #" << ce.index << ": input (" << join(ce.input, false) << ") expected ("
            << join(ce.expected, false) << ") got (" << join(ce.got, false) << ")\n";
}

// ---------------------------------------------------------------- commands

int cmd_compile(const Globals& g, const std::string& in, const std::string& out, const std::string& report_path,
                bool flat) {
  Circuit c = load_circuit(in);
  CompileOptions opt;
  opt.strict_surgery = g.strict_surgery;
  opt.fuse = g.fuse;
  CompileResult r = compile(c, opt);
  if (flat) write_or_print(out, serialize_net(flatten(r.graph)));
  else write_or_print(out, serialize_graph(r.graph));
  if (!report_path.empty()) save_text(report_path, r.report.to_json().dump(1) + "\n");
  if (!out.empty() && out != "-") std::cout << r.report.str();
  return 0;
}

int cmd_eval(const std::string& path, const std::vector<std::string>& tokens, bool as_bits) {
  std::string text = load_text(path);
  std::vector<Dyadic> x = parse_values(tokens);
  std::vector<Dyadic> y;
  if (looks_like_json(text)) {
    Network n = load_network(path);
    if (auto* net = std::get_if<Net>(&n)) {
      if (static_cast<long>(x.size()) != net->in_width())
        throw std::invalid_argument("expected " + std::to_string(net->in_width()) + " inputs, got " +
                                    std::to_string(x.size()));
      y = from_vec(net->evaluate(to_vec(x)));
    } else {
      const auto& graph = std::get<FfnnGraph>(n);
      if (x.size() != graph.input_names.size())
        throw std::invalid_argument("expected " + std::to_string(graph.input_names.size()) + " inputs, got " +
                                    std::to_string(x.size()));
      y = graph.evaluate(x);
    }
  } else {
    Circuit c = with_path(path, [&] { return parse_circuit(text); });
    y = interpret(c, x);
  }
  std::cout << join(y, as_bits) << "\n";
  return 0;
}

int cmd_verify(const Globals& g, const std::string& circ, const std::string& net_path, const std::string& mode,
               uint64_t samples, bool allow_fallback, const std::string& out, bool omit_timing) {
  Circuit c = load_circuit(circ);
  Network n = load_network(net_path);
  VerifyOptions o = verify_options(g);
  o.mode = mode == "random" ? VerifyMode::Random : VerifyMode::Exhaustive;
  o.samples = samples;
  o.allow_fallback = allow_fallback;
  Certificate cert = std::visit([&](const auto& x) { return verify_equivalence(c, x, o); }, n);
  if (!out.empty()) save_text(out, cert_text(cert, omit_timing));
  std::cout << (cert.passed() ? "PASS" : "FAIL") << " checked " << cert.checked << " mismatches "
            << cert.mismatches << "\n";
  if (!cert.passed()) {
    print_counterexample(cert);
    return 1;
  }
  return 0;
}

nlohmann::ordered_json report_json(const ComplexityReport& r) {
  nlohmann::ordered_json j;
  j["depth"] = r.depth;
  j["width"] = r.width;
  j["params"] = r.nonzero_params;
  auto opt = [](const std::optional<long>& v) { return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(); };
  j["bound_depth"] = opt(r.bound_depth);
  j["bound_width"] = opt(r.bound_width);
  j["bound_params"] = opt(r.bound_params);
  return j;
}

int cmd_gate(const Globals& g, const std::string& text, const std::string& out, const std::string& catalog) {
  if (!catalog.empty()) {
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    bool failed = false;
    for (const BoundAudit& a : audit_bound_table()) {
      GateKind k = parse_gate(a.gate);
      Circuit c = single_gate_circuit(k);
      // real-valued inputs are probed on the grid
      bool probed = false;
      for (const auto& id : c.inputs())
        if (!c.node(id).domain.finite()) {
          c.node_mut(id).domain = ValueSet::grid(g.q);
          probed = true;
        }
      VerifyOptions vo = verify_options(g);
      vo.allow_fallback = true;
      Certificate cert = verify_equivalence(c, gate_network(k), vo);
      nlohmann::ordered_json j;
      j["row"] = a.row;
      j["gate"] = a.gate;
      j["status"] = status_name(a.status);
      j["measured"] = report_json(a.measured);
      j["within_bounds"] = a.ok;
      j["discrepancy"] = a.discrepancy;
      j["verified"] = cert.passed();
      j["checked"] = cert.checked;
      j["mode"] = cert.mode == VerifyMode::Exhaustive ? "exhaustive" : "random";
      j["domain"] = probed ? cert.domain + " (grid probe)" : cert.domain;
      rows.push_back(j);
      if (!cert.passed()) failed = true;
    }
    save_text(catalog, rows.dump(1) + "\n");
    std::cout << rows.size() << " catalog entries, " << (failed ? "some FAILED verification" : "all verified") << "\n";
    if (failed) return 1;
  }
  if (text.empty()) return 0;
  GateEmulator e = build_gate(parse_gate(text));
  write_or_print(out, serialize_net(e.net));
  if (!out.empty() && out != "-")
    std::cout << gate_to_string(e.kind) << " depth " << e.report.depth << " width " << e.report.width << " params "
              << e.report.nonzero_params << "\n";
  return 0;
}

GridTable load_table(const std::string& path, int d, int q) {
  std::string text = load_text(path);
  return with_path(path, [&] {
    GridTable t;
    t.d = d;
    t.q = q;
    std::istringstream in(text);
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
      ++n;
      if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
      std::istringstream ls(line);
      std::string tok;
      while (ls >> tok) {
        try {
          t.values.push_back(Dyadic::parse(tok));
        } catch (const std::exception& e) {
          throw std::invalid_argument("line " + std::to_string(n) + ": " + e.what());
        }
      }
    }
    if (t.values.size() != t.points())
      throw std::invalid_argument("expected " + std::to_string(t.points()) + " values, got " +
                                  std::to_string(t.values.size()));
    return t;
  });
}

int cmd_universal(const std::string& path, int d, int q, const std::string& out, bool points) {
  GridTable t = load_table(path, d, q);
  LookupNetwork L = build_universal(t, points ? EncoderKind::PointIndicators : EncoderKind::Hat);
  Net n = L.network();
  write_or_print(out, serialize_net(n));
  if (!out.empty() && out != "-")
    std::cout << "grid points " << t.points() << " depth " << n.depth() << " width " << n.width() << " params "
              << n.nonzeros() << "\n";
  return 0;
}

int cmd_apsp(const Globals& g, int k, const std::string& weights, bool pruned, const std::string& out,
             const std::string& report_path) {
  WeightedCompleteGraph graph;
  if (!weights.empty()) {
    std::string text = load_text(weights);
    graph = with_path(weights, [&] { return parse_weighted_graph(text); });
  } else {
    graph = random_apsp_graph(k, g.q, g.seed);
  }
  ApspOptions ao;
  ao.pruned = pruned;
  CompileOptions co;
  co.strict_surgery = g.strict_surgery;
  co.fuse = g.fuse;
  CompileResult r = compile_apsp(graph.k, graph.q, ao, co);
  std::vector<Dyadic> d = r.graph.evaluate(graph.weights);
  std::vector<Dyadic> oracle = floyd_warshall(graph);
  for (int i = 1; i <= graph.k; ++i)
    for (int j = i + 1; j <= graph.k; ++j)
      std::cout << "d(" << i << "," << j << ")=" << d[edge_index(graph.k, i, j)].decimal() << "\n";
  if (!out.empty()) save_text(out, serialize_graph(r.graph));
  if (!report_path.empty()) save_text(report_path, r.report.to_json().dump(1) + "\n");
  const auto& t = r.report.total;
  std::cout << "k " << graph.k << " q " << graph.q << " gates " << r.report.gates.size() << " depth " << t.depth
            << " width " << t.width << " params " << t.nonzero_params << "\n";
  if (d != oracle) {
    std::cerr << "network disagrees with Floyd-Warshall\n";
    return 1;
  }
  return 0;
}

int cmd_synth(const std::string& path, const std::string& out) {
  std::string text = load_text(path);
  TruthTable t = with_path(path, [&] { return parse_truth_table(text); });
  write_or_print(out, emit_circuit(synthesize_boolean(t)));
  return 0;
}

int cmd_dot(const std::string& path, const std::string& out) {
  std::string text = load_text(path);
  std::string dot;
  if (looks_like_json(text)) {
    Network n = load_network(path);
    if (auto* net = std::get_if<Net>(&n)) dot = to_dot(FfnnGraph::from_net(*net, std::vector<ValueSet>(static_cast<size_t>(net->in_width()), ValueSet::all())));
    else dot = to_dot(std::get<FfnnGraph>(n));
  } else {
    dot = to_dot(with_path(path, [&] { return parse_circuit(text); }));
  }
  write_or_print(out, dot);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"circnet: compile circuits of gates into exact ReLU networks"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--q", g.q, "grid precision for generated inputs")->check(CLI::Range(1, 10));
  app.add_option("--seed", g.seed, "seed for every randomized step");
  app.add_option("--threads", g.threads, "verification threads, 0 = all cores");
  app.add_option("--exhaustive-cap", g.exhaustive_cap, "largest domain checked exhaustively")
      ->check(CLI::PositiveNumber);
  app.add_flag("--strict-surgery", g.strict_surgery, "reject gates that need codec adapters");
  app.add_flag("--fuse", g.fuse, "merge codec adapters into their gate block");

  std::string in, in2, out, report;
  bool flat = false, as_bits = false, allow_fallback = false, omit_timing = false, pruned = false, points = false;
  std::vector<std::string> values;
  std::string mode = "exhaustive", catalog;
  uint64_t samples = 10000;
  int d = 1, k = 3;

  auto* compile_cmd = app.add_subcommand("compile", "circuit file -> network file and report");
  compile_cmd->add_option("circuit", in)->required();
  compile_cmd->add_option("-o,--output", out, "network file (default stdout)");
  compile_cmd->add_option("--report", report, "JSON report file");
  compile_cmd->add_flag("--flatten", flat, "write a single MLP instead of the block graph");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a circuit or network on one input");
  eval_cmd->add_option("file", in)->required();
  eval_cmd->add_option("values", values, "dyadics or 0b... bit strings");
  eval_cmd->add_flag("--bits", as_bits, "print the output as a bit string");

  auto* verify_cmd = app.add_subcommand("verify", "check a network against a circuit");
  verify_cmd->add_option("circuit", in)->required();
  verify_cmd->add_option("network", in2)->required();
  verify_cmd->add_option("--mode", mode)->check(CLI::IsMember({"exhaustive", "random"}));
  verify_cmd->add_option("--samples", samples);
  verify_cmd->add_flag("--allow-fallback", allow_fallback, "sample randomly when over the exhaustive cap");
  verify_cmd->add_option("-o,--output", out, "certificate file");
  verify_cmd->add_flag("--omit-timing", omit_timing, "drop wall-clock time from the certificate");

  auto* gate_cmd = app.add_subcommand("gate", "export the emulator of one gate");
  gate_cmd->add_option("gate", in, "e.g. \"XOR[B=2]\"");
  gate_cmd->add_option("-o,--output", out);
  gate_cmd->add_option("--catalog", catalog, "write the audited gate catalog");

  auto* uni_cmd = app.add_subcommand("universal", "lookup network for a table over the grid");
  uni_cmd->add_option("table", in)->required();
  uni_cmd->add_option("--d", d)->check(CLI::Range(1, 4));
  uni_cmd->add_option("-o,--output", out);
  uni_cmd->add_flag("--points", points, "one point indicator per grid point");

  auto* apsp_cmd = app.add_subcommand("apsp", "all-pairs shortest paths network");
  apsp_cmd->add_option("--k", k)->check(CLI::Range(2, 12));
  apsp_cmd->add_option("--weights", in, "edge list file (default: random weights)");
  apsp_cmd->add_flag("--pruned", pruned, "skip the updates that cannot change a distance");
  apsp_cmd->add_option("-o,--output", out, "network file");
  apsp_cmd->add_option("--report", report, "JSON report file");

  auto* synth_cmd = app.add_subcommand("synth", "truth table -> circuit file");
  synth_cmd->add_option("table", in)->required();
  synth_cmd->add_option("-o,--output", out);

  auto* dot_cmd = app.add_subcommand("dot", "Graphviz view of a circuit or network");
  dot_cmd->add_option("file", in)->required();
  dot_cmd->add_option("-o,--output", out);

  for (auto* s : app.get_subcommands({})) s->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*compile_cmd) return cmd_compile(g, in, out, report, flat);
    if (*eval_cmd) return cmd_eval(in, values, as_bits);
    if (*verify_cmd) return cmd_verify(g, in, in2, mode, samples, allow_fallback, out, omit_timing);
    if (*gate_cmd) return cmd_gate(g, in, out, catalog);
    if (*uni_cmd) return cmd_universal(in, d, g.q, out, points);
    if (*apsp_cmd) return cmd_apsp(g, k, in, pruned, out, report);
    if (*synth_cmd) return cmd_synth(in, out);
    if (*dot_cmd) return cmd_dot(in, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}
