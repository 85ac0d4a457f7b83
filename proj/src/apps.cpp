#include "circnet/apps.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <random>
#include <sstream>
#include <variant>

#include "circnet/fixnum.hpp"

namespace circnet {

namespace {

std::string num(int v) { return std::to_string(v); }

PortRef wire(const std::string& id, int port = 0) { return PortRef{id, port}; }

std::vector<std::string> split_ws(std::string_view line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<std::string> lines_of(std::string_view text) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t nl = text.find('\n', pos);
    std::string_view l = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    size_t hash = l.find('#');
    if (hash != std::string_view::npos) l = l.substr(0, hash);
    out.emplace_back(l);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return out;
}

int parse_int(const std::string& s, const std::string& where) {
  try {
    size_t used = 0;
    int v = std::stoi(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument(where + ": expected an integer, got '" + s + "'");
  }
}

}  // namespace

// ------------------------------------------------------------------- APSP

size_t edge_index(int k, int i, int j) {
  if (i < 1 || j > k || i >= j) throw std::invalid_argument("edge_index: need 1 <= i < j <= k");
  // rows 1..i-1 hold (k-1) + ... + (k-i+1) entries
  size_t before = static_cast<size_t>((i - 1) * k - (i - 1) * i / 2);
  return before + static_cast<size_t>(j - i - 1);
}

void WeightedCompleteGraph::check() const {
  if (k < 2) throw std::invalid_argument("graph: k must be at least 2");
  check_precision(q);
  size_t want = static_cast<size_t>(k) * static_cast<size_t>(k - 1) / 2;
  if (weights.size() != want)
    throw std::invalid_argument("graph: " + std::to_string(weights.size()) + " weights for " + std::to_string(want) +
                                " edges");
  for (const auto& w : weights) {
    if (!(w > Dyadic(0))) throw std::invalid_argument("graph: weight " + w.decimal() + " is not positive");
    if (!on_grid(w, q)) throw std::invalid_argument("graph: weight " + w.decimal() + " is not on the grid");
  }
}

WeightedCompleteGraph WeightedCompleteGraph::make(int k, int q, std::vector<Dyadic> w) {
  WeightedCompleteGraph g;
  g.k = k;
  g.q = q;
  g.weights = std::move(w);
  g.check();
  return g;
}

const Dyadic& WeightedCompleteGraph::weight(int i, int j) const {
  if (i == j) throw std::invalid_argument("graph: no self loops");
  return weights.at(edge_index(k, std::min(i, j), std::max(i, j)));
}

WeightedCompleteGraph parse_weighted_graph(std::string_view text) {
  std::optional<int> k, q;
  std::map<std::pair<int, int>, Dyadic> edges;
  auto ls = lines_of(text);
  for (size_t n = 0; n < ls.size(); ++n) {
    auto f = split_ws(ls[n]);
    if (f.empty()) continue;
    std::string where = "line " + std::to_string(n + 1);
    if (f[0] == "k" || f[0] == "q") {
      if (f.size() != 2) throw std::invalid_argument(where + ": expected '" + f[0] + " <int>'");
      (f[0] == "k" ? k : q) = parse_int(f[1], where);
      continue;
    }
    if (f.size() != 3) throw std::invalid_argument(where + ": expected 'i j weight'");
    if (!k) throw std::invalid_argument(where + ": edge before the 'k' line");
    int i = parse_int(f[0], where), j = parse_int(f[1], where);
    if (i > j) std::swap(i, j);
    if (i < 1 || j > *k || i == j) throw std::invalid_argument(where + ": vertex out of range or self loop");
    Dyadic w;
    try {
      w = Dyadic::parse(f[2]);
    } catch (const std::exception& e) {
      throw std::invalid_argument(where + ": " + e.what());
    }
    if (!edges.emplace(std::make_pair(i, j), w).second) throw std::invalid_argument(where + ": duplicate edge");
  }
  if (!k) throw std::invalid_argument("graph: missing 'k' line");
  if (!q) throw std::invalid_argument("graph: missing 'q' line");
  std::vector<Dyadic> w;
  for (int i = 1; i <= *k; ++i)
    for (int j = i + 1; j <= *k; ++j) {
      auto it = edges.find({i, j});
      if (it == edges.end()) throw std::invalid_argument("graph: missing edge " + num(i) + " " + num(j));
      w.push_back(it->second);
    }
  return WeightedCompleteGraph::make(*k, *q, std::move(w));
}

std::string format_weighted_graph(const WeightedCompleteGraph& g) {
  g.check();
  std::ostringstream os;
  os << "k " << g.k << "\nq " << g.q << "\n";
  for (int i = 1; i <= g.k; ++i)
    for (int j = i + 1; j <= g.k; ++j) os << i << " " << j << " " << g.weight(i, j).decimal() << "\n";
  return os.str();
}

std::vector<Dyadic> floyd_warshall(const WeightedCompleteGraph& g) {
  g.check();
  int k = g.k;
  std::vector<std::vector<Dyadic>> d(static_cast<size_t>(k), std::vector<Dyadic>(static_cast<size_t>(k)));
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      d[static_cast<size_t>(i)][static_cast<size_t>(j)] = i == j ? Dyadic(0) : g.weight(i + 1, j + 1);
  for (size_t r = 0; r < d.size(); ++r)
    for (size_t i = 0; i < d.size(); ++i)
      for (size_t j = 0; j < d.size(); ++j) d[i][j] = min(d[i][j], d[i][r] + d[r][j]);
  std::vector<Dyadic> out;
  for (size_t i = 0; i < d.size(); ++i)
    for (size_t j = i + 1; j < d.size(); ++j) out.push_back(d[i][j]);
  return out;
}

Circuit build_apsp_circuit(int k, int q, const ApspOptions& opt) {
  if (k < 2) throw std::invalid_argument("apsp: k must be at least 2");
  check_precision(q);
  Circuit c;
  auto w = [](int i, int j) { return "w" + num(i) + "_" + num(j); };
  for (int i = 1; i <= k; ++i)
    for (int j = i + 1; j <= k; ++j) c.add_input(w(i, j), ValueSet::grid(q));
  std::vector<std::vector<PortRef>> cur(static_cast<size_t>(k + 1), std::vector<PortRef>(static_cast<size_t>(k + 1)));
  auto at = [&](int i, int j) -> PortRef& { return cur[static_cast<size_t>(i)][static_cast<size_t>(j)]; };
  for (int i = 1; i <= k; ++i)
    for (int j = 1; j <= k; ++j)
      if (i != j) at(i, j) = wire(w(std::min(i, j), std::max(i, j)));
  GateKind add = GateKind::modular(GateOp::ModAdd, q);
  GateKind mn = GateKind::tropical(GateOp::Min, 2);
  auto update = [&](int r, int i, int j, const PortRef& a, const PortRef& b, const PortRef& old) {
    std::string tag = num(r) + "_" + num(i) + "_" + num(j);
    c.add_gate("a" + tag, add, {a, b});
    c.add_gate("m" + tag, mn, {old, wire("a" + tag)});
    return wire("m" + tag);
  };
  if (opt.pruned) {
    for (int r = 1; r <= k; ++r)
      for (int i = 1; i <= k; ++i)
        for (int j = i + 1; j <= k; ++j) {
          if (r == i || r == j) continue;
          PortRef m = update(r, i, j, at(std::min(i, r), std::max(i, r)), at(std::min(r, j), std::max(r, j)), at(i, j));
          at(i, j) = m;
          at(j, i) = m;
        }
  } else {
    for (int i = 1; i <= k; ++i) {
      c.add_gate("z" + num(i), GateKind::constant({Dyadic(0)}), {wire(w(1, 2))});
      at(i, i) = wire("z" + num(i));
    }
    for (int r = 1; r <= k; ++r)
      for (int i = 1; i <= k; ++i)
        for (int j = 1; j <= k; ++j) at(i, j) = update(r, i, j, at(i, r), at(r, j), at(i, j));
  }
  for (int i = 1; i <= k; ++i)
    for (int j = i + 1; j <= k; ++j) c.add_output("d" + num(i) + "_" + num(j), at(i, j));
  return c;
}

CompileResult compile_apsp(int k, int q, const ApspOptions& opt, const CompileOptions& copt) {
  return compile(build_apsp_circuit(k, q, opt), copt);
}

Dyadic apsp_weight_limit(int k, int q) {
  // every entry of d stays at or below its edge weight, so a relaxation
  // sums at most 2 w_max; w_max <= M / 2 keeps it off the wrap
  (void)k;
  int64_t units = grid_max(q).ldexp(q).to_int() / 2;
  return Dyadic::from_parts(units, q);
}

WeightedCompleteGraph random_apsp_graph(int k, int q, uint64_t seed) {
  int64_t units = apsp_weight_limit(k, q).ldexp(q).to_int();
  if (units < 1) throw std::invalid_argument("apsp: grid too coarse for k = " + num(k) + " at q = " + num(q));
  std::vector<Dyadic> w;
  size_t edges = static_cast<size_t>(k) * static_cast<size_t>(k - 1) / 2;
  for (size_t e = 0; e < edges; ++e) {
    uint64_t h = splitmix64(seed * 0x100000001b3ULL + e);
    w.push_back(Dyadic::from_parts(1 + static_cast<int64_t>(h % static_cast<uint64_t>(units)), q));
  }
  return WeightedCompleteGraph::make(k, q, std::move(w));
}

// ------------------------------------------------------- Boolean functions

TruthTable parse_truth_table(std::string_view text) {
  auto ls = lines_of(text);
  size_t n = 0;
  while (n < ls.size() && split_ws(ls[n]).empty()) ++n;
  if (n == ls.size()) throw std::invalid_argument("truth table: empty file");
  auto head = split_ws(ls[n]);
  if (head.size() != 1) throw std::invalid_argument("truth table: line " + std::to_string(n + 1) + ": expected B");
  std::string b = head[0];
  if (b.size() > 2 && b.front() == '{' && b.back() == '}') b = b.substr(1, b.size() - 2);
  TruthTable t;
  t.B = parse_int(b, "truth table: line " + std::to_string(n + 1));
  if (t.B < 1 || t.B > 30) throw std::invalid_argument("truth table: B must lie in [1,30]");
  std::string hex;
  for (size_t i = n + 1; i < ls.size(); ++i)
    for (const auto& f : split_ws(ls[i])) hex += f;
  uint64_t entries = uint64_t(1) << t.B;
  uint64_t digits = std::max<uint64_t>(1, entries / 4);
  if (hex.size() != digits)
    throw std::invalid_argument("truth table: " + std::to_string(hex.size()) + " hex digits for B = " + num(t.B) +
                                ", expected " + std::to_string(digits));
  t.bits.assign(entries, 0);
  for (uint64_t d = 0; d < digits; ++d) {
    char ch = static_cast<char>(std::tolower(static_cast<unsigned char>(hex[d])));
    int v = std::isdigit(static_cast<unsigned char>(ch)) ? ch - '0' : (ch >= 'a' && ch <= 'f' ? ch - 'a' + 10 : -1);
    if (v < 0) throw std::invalid_argument(std::string("truth table: bad hex digit '") + hex[d] + "'");
    for (int k = 0; k < 4; ++k) {
      uint64_t idx = d * 4 + static_cast<uint64_t>(k);
      bool bit = (v >> (3 - k)) & 1;
      if (idx < entries) t.bits[idx] = bit;
      else if (bit) throw std::invalid_argument("truth table: padding bits must be zero");
    }
  }
  return t;
}

std::string format_truth_table(const TruthTable& t) {
  uint64_t entries = uint64_t(1) << t.B;
  if (t.bits.size() != entries) throw std::invalid_argument("truth table: size does not match B");
  std::string out = num(t.B) + "\n";
  uint64_t digits = std::max<uint64_t>(1, entries / 4);
  for (uint64_t d = 0; d < digits; ++d) {
    int v = 0;
    for (int k = 0; k < 4; ++k) {
      uint64_t idx = d * 4 + static_cast<uint64_t>(k);
      v = v * 2 + (idx < entries && t.bits[idx] ? 1 : 0);
    }
    out += "0123456789abcdef"[v];
    if (d % 64 == 63 && d + 1 < digits) out += "\n";
  }
  return out + "\n";
}

namespace {

class Synth {
public:
  Synth(Circuit& c, int B) : c_(c), B_(B) {}

  // result: -1 constant 0, -2 constant 1, otherwise a node reference held in refs_
  std::variant<bool, PortRef> build(const std::vector<uint8_t>& f, int var) {
    bool all0 = std::all_of(f.begin(), f.end(), [](uint8_t b) { return !b; });
    bool all1 = std::all_of(f.begin(), f.end(), [](uint8_t b) { return b; });
    if (all0) return false;
    if (all1) return true;
    auto key = std::make_pair(var, f);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    size_t h = f.size() / 2;
    std::vector<uint8_t> f0(f.begin(), f.begin() + static_cast<long>(h)), f1(f.begin() + static_cast<long>(h), f.end());
    PortRef x = wire("x" + num(var));
    PortRef r;
    if (f0 == f1) {
      auto s = build(f0, var + 1);
      return memo_[key] = std::get<PortRef>(s);
    }
    auto s0 = build(f0, var + 1), s1 = build(f1, var + 1);
    auto is = [](const std::variant<bool, PortRef>& s, bool v) {
      return std::holds_alternative<bool>(s) && std::get<bool>(s) == v;
    };
    if (is(s0, false) && is(s1, true)) r = x;
    else if (is(s0, true) && is(s1, false)) r = neg(var);
    else if (is(s0, false)) r = gate(GateOp::And, x, std::get<PortRef>(s1));
    else if (is(s1, false)) r = gate(GateOp::And, neg(var), std::get<PortRef>(s0));
    else if (is(s0, true)) r = gate(GateOp::Or, neg(var), std::get<PortRef>(s1));
    else if (is(s1, true)) r = gate(GateOp::Or, x, std::get<PortRef>(s0));
    else
      r = gate(GateOp::Or, gate(GateOp::And, x, std::get<PortRef>(s1)), gate(GateOp::And, neg(var), std::get<PortRef>(s0)));
    return memo_[key] = r;
  }

private:
  PortRef neg(int var) {
    auto it = nots_.find(var);
    if (it != nots_.end()) return it->second;
    std::string id = "nx" + num(var);
    c_.add_gate(id, GateKind::logic(GateOp::Not, 1), {wire("x" + num(var))});
    return nots_[var] = wire(id);
  }
  PortRef gate(GateOp op, const PortRef& a, const PortRef& b) {
    std::string id = "g" + num(++count_);
    c_.add_gate(id, GateKind::logic(op, 1), {a, b});
    return wire(id);
  }

  Circuit& c_;
  int B_;
  int count_ = 0;
  std::map<int, PortRef> nots_;
  std::map<std::pair<int, std::vector<uint8_t>>, PortRef> memo_;
};

}  // namespace

Circuit synthesize_boolean(const TruthTable& t, int cap) {
  if (t.B < 1 || t.B > cap) throw std::invalid_argument("synthesize: B must lie in [1," + num(cap) + "]");
  if (t.bits.size() != (uint64_t(1) << t.B))
    throw std::invalid_argument("synthesize: table has " + std::to_string(t.bits.size()) + " entries for B = " +
                                num(t.B));
  Circuit c;
  for (int i = 1; i <= t.B; ++i) c.add_input("x" + num(i), ValueSet::bit());
  Synth s(c, t.B);
  auto r = s.build(t.bits, 1);
  if (std::holds_alternative<bool>(r)) {
    c.add_gate("g1", GateKind::constant({Dyadic(std::get<bool>(r) ? 1 : 0)}), {wire("x1")});
    c.add_output("y", wire("g1"));
  } else {
    c.add_output("y", std::get<PortRef>(r));
  }
  return c;
}

// ---------------------------------------------------------- derandomizing

int RandomizedCircuitSpec::gate_count() const { return static_cast<int>(base.compute_nodes().size()); }

int RandomizedCircuitSpec::replicas() const { return replication ? *replication : 8 * n * gate_count() + 1; }

void RandomizedCircuitSpec::check() const {
  ValidationReport v = validate(base);
  if (!v.ok()) throw std::invalid_argument("randomized circuit: " + v.str());
  if (n < 1 || m < 1) throw std::invalid_argument("randomized circuit: n and m must be positive");
  if (base.inputs().size() != static_cast<size_t>(n + m))
    throw std::invalid_argument("randomized circuit: base has " + std::to_string(base.inputs().size()) +
                                " inputs, expected n + m = " + num(n + m));
  if (base.outputs().size() != 1) throw std::invalid_argument("randomized circuit: base must have one output");
  if (m > 20) throw std::invalid_argument("randomized circuit: at most 20 random inputs");
  if (!(p > 0.5 && p < 1)) throw std::invalid_argument("randomized circuit: p must lie in (1/2, 1)");
  for (const auto& id : base.inputs())
    if (!(base.node(id).domain == ValueSet::bit())) throw std::invalid_argument("randomized circuit: inputs must be bits");
  for (const auto& id : base.compute_nodes()) {
    const GateKind& g = base.node(id).gate;
    bool ok = (g.op == GateOp::And || g.op == GateOp::Or || g.op == GateOp::Not) && g.B == 1;
    if (!ok) throw std::invalid_argument("randomized circuit: gate " + gate_to_string(g) + " at '" + id +
                                         "' is not AND[B=1], OR[B=1] or NOT[B=1]");
  }
  int r = replicas();
  if (r < 1 || r > 256) throw std::invalid_argument("randomized circuit: replication must lie in [1,256]");
}

Circuit derandomize(const RandomizedCircuitSpec& spec, const Advice& advice) {
  spec.check();
  int R = spec.replicas();
  if (advice.size() != static_cast<size_t>(R))
    throw std::invalid_argument("derandomize: " + std::to_string(advice.size()) + " advice vectors for " + num(R) +
                                " replicas");
  const Circuit& b = spec.base;
  Circuit c;
  for (int i = 0; i < spec.n; ++i) c.add_input(b.inputs()[static_cast<size_t>(i)], ValueSet::bit());
  const std::string& anchor = b.inputs().front();
  std::vector<PortRef> outs;
  for (int r = 1; r <= R; ++r) {
    const auto& a = advice[static_cast<size_t>(r - 1)];
    if (a.size() != static_cast<size_t>(spec.m)) throw std::invalid_argument("derandomize: advice of wrong length");
    std::string pre = "r" + num(r) + "_";
    std::map<std::string, PortRef> map;
    for (int i = 0; i < spec.n; ++i) map[b.inputs()[static_cast<size_t>(i)]] = wire(b.inputs()[static_cast<size_t>(i)]);
    for (int i = 0; i < spec.m; ++i) {
      const std::string& u = b.inputs()[static_cast<size_t>(spec.n + i)];
      c.add_gate(pre + u, GateKind::constant({Dyadic(a[static_cast<size_t>(i)] ? 1 : 0)}), {wire(anchor)});
      map[u] = wire(pre + u);
    }
    for (const auto& id : b.topological_order()) {
      const Node& nd = b.node(id);
      if (nd.role != NodeRole::Compute) continue;
      std::vector<PortRef> ps;
      for (const auto& p : nd.parents) ps.push_back({map.at(p.node).node, map.at(p.node).port + p.port});
      c.add_gate(pre + id, nd.gate, ps);
      map[id] = wire(pre + id);
    }
    const PortRef& o = b.node(b.outputs().front()).parents.front();
    outs.push_back({map.at(o.node).node, map.at(o.node).port + o.port});
  }
  if (R == 1) {
    c.add_output(b.outputs().front(), outs.front());
  } else {
    c.add_gate("maj", GateKind::tropical(GateOp::Majority, R), outs);
    c.add_output(b.outputs().front(), wire("maj"));
  }
  return c;
}

namespace {

// base output for every (x, a): table[x][a], indices most significant first
std::vector<std::vector<uint8_t>> base_table(const RandomizedCircuitSpec& spec) {
  std::vector<std::vector<uint8_t>> t(size_t(1) << spec.n, std::vector<uint8_t>(size_t(1) << spec.m));
  std::vector<ValueSet> dom(static_cast<size_t>(spec.n + spec.m), ValueSet::bit());
  for (uint64_t i = 0; i < (uint64_t(1) << (spec.n + spec.m)); ++i) {
    auto y = interpret(spec.base, domain_point(dom, i));
    t[i >> spec.m][i & ((uint64_t(1) << spec.m) - 1)] = y.front() == Dyadic(1);
  }
  return t;
}

std::vector<uint8_t> bits_of(uint64_t v, int width) {
  std::vector<uint8_t> b(static_cast<size_t>(width));
  for (int i = 0; i < width; ++i) b[static_cast<size_t>(i)] = (v >> (width - 1 - i)) & 1;
  return b;
}

uint64_t value_of(const std::vector<uint8_t>& b) {
  uint64_t v = 0;
  for (auto x : b) v = v * 2 + x;
  return v;
}

}  // namespace

AdviceResult search_advice(const RandomizedCircuitSpec& spec,
                           const std::function<bool(const std::vector<uint8_t>&)>& target, AdviceSearch mode,
                           uint64_t budget, uint64_t seed) {
  spec.check();
  auto table = base_table(spec);
  int R = spec.replicas();
  std::vector<uint8_t> want(table.size());
  for (size_t x = 0; x < table.size(); ++x) want[x] = target(bits_of(x, spec.n));
  auto good = [&](const std::vector<uint64_t>& a) {
    for (size_t x = 0; x < table.size(); ++x) {
      int ones = 0;
      for (uint64_t v : a) ones += table[x][v];
      bool maj = 2 * ones >= R;
      if (maj != static_cast<bool>(want[x])) return false;
    }
    return true;
  };
  AdviceResult res;
  std::vector<uint64_t> a(static_cast<size_t>(R), 0);
  if (mode == AdviceSearch::Random) {
    std::mt19937_64 rng(seed);
    for (res.tries = 1; res.tries <= budget; ++res.tries) {
      for (auto& v : a) {
        v = 0;
        for (int i = 0; i < spec.m; ++i) v = v * 2 + (static_cast<double>(rng() >> 11) * 0x1.0p-53 < spec.p ? 1 : 0);
      }
      if (good(a)) {
        res.found = true;
        break;
      }
    }
  } else {
    uint64_t per = uint64_t(1) << spec.m;
    for (res.tries = 1; res.tries <= budget; ++res.tries) {
      if (good(a)) {
        res.found = true;
        break;
      }
      size_t i = 0;  // odometer over replicas
      while (i < a.size() && ++a[i] == per) a[i++] = 0;
      if (i == a.size()) break;
    }
  }
  if (res.found) {
    for (uint64_t v : a) res.advice.push_back(bits_of(v, spec.m));
    res.message = "advice found after " + std::to_string(res.tries) + " candidate(s)";
  } else {
    res.tries = std::min(res.tries, budget);
    res.message = "no advice within " + std::to_string(budget) + " candidate(s) at replication " + num(R) +
                  "; raise the budget or the replication";
  }
  (void)value_of;
  return res;
}

std::vector<double> success_probability(const RandomizedCircuitSpec& spec,
                                        const std::function<bool(const std::vector<uint8_t>&)>& target) {
  spec.check();
  auto table = base_table(spec);
  std::vector<double> out;
  for (size_t x = 0; x < table.size(); ++x) {
    bool want = target(bits_of(x, spec.n));
    double s = 0;
    for (size_t a = 0; a < table[x].size(); ++a) {
      if (static_cast<bool>(table[x][a]) != want) continue;
      double pr = 1;
      for (int i = 0; i < spec.m; ++i) pr *= ((a >> (spec.m - 1 - i)) & 1) ? spec.p : 1 - spec.p;
      s += pr;
    }
    out.push_back(s);
  }
  return out;
}

// ------------------------------------------------------------ transductor

void Transductor::check() const {
  if (n_states < 1) throw std::invalid_argument("transductor: need at least one state");
  if (B < 1 || B > 8) throw std::invalid_argument("transductor: B must lie in [1,8]");
  if (delta.size() != static_cast<size_t>(n_states)) throw std::invalid_argument("transductor: delta needs one row per state");
  for (const auto& row : delta) {
    if (row.size() != (size_t(1) << B)) throw std::invalid_argument("transductor: delta rows need 2^B entries");
    for (auto [nx, o] : row) {
      if (nx < 0 || nx >= n_states) throw std::invalid_argument("transductor: next state out of range");
      if (o != 0 && o != 1) throw std::invalid_argument("transductor: output must be a bit");
    }
  }
  auto in_range = [&](std::optional<int> s) { return !s || (*s >= 0 && *s < n_states); };
  if (initial < 0 || initial >= n_states || !in_range(accept) || !in_range(reject))
    throw std::invalid_argument("transductor: state index out of range");
}

std::pair<int, int> Transductor::step(int state, uint64_t symbol) const {
  if ((accept && state == *accept) || (reject && state == *reject)) return {state, 0};
  return delta.at(static_cast<size_t>(state)).at(symbol);
}

TransductorTrace simulate(const Transductor& t, const std::vector<uint8_t>& x, int T) {
  t.check();
  if (T < 0) throw std::invalid_argument("simulate: T must be nonnegative");
  if (x.size() != static_cast<size_t>(t.B)) throw std::invalid_argument("simulate: symbol must have B bits");
  uint64_t sym = value_of(x);
  TransductorTrace tr;
  tr.state.push_back(t.initial);
  tr.output.push_back(0);
  for (int s = 1; s <= T; ++s) {
    auto [nx, o] = t.step(tr.state.back(), sym);
    tr.state.push_back(nx);
    tr.output.push_back(o);
  }
  return tr;
}

int time_precision(int T) {
  for (int q = 1; q <= kMaxPrecision; ++q)
    if (Dyadic(T) <= grid_max(q)) return q;
  throw std::invalid_argument("time_precision: T too large");
}

namespace {

// a wire or a known constant
struct Sig {
  std::optional<PortRef> wire;
  bool value = false;
  static Sig konst(bool v) { return Sig{std::nullopt, v}; }
  static Sig of(PortRef p) { return Sig{std::move(p), false}; }
};

class LogicBuilder {
public:
  LogicBuilder(Circuit& c, std::string anchor) : c_(c), anchor_(std::move(anchor)) {}

  Sig and2(const Sig& a, const Sig& b, const std::string& id) {
    if (!a.wire) return a.value ? b : Sig::konst(false);
    if (!b.wire) return b.value ? a : Sig::konst(false);
    c_.add_gate(id, GateKind::logic(GateOp::And, 1), {*a.wire, *b.wire});
    return Sig::of(wire(id));
  }
  Sig or_all(const std::vector<Sig>& xs, const std::string& prefix) {
    std::vector<PortRef> wires;
    for (const auto& s : xs) {
      if (!s.wire) {
        if (s.value) return Sig::konst(true);
        continue;
      }
      wires.push_back(*s.wire);
    }
    if (wires.empty()) return Sig::konst(false);
    PortRef acc = wires.front();
    for (size_t i = 1; i < wires.size(); ++i) {
      std::string id = prefix + "_" + num(static_cast<int>(i));
      c_.add_gate(id, GateKind::logic(GateOp::Or, 1), {acc, wires[i]});
      acc = wire(id);
    }
    return Sig::of(acc);
  }
  PortRef materialize(const Sig& s, const std::string& id) {
    if (s.wire) return *s.wire;
    c_.add_gate(id, GateKind::constant({Dyadic(s.value ? 1 : 0)}), {wire(anchor_)});
    return wire(id);
  }

private:
  Circuit& c_;
  std::string anchor_;
};

}  // namespace

Circuit unroll_transductor(const Transductor& tr, int T) {
  tr.check();
  if (T < 0) throw std::invalid_argument("unroll: T must be nonnegative");
  Circuit c;
  for (int i = 1; i <= tr.B; ++i) c.add_input("x" + num(i), ValueSet::bit());
  c.add_input("t", ValueSet::integers(0, T));
  LogicBuilder lb(c, "x1");
  // symbol match bits
  for (int i = 1; i <= tr.B; ++i) c.add_gate("nx" + num(i), GateKind::logic(GateOp::Not, 1), {wire("x" + num(i))});
  std::vector<Sig> match;
  for (uint64_t a = 0; a < (uint64_t(1) << tr.B); ++a) {
    Sig m = Sig::konst(true);
    for (int i = 1; i <= tr.B; ++i) {
      bool bit = (a >> (tr.B - i)) & 1;
      Sig lit = Sig::of(wire((bit ? "x" : "nx") + num(i)));
      m = lb.and2(m, lit, "sym" + std::to_string(a) + "_" + num(i));
    }
    match.push_back(m);
  }
  std::vector<std::vector<Sig>> state(static_cast<size_t>(T + 1));
  std::vector<Sig> out(static_cast<size_t>(T + 1));
  for (int s = 0; s < tr.n_states; ++s) state[0].push_back(Sig::konst(s == tr.initial));
  out[0] = Sig::konst(false);
  for (int t = 1; t <= T; ++t) {
    std::vector<std::vector<Sig>> into(static_cast<size_t>(tr.n_states));
    std::vector<Sig> emit;
    for (int s = 0; s < tr.n_states; ++s) {
      const Sig& cur = state[static_cast<size_t>(t - 1)][static_cast<size_t>(s)];
      if (!cur.wire && !cur.value) continue;
      for (uint64_t a = 0; a < match.size(); ++a) {
        auto [nx, o] = tr.step(s, a);
        Sig both = lb.and2(cur, match[a], "p" + num(t) + "_" + num(s) + "_" + std::to_string(a));
        into[static_cast<size_t>(nx)].push_back(both);
        if (o) emit.push_back(both);
      }
    }
    for (int s = 0; s < tr.n_states; ++s)
      state[static_cast<size_t>(t)].push_back(lb.or_all(into[static_cast<size_t>(s)], "q" + num(t) + "_" + num(s)));
    out[static_cast<size_t>(t)] = lb.or_all(emit, "o" + num(t));
  }
  // time selection: sum over t of value_t * I[time = t]
  int q = time_precision(T);
  std::vector<Sig> ind;
  for (int t = 0; t <= T; ++t) {
    std::string id = "i" + num(t);
    c.add_gate(id, GateKind::point({Dyadic(t)}, q), {wire("t")});
    ind.push_back(Sig::of(wire(id)));
  }
  auto select = [&](const std::function<const Sig&(int)>& value, const std::string& name) {
    std::vector<Sig> terms;
    for (int t = 0; t <= T; ++t) terms.push_back(lb.and2(value(t), ind[static_cast<size_t>(t)], "sel_" + name + "_" + num(t)));
    return lb.materialize(lb.or_all(terms, "or_" + name), "zero_" + name);
  };
  for (int s = 0; s < tr.n_states; ++s) {
    PortRef p = select([&](int t) -> const Sig& { return state[static_cast<size_t>(t)][static_cast<size_t>(s)]; },
                       "s" + num(s));
    c.add_output("s" + num(s), p);
  }
  c.add_output("o", select([&](int t) -> const Sig& { return out[static_cast<size_t>(t)]; }, "o"));
  return c;
}

// ------------------------------------------------------ decomposition study

std::vector<double> DecompositionStudy::ratios() const {
  std::vector<double> r;
  for (size_t i = 1; i < rows.size(); ++i) {
    double b = rows[i].discretization_error.to_double();
    r.push_back(b == 0 ? INFINITY : rows[i - 1].discretization_error.to_double() / b);
  }
  return r;
}

nlohmann::ordered_json DecompositionStudy::to_json() const {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  auto r = ratios();
  for (size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    nlohmann::ordered_json e;
    e["q"] = row.q;
    e["discretization_error"] = row.discretization_error.decimal();
    e["compute_error"] = row.compute_error.decimal();
    e["probes"] = row.probes;
    e["grid_points"] = row.grid_points;
    e["params"] = row.params;
    e["ratio_to_previous"] = i == 0 ? nlohmann::ordered_json() : nlohmann::ordered_json(r[i - 1]);
    j.push_back(std::move(e));
  }
  return j;
}

std::string DecompositionStudy::csv() const {
  std::ostringstream os;
  os << "q,discretization_error,compute_error,probes,grid_points,params\n";
  for (const auto& r : rows)
    os << r.q << "," << r.discretization_error.decimal() << "," << r.compute_error.decimal() << "," << r.probes << ","
       << r.grid_points << "," << r.params << "\n";
  return os.str();
}

DecompositionStudy decomposition_study(const std::function<Dyadic(const Dyadic&)>& f, const std::vector<int>& qs,
                                       const Dyadic& lo, const Dyadic& hi, int probe_extra, RoundingMode mode) {
  if (hi < lo) throw std::invalid_argument("decomposition: empty interval");
  if (probe_extra < 0) throw std::invalid_argument("decomposition: probe_extra must be nonnegative");
  DecompositionStudy st;
  for (int q : qs) {
    check_precision(q);
    RoundingScheme pi{q, 1, mode};
    auto round = [&](const Dyadic& v) { return pi.apply1(v).value(); };
    GridTable t = GridTable::from_function(1, q, [&](const std::vector<Dyadic>& x) { return round(f(x[0])); });
    LookupNetwork L = build_universal(t);
    Net net = L.network();
    DecompositionRow row;
    row.q = q;
    row.grid_points = t.points();
    row.params = static_cast<long>(net.nonzeros());
    Dyadic step = Dyadic::pow2(-(q + probe_extra));
    for (Dyadic x = lo; x <= hi; x += step) {
      Dyadic px = round(x);
      Dyadic fbar = round(f(px));
      Dyadic y = net.evaluate(to_vec({px}))[0];
      row.discretization_error = max(row.discretization_error, abs(f(x) - fbar));
      row.compute_error = max(row.compute_error, abs(y - fbar));
      ++row.probes;
    }
    if (row.probes == 0) throw std::invalid_argument("decomposition: no probes");
    st.rows.push_back(row);
  }
  return st;
}

// --------------------------------------------------- random mixed circuits

Circuit random_mixed_circuit(uint64_t seed, const RandomCircuitOptions& opt) {
  for (uint64_t attempt = 0;; ++attempt) {
    std::mt19937_64 rng(splitmix64(seed) ^ attempt);
    auto pick = [&](uint64_t n) { return static_cast<uint64_t>(rng() % n); };
    Circuit c;
    int q = 1 + static_cast<int>(pick(static_cast<uint64_t>(opt.max_q)));
    ValueSet grid = ValueSet::grid(q);
    struct Val {
      PortRef p;
      ValueSet set;
    };
    std::vector<Val> pool;
    uint64_t size = 1;
    int n_grid = q == 1 ? 1 + static_cast<int>(pick(3)) : 1 + static_cast<int>(pick(2));
    int n_bits = 1 + static_cast<int>(pick(3));
    for (int i = 1; i <= n_grid; ++i) {
      if (size * grid.size() > opt.max_domain) break;
      c.add_input("v" + num(i), grid);
      pool.push_back({wire("v" + num(i)), grid});
      size *= grid.size();
    }
    for (int i = 1; i <= n_bits; ++i) {
      if (size * 2 > opt.max_domain) break;
      c.add_input("b" + num(i), ValueSet::bit());
      pool.push_back({wire("b" + num(i)), ValueSet::bit()});
      size *= 2;
    }
    auto choose = [&](const ValueSet& within) -> std::optional<PortRef> {
      std::vector<size_t> ok;
      for (size_t i = 0; i < pool.size(); ++i)
        if (pool[i].set.subset_of(within)) ok.push_back(i);
      if (ok.empty()) return std::nullopt;
      // lean towards recent values so chains get deep
      size_t a = ok[pick(ok.size())], b = ok[pick(ok.size())];
      return pool[std::max(a, b)].p;
    };
    int gates = opt.min_gates + static_cast<int>(pick(static_cast<uint64_t>(opt.max_gates - opt.min_gates + 1)));
    int made = 0;
    for (int tries = 0; made < gates && tries < 200; ++tries) {
      GateKind g;
      switch (pick(13)) {
        case 0: g = GateKind::logic(GateOp::Not, 1); break;
        case 1: g = GateKind::logic(GateOp::And, 1); break;
        case 2: g = GateKind::logic(GateOp::Or, 1); break;
        case 3: g = GateKind::logic(GateOp::Xor, 1); break;
        case 4: g = GateKind::logic(GateOp::Imply, 1); break;
        case 5: g = GateKind::tropical(GateOp::Majority, 3); break;
        case 6: g = GateKind::modular(GateOp::ModAdd, q); break;
        case 7: g = GateKind::modular(GateOp::ModMult, q); break;
        case 8: g = GateKind::tropical(pick(2) ? GateOp::Min : GateOp::Max, 2); break;
        case 9: g = GateKind::indicator(GateOp::IndHalfLine, grid.at(pick(grid.size())), Dyadic(0), q); break;
        case 10: g = GateKind::codec(GateOp::BitEncoder, q); break;
        case 11: g = GateKind::codec(GateOp::BitDecoder, q); break;
        default: g = GateKind::tropical(GateOp::Median, 3); break;
      }
      auto dom = input_domain(g);
      std::vector<PortRef> ps;
      std::vector<ValueSet> sets;
      bool ok = true;
      for (const auto& d : dom) {
        ValueSet within = d.real ? grid.hull(ValueSet::bit()) : d;
        auto p = choose(within);
        if (!p) {
          ok = false;
          break;
        }
        ps.push_back(*p);
        for (const auto& v : pool)
          if (v.p == *p) sets.push_back(v.set);
      }
      if (!ok) continue;
      std::string id = "n" + num(++made);
      c.add_gate(id, g, ps);
      auto cod = output_codomain(g, sets);
      for (size_t o = 0; o < cod.size(); ++o) pool.push_back({wire(id, static_cast<int>(o)), cod[o]});
    }
    if (made < opt.min_gates) continue;
    // every dangling compute value becomes an output
    std::map<std::string, bool> used;
    for (const auto& [id, n] : c.nodes())
      for (const auto& p : n.parents) used[p.node + "." + num(p.port)] = true;
    int outs = 0;
    for (const auto& v : pool) {
      if (c.node(v.p.node).role != NodeRole::Compute || used.count(v.p.node + "." + num(v.p.port))) continue;
      c.add_output("y" + num(++outs), v.p);
    }
    if (outs == 0) continue;
    if (!validate(c).ok()) continue;
    return c;
  }
}

}  // namespace circnet
