#include "circnet/circuit.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <sstream>

namespace circnet {

bool id_less(std::string_view a, std::string_view b) {
  size_t i = 0, j = 0;
  auto digit = [](char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; };
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      size_t si = i, sj = j;
      while (si < a.size() && a[si] == '0') ++si;
      while (sj < b.size() && b[sj] == '0') ++sj;
      size_t ei = si, ej = sj;
      while (ei < a.size() && digit(a[ei])) ++ei;
      while (ej < b.size() && digit(b[ej])) ++ej;
      if (ei - si != ej - sj) return ei - si < ej - sj;
      int c = a.substr(si, ei - si).compare(b.substr(sj, ej - sj));
      if (c != 0) return c < 0;
      i = ei;
      j = ej;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

namespace {

bool valid_id(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

std::string ref_str(const PortRef& p) { return p.port == 0 ? p.node : p.node + "." + std::to_string(p.port); }

}  // namespace

void Circuit::insert(Node n) {
  if (!valid_id(n.id)) throw std::invalid_argument("invalid node id '" + n.id + "'");
  if (nodes_.count(n.id)) throw std::invalid_argument("duplicate node id '" + n.id + "'");
  std::string id = n.id;
  nodes_.emplace(id, std::move(n));
}

void Circuit::add_input(const std::string& id, ValueSet domain) {
  Node n;
  n.id = id;
  n.role = NodeRole::Input;
  n.domain = domain;
  insert(std::move(n));
  inputs_.push_back(id);
}

void Circuit::add_gate(const std::string& id, GateKind gate, std::vector<PortRef> parents) {
  validate_gate(gate);
  Node n;
  n.id = id;
  n.role = NodeRole::Compute;
  n.gate = std::move(gate);
  n.parents = std::move(parents);
  insert(std::move(n));
}

void Circuit::add_output(const std::string& id, PortRef parent) {
  Node n;
  n.id = id;
  n.role = NodeRole::Output;
  n.parents = {std::move(parent)};
  insert(std::move(n));
  outputs_.push_back(id);
}

const Node& Circuit::node(const std::string& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw CircuitFault(id, "unknown node '" + id + "'");
  return it->second;
}

Node& Circuit::node_mut(const std::string& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw CircuitFault(id, "unknown node '" + id + "'");
  return it->second;
}

std::vector<std::string> Circuit::compute_nodes() const {
  std::vector<std::string> out;
  for (const auto& [id, n] : nodes_)
    if (n.role == NodeRole::Compute) out.push_back(id);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return id_less(a, b); });
  return out;
}

int Circuit::arity_out(const std::string& id) const {
  const Node& n = node(id);
  return n.role == NodeRole::Compute ? output_arity(n.gate) : 1;
}

std::vector<std::string> Circuit::children(const std::string& id) const {
  std::vector<std::string> out;
  for (const auto& [cid, n] : nodes_)
    for (const auto& p : n.parents)
      if (p.node == id) out.push_back(cid);
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return id_less(a, b); });
  return out;
}

std::vector<std::string> Circuit::topological_order() const {
  // Kahn's algorithm, smallest ready id first so the order is canonical
  std::map<std::string, int> indeg;
  std::map<std::string, std::vector<std::string>> kids;
  for (const auto& [id, n] : nodes_) {
    indeg[id];
    for (const auto& p : n.parents) {
      if (!nodes_.count(p.node)) throw CircuitFault(id, "node '" + id + "' reads missing node '" + p.node + "'");
      ++indeg[id];
      kids[p.node].push_back(id);
    }
  }
  auto cmp = [](const std::string& a, const std::string& b) { return id_less(b, a); };
  std::vector<std::string> ready;
  for (const auto& [id, d] : indeg)
    if (d == 0) ready.push_back(id);
  std::make_heap(ready.begin(), ready.end(), cmp);
  std::vector<std::string> order;
  while (!ready.empty()) {
    std::pop_heap(ready.begin(), ready.end(), cmp);
    std::string id = ready.back();
    ready.pop_back();
    order.push_back(id);
    for (const auto& k : kids[id])
      if (--indeg[k] == 0) {
        ready.push_back(k);
        std::push_heap(ready.begin(), ready.end(), cmp);
      }
  }
  if (order.size() != nodes_.size()) {
    for (const auto& [id, d] : indeg)
      if (d > 0) throw CircuitFault(id, "cycle through node '" + id + "'");
  }
  return order;
}

std::vector<ValueSet> Circuit::input_domain() const {
  std::vector<ValueSet> out;
  for (const auto& id : inputs_) out.push_back(node(id).domain);
  return out;
}

bool Circuit::operator==(const Circuit& o) const {
  if (inputs_ != o.inputs_ || outputs_ != o.outputs_ || nodes_.size() != o.nodes_.size()) return false;
  for (const auto& [id, n] : nodes_) {
    auto it = o.nodes_.find(id);
    if (it == o.nodes_.end()) return false;
    const Node& m = it->second;
    if (n.role != m.role || !(n.gate == m.gate) || n.parents != m.parents) return false;
    if (n.role == NodeRole::Input && !(n.domain == m.domain)) return false;
  }
  return true;
}

const char* issue_name(IssueKind k) {
  switch (k) {
    case IssueKind::Cycle: return "cycle";
    case IssueKind::DanglingPort: return "dangling port";
    case IssueKind::Arity: return "arity mismatch";
    case IssueKind::Domain: return "domain incompatibility";
    case IssueKind::Structure: return "structure";
    case IssueKind::Unused: return "unused";
  }
  return "?";
}

std::string ValidationReport::str() const {
  std::ostringstream os;
  for (const auto& e : errors) os << "error: " << issue_name(e.kind) << " at '" << e.node << "': " << e.message << "\n";
  for (const auto& w : warnings) os << "warning: " << issue_name(w.kind) << " at '" << w.node << "': " << w.message << "\n";
  return os.str();
}

ValidationReport validate(const Circuit& c) {
  ValidationReport r;
  auto err = [&](IssueKind k, const std::string& id, const std::string& msg) { r.errors.push_back({k, id, msg}); };
  if (c.inputs().empty()) err(IssueKind::Structure, "", "circuit has no inputs");
  if (c.outputs().empty()) err(IssueKind::Structure, "", "circuit has no outputs");

  // structural checks that do not need an order
  bool ports_ok = true;
  for (const auto& [id, n] : c.nodes()) {
    if (n.role == NodeRole::Input && !n.parents.empty()) err(IssueKind::Structure, id, "input node has parents");
    if (n.role == NodeRole::Output && n.parents.size() != 1) err(IssueKind::Arity, id, "output node needs exactly one parent");
    if (n.role == NodeRole::Input && n.domain.real)
      err(IssueKind::Domain, id, "input domain must be finite");
    for (const auto& p : n.parents) {
      if (p.node == id) {
        err(IssueKind::Cycle, id, "self-loop");
        ports_ok = false;
        continue;
      }
      if (!c.has(p.node)) {
        err(IssueKind::DanglingPort, id, "parent '" + p.node + "' does not exist");
        ports_ok = false;
        continue;
      }
      if (c.node(p.node).role == NodeRole::Output) err(IssueKind::Structure, id, "output node '" + p.node + "' has a child");
      if (p.port < 0 || p.port >= c.arity_out(p.node)) {
        err(IssueKind::DanglingPort, id, "port " + ref_str(p) + " out of range");
        ports_ok = false;
      }
    }
    if (n.role == NodeRole::Compute) {
      int want = input_arity(n.gate);
      if (static_cast<int>(n.parents.size()) != want)
        err(IssueKind::Arity, id, gate_to_string(n.gate) + " takes " + std::to_string(want) + " inputs, got " +
                                      std::to_string(n.parents.size()));
    }
  }
  if (!ports_ok) return r;

  std::vector<std::string> order;
  try {
    order = c.topological_order();
  } catch (const CircuitFault& f) {
    err(IssueKind::Cycle, f.node(), f.what());
    return r;
  }

  // domain propagation
  std::map<std::string, std::vector<ValueSet>> sets;
  for (const auto& id : order) {
    const Node& n = c.node(id);
    if (n.role == NodeRole::Input) {
      sets[id] = {n.domain};
      continue;
    }
    std::vector<ValueSet> in;
    for (const auto& p : n.parents) in.push_back(sets[p.node].at(static_cast<size_t>(p.port)));
    if (n.role == NodeRole::Output) {
      sets[id] = in;
      continue;
    }
    if (static_cast<int>(in.size()) != input_arity(n.gate)) {
      sets[id] = std::vector<ValueSet>(static_cast<size_t>(output_arity(n.gate)), ValueSet::all());
      continue;
    }
    auto dom = input_domain(n.gate);
    bool fits = true;
    for (size_t i = 0; i < in.size(); ++i)
      if (!in[i].subset_of(dom[i])) {
        err(IssueKind::Domain, id, "port " + std::to_string(i) + " receives " + in[i].str() + " from " +
                                        ref_str(n.parents[i]) + ", gate " + gate_to_string(n.gate) + " accepts " +
                                        dom[i].str());
        fits = false;
      }
    sets[id] = fits ? output_codomain(n.gate, in)
                    : std::vector<ValueSet>(static_cast<size_t>(output_arity(n.gate)), ValueSet::all());
  }

  // liveness: every compute node should reach an output
  std::set<std::string> live;
  std::function<void(const std::string&)> mark = [&](const std::string& id) {
    if (!live.insert(id).second) return;
    for (const auto& p : c.node(id).parents) mark(p.node);
  };
  for (const auto& o : c.outputs()) mark(o);
  for (const auto& [id, n] : c.nodes())
    if (!live.count(id)) {
      if (n.role == NodeRole::Input) r.warnings.push_back({IssueKind::Unused, id, "input feeds no output"});
      else if (n.role == NodeRole::Compute) r.warnings.push_back({IssueKind::Unused, id, "node feeds no output"});
    }
  return r;
}

std::map<std::string, std::vector<ValueSet>> port_sets(const Circuit& c) {
  std::map<std::string, std::vector<ValueSet>> sets;
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    if (n.role == NodeRole::Input) {
      sets[id] = {n.domain};
      continue;
    }
    std::vector<ValueSet> in;
    for (const auto& p : n.parents) in.push_back(sets.at(p.node).at(static_cast<size_t>(p.port)));
    sets[id] = n.role == NodeRole::Output ? in : output_codomain(n.gate, in);
  }
  return sets;
}

std::map<std::string, std::vector<Dyadic>> interpret_all(const Circuit& c, const std::vector<Dyadic>& x) {
  if (x.size() != c.inputs().size())
    throw std::invalid_argument("interpret: " + std::to_string(x.size()) + " inputs given, circuit has " +
                                std::to_string(c.inputs().size()));
  std::map<std::string, std::vector<Dyadic>> val;
  for (size_t i = 0; i < x.size(); ++i) {
    const Node& n = c.node(c.inputs()[i]);
    if (!n.domain.contains(x[i]))
      throw CircuitFault(n.id, "input '" + n.id + "' = " + x[i].decimal() + " outside " + n.domain.str());
    val[n.id] = {x[i]};
  }
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    if (n.role == NodeRole::Input) continue;
    std::vector<Dyadic> in;
    for (const auto& p : n.parents) {
      const auto& pv = val.at(p.node);
      if (p.port < 0 || static_cast<size_t>(p.port) >= pv.size())
        throw CircuitFault(id, "node '" + id + "' reads missing port " + ref_str(p));
      in.push_back(pv[static_cast<size_t>(p.port)]);
    }
    if (n.role == NodeRole::Output) {
      val[id] = in;
      continue;
    }
    try {
      val[id] = gate_reference(n.gate, in);
    } catch (const DomainFault& f) {
      throw CircuitFault(id, "node '" + id + "' (" + gate_to_string(n.gate) + "): " + f.what());
    } catch (const std::invalid_argument& e) {
      throw CircuitFault(id, "node '" + id + "' (" + gate_to_string(n.gate) + "): " + e.what());
    }
  }
  return val;
}

std::vector<Dyadic> interpret(const Circuit& c, const std::vector<Dyadic>& x) {
  auto val = interpret_all(c, x);
  std::vector<Dyadic> out;
  for (const auto& o : c.outputs()) out.push_back(val.at(o).at(0));
  return out;
}

// ---------------------------------------------------------------- text format

namespace {

class ParseError : public std::invalid_argument {
public:
  ParseError(size_t line, size_t col, const std::string& msg)
      : std::invalid_argument("line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + msg) {}
};

struct Cursor {
  std::string_view s;
  size_t line;
  size_t pos = 0;

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line, pos + 1, msg); }
  void ws() {
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  }
  bool done() {
    ws();
    return pos >= s.size();
  }
  bool eat(char c) {
    ws();
    if (pos < s.size() && s[pos] == c) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect(char c) {
    if (!eat(c)) fail(std::string("expected '") + c + "'");
  }
  std::string ident() {
    ws();
    size_t start = pos;
    while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
    if (start == pos) fail("expected an identifier");
    return std::string(s.substr(start, pos - start));
  }
  int integer() {
    ws();
    size_t start = pos;
    while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
    if (start == pos) fail("expected a port number");
    return std::stoi(std::string(s.substr(start, pos - start)));
  }
  PortRef ref() {
    PortRef p;
    p.node = ident();
    if (eat('.')) p.port = integer();
    return p;
  }
  // text up to the matching close of the bracket that starts here
  std::string_view bracketed() {
    ws();
    size_t start = pos;
    int depth = 0;
    for (; pos < s.size(); ++pos) {
      char c = s[pos];
      if (c == '[' || c == '(') ++depth;
      if (c == ']' || c == ')') {
        if (--depth == 0) {
          ++pos;
          return s.substr(start, pos - start);
        }
      }
    }
    fail("unbalanced brackets");
  }
};

std::string_view strip_comment(std::string_view l) {
  auto h = l.find('#');
  return h == std::string_view::npos ? l : l.substr(0, h);
}

}  // namespace

Circuit parse_circuit(std::string_view text) {
  Circuit c;
  size_t line_no = 0;
  bool header = false;
  bool have_inputs = false;
  std::vector<std::pair<Cursor, std::string>> output_lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view raw = text.substr(start, end - start);
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    start = end + 1;
    ++line_no;
    Cursor cur{strip_comment(raw), line_no};
    if (cur.done()) {
      if (end == text.size()) break;
      continue;
    }
    std::string word = cur.ident();
    if (!header) {
      if (word != "circuit") cur.fail("expected header 'circuit 1'");
      int v = cur.integer();
      if (v != 1) cur.fail("unsupported circuit format version " + std::to_string(v));
      if (!cur.done()) cur.fail("trailing text after header");
      header = true;
    } else if (word == "inputs" && cur.eat(':')) {
      if (have_inputs) cur.fail("duplicate inputs line");
      have_inputs = true;
      do {
        std::string id = cur.ident();
        ValueSet dom = ValueSet::bit();
        if (cur.eat(':')) {
          cur.ws();
          size_t s0 = cur.pos;
          std::string name = cur.ident();
          std::string_view spec = cur.s.substr(s0, cur.pos - s0);
          if (cur.pos < cur.s.size() && cur.s[cur.pos] == '(') {
            cur.bracketed();
            spec = cur.s.substr(s0, cur.pos - s0);
          }
          try {
            dom = ValueSet::parse(spec);
          } catch (const std::exception& e) {
            throw ParseError(line_no, s0 + 1, e.what());
          }
          (void)name;
        }
        try {
          c.add_input(id, dom);
        } catch (const std::invalid_argument& e) {
          cur.fail(e.what());
        }
      } while (cur.eat(','));
      if (!cur.done()) cur.fail("unexpected text in inputs line");
    } else if (word == "outputs" && cur.eat(':')) {
      output_lines.emplace_back(cur, "");
    } else {
      cur.expect('=');
      cur.ws();
      size_t g0 = cur.pos;
      cur.ident();
      if (cur.pos < cur.s.size() && cur.s[cur.pos] == '[') cur.bracketed();
      std::string_view gtext = cur.s.substr(g0, cur.pos - g0);
      GateKind g;
      try {
        g = parse_gate(gtext);
      } catch (const std::exception& e) {
        throw ParseError(line_no, g0 + 1, e.what());
      }
      cur.expect('(');
      std::vector<PortRef> parents;
      if (!cur.eat(')')) {
        do parents.push_back(cur.ref());
        while (cur.eat(','));
        cur.expect(')');
      }
      if (!cur.done()) cur.fail("unexpected text after parent list");
      try {
        c.add_gate(word, std::move(g), std::move(parents));
      } catch (const std::invalid_argument& e) {
        throw ParseError(line_no, 1, e.what());
      }
    }
    if (end == text.size()) break;
  }
  if (!header) throw ParseError(1, 1, "missing header 'circuit 1'");
  if (!have_inputs) throw ParseError(line_no, 1, "missing inputs line");
  if (output_lines.empty()) throw ParseError(line_no, 1, "missing outputs line");
  if (output_lines.size() > 1) throw ParseError(output_lines[1].first.line, 1, "duplicate outputs line");
  Cursor cur = output_lines.front().first;
  do {
    std::string id = cur.ident();
    cur.expect('=');
    PortRef p = cur.ref();
    try {
      c.add_output(id, p);
    } catch (const std::invalid_argument& e) {
      cur.fail(e.what());
    }
  } while (cur.eat(','));
  if (!cur.done()) cur.fail("unexpected text in outputs line");
  return c;
}

std::string emit_circuit(const Circuit& c) {
  std::ostringstream os;
  os << "circuit 1\n";
  os << "inputs: ";
  for (size_t i = 0; i < c.inputs().size(); ++i) {
    const Node& n = c.node(c.inputs()[i]);
    os << (i ? ", " : "") << n.id << ":" << n.domain.str();
  }
  os << "\n";
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    if (n.role != NodeRole::Compute) continue;
    os << id << " = " << gate_to_string(n.gate) << "(";
    for (size_t i = 0; i < n.parents.size(); ++i) os << (i ? ", " : "") << ref_str(n.parents[i]);
    os << ")\n";
  }
  os << "outputs: ";
  for (size_t i = 0; i < c.outputs().size(); ++i) {
    const Node& n = c.node(c.outputs()[i]);
    os << (i ? ", " : "") << n.id << " = " << ref_str(n.parents.front());
  }
  os << "\n";
  return os.str();
}

namespace {

std::string dot_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '"' || ch == '\\') out.push_back('\\');
    out.push_back(ch);
  }
  return out;
}

}  // namespace

std::string to_dot(const Circuit& c) {
  std::ostringstream os;
  os << "digraph circuit {\n  rankdir=LR;\n";
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    std::string label, shape;
    switch (n.role) {
      case NodeRole::Input:
        label = dot_escape(id) + "\\n" + dot_escape(n.domain.str());
        shape = "invhouse";
        break;
      case NodeRole::Output:
        label = dot_escape(id);
        shape = "house";
        break;
      case NodeRole::Compute:
        label = dot_escape(id) + "\\n" + dot_escape(gate_to_string(n.gate));
        shape = "box";
        break;
    }
    os << "  \"" << dot_escape(id) << "\" [label=\"" << label << "\", shape=" << shape << "];\n";
  }
  for (const auto& id : c.topological_order()) {
    const Node& n = c.node(id);
    for (size_t i = 0; i < n.parents.size(); ++i)
      os << "  \"" << dot_escape(n.parents[i].node) << "\" -> \"" << dot_escape(id) << "\" [label=\""
         << n.parents[i].port << ":" << i << "\"];\n";
  }
  os << "}\n";
  return os.str();
}

Circuit normalize_parent_order(const Circuit& c) {
  Circuit out = c;
  for (const auto& id : out.compute_nodes()) {
    auto& ps = out.node_mut(id).parents;
    std::stable_sort(ps.begin(), ps.end(), [](const PortRef& a, const PortRef& b) {
      if (a.node != b.node) return id_less(a.node, b.node);
      return a.port < b.port;
    });
  }
  return out;
}

}  // namespace circnet
