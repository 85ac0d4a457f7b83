#include "circnet/bounds.hpp"

#include <cctype>
#include <stdexcept>

#include <json.hpp>

#include "circnet/gatelib.hpp"

namespace circnet {

extern const char* const kBoundTableJson;

namespace {

class Parser {
public:
  Parser(const std::string& s, const std::map<std::string, int64_t>& vars) : s_(s), vars_(vars) {}

  int64_t run() {
    int64_t v = expr();
    skip();
    if (pos_ != s_.size()) fail("unexpected '" + std::string(1, s_[pos_]) + "'");
    return v;
  }

private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw std::invalid_argument("bound formula '" + s_ + "': " + msg);
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }
  bool eat(char c) {
    skip();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  int64_t expr() {
    int64_t v = term();
    for (;;) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }
  int64_t term() {
    int64_t v = power();
    for (;;) {
      if (eat('*')) {
        v *= power();
      } else if (eat('/')) {
        int64_t d = power();
        if (d == 0) fail("division by zero");
        int64_t q = v / d;
        if ((v % d != 0) && ((v < 0) != (d < 0))) --q;
        v = q;
      } else {
        return v;
      }
    }
  }
  int64_t power() {
    int64_t base = unary();
    if (eat('^')) {
      int64_t e = power();
      if (e < 0 || e > 62) fail("exponent out of range");
      int64_t r = 1;
      for (int64_t i = 0; i < e; ++i) r *= base;
      return r;
    }
    return base;
  }
  int64_t unary() {
    if (eat('-')) return -unary();
    return atom();
  }
  int64_t atom() {
    skip();
    if (eat('(')) {
      int64_t v = expr();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
      int64_t v = 0;
      while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) v = v * 10 + (s_[pos_++] - '0');
      return v;
    }
    std::string id;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) id += s_[pos_++];
    if (id.empty()) fail("expected a value");
    if (eat('(')) {
      std::vector<int64_t> args{expr()};
      while (eat(',')) args.push_back(expr());
      if (!eat(')')) fail("missing ')'");
      return call(id, args);
    }
    auto it = vars_.find(id);
    if (it == vars_.end()) fail("unknown variable '" + id + "'");
    return it->second;
  }
  int64_t call(const std::string& f, const std::vector<int64_t>& a) {
    auto arity = [&](size_t n) {
      if (a.size() != n) fail(f + " expects " + std::to_string(n) + " argument(s)");
    };
    if (f == "ceil_log2" || f == "floor_log2") {
      arity(1);
      if (a[0] < 1) fail(f + " of a non-positive value");
      int64_t k = 0;
      while ((int64_t(1) << k) < a[0]) ++k;  // ceil
      if (f == "floor_log2" && (int64_t(1) << k) != a[0]) --k;
      return k;
    }
    if (f == "max" || f == "min") {
      if (a.empty()) fail(f + " needs arguments");
      int64_t v = a[0];
      for (auto x : a) v = f == "max" ? std::max(v, x) : std::min(v, x);
      return v;
    }
    if (f == "pow2") {
      arity(1);
      if (a[0] < 0 || a[0] > 62) fail("pow2 exponent out of range");
      return int64_t(1) << a[0];
    }
    fail("unknown function '" + f + "'");
  }

  const std::string& s_;
  const std::map<std::string, int64_t>& vars_;
  size_t pos_ = 0;
};

std::optional<BoundFormulas> formulas(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  BoundFormulas f;
  f.depth = j.value("depth", "");
  f.width = j.value("width", "");
  f.params = j.value("params", "");
  return f;
}

BoundStatus parse_status(const std::string& s) {
  if (s == "strict") return BoundStatus::Strict;
  if (s == "discrepant") return BoundStatus::Discrepant;
  if (s == "lemma") return BoundStatus::Lemma;
  throw std::invalid_argument("bound table: unknown status '" + s + "'");
}

std::optional<long> eval_opt(const std::string& f, const std::map<std::string, int64_t>& vars) {
  if (f.empty()) return std::nullopt;
  return static_cast<long>(eval_bound(f, vars));
}

ComplexityReport evaluate(const BoundFormulas& f, const std::map<std::string, int64_t>& vars) {
  ComplexityReport r;
  r.bound_depth = eval_opt(f.depth, vars);
  r.bound_width = eval_opt(f.width, vars);
  r.bound_params = eval_opt(f.params, vars);
  return r;
}

std::optional<long> looser(std::optional<long> a, std::optional<long> b) {
  // a missing entry on either side leaves the field unbounded
  if (!a || !b) return std::nullopt;
  return std::max(*a, *b);
}

struct Asserted {
  std::optional<ComplexityReport> table, proof;
  ComplexityReport bounds;
};

Asserted asserted_bounds(const BoundRow& row, const GateKind& g) {
  auto vars = bound_variables(g);
  Asserted a;
  if (row.table) a.table = evaluate(*row.table, vars);
  if (row.proof) a.proof = evaluate(*row.proof, vars);
  switch (row.status) {
    case BoundStatus::Strict:
      a.bounds = *a.table;
      break;
    case BoundStatus::Lemma:
      a.bounds = *a.proof;
      break;
    case BoundStatus::Discrepant:
      a.bounds.bound_depth = looser(a.table->bound_depth, a.proof->bound_depth);
      a.bounds.bound_width = looser(a.table->bound_width, a.proof->bound_width);
      a.bounds.bound_params = looser(a.table->bound_params, a.proof->bound_params);
      break;
  }
  return a;
}

void over(std::string& out, const char* what, long v, std::optional<long> b) {
  if (b && v > *b) {
    if (!out.empty()) out += "; ";
    out += std::string(what) + " " + std::to_string(v) + " > table " + std::to_string(*b);
  }
}

}  // namespace

int64_t eval_bound(const std::string& expr, const std::map<std::string, int64_t>& vars) {
  return Parser(expr, vars).run();
}

const char* status_name(BoundStatus s) {
  switch (s) {
    case BoundStatus::Strict: return "strict";
    case BoundStatus::Discrepant: return "discrepant";
    case BoundStatus::Lemma: return "lemma";
  }
  return "?";
}

BoundTable parse_bound_table(const std::string& json_text) {
  auto j = nlohmann::json::parse(json_text);
  BoundTable t;
  t.format_version = j.at("format_version").get<int>();
  for (const auto& r : j.at("rows")) {
    BoundRow row;
    row.row = r.at("row").get<std::string>();
    for (const auto& op : r.at("ops")) row.ops.push_back(gate_op_from_name(op.get<std::string>()));
    row.table = formulas(r.value("table", nlohmann::json()));
    row.proof = formulas(r.value("proof", nlohmann::json()));
    row.status = parse_status(r.at("status").get<std::string>());
    row.reference = r.value("reference", "");
    row.note = r.value("note", "");
    for (const auto& c : r.value("cases", nlohmann::json::array())) row.cases.push_back(c.get<std::string>());
    if (row.status != BoundStatus::Lemma && !row.table)
      throw std::invalid_argument("bound table row '" + row.row + "' lacks table formulas");
    if (row.status != BoundStatus::Strict && !row.proof)
      throw std::invalid_argument("bound table row '" + row.row + "' lacks proof formulas");
    t.rows.push_back(std::move(row));
  }
  return t;
}

const BoundTable& bound_table() {
  static const BoundTable t = parse_bound_table(kBoundTableJson);
  return t;
}

const BoundRow* find_bound_row(const GateKind& g) {
  // grid-port modular gates carry adapters the rows do not cover
  if ((g.op == GateOp::ModAdd || g.op == GateOp::ModMult) && !g.bits) return nullptr;
  for (const auto& r : bound_table().rows)
    for (GateOp op : r.ops)
      if (op == g.op) return &r;
  return nullptr;
}

std::map<std::string, int64_t> bound_variables(const GateKind& g) {
  std::map<std::string, int64_t> v{{"B", g.B}, {"B1", g.B1}, {"q", g.q}, {"M", g.M}, {"n", g.n}};
  switch (g.op) {
    case GateOp::Constant:
    case GateOp::PointIndicator:
      v["n"] = static_cast<int64_t>(g.vec.size());
      break;
    case GateOp::RemainderBits:
      v["M"] = int64_t(1) << g.q;
      break;
    case GateOp::Forall:
    case GateOp::Exists: {
      ComplexityReport inner = stats(gate_network(*g.inner));
      v["B"] = g.B1;
      v["D"] = inner.depth;
      v["W"] = inner.width;
      v["S"] = inner.nonzero_params;
      break;
    }
    default:
      break;
  }
  v["h"] = v["n"] / 2;
  v["d"] = v["n"];
  return v;
}

void attach_declared_bounds(const GateKind& g, ComplexityReport& report) {
  const BoundRow* row = find_bound_row(g);
  if (!row) return;
  Asserted a = asserted_bounds(*row, g);
  report.bound_depth = a.bounds.bound_depth;
  report.bound_width = a.bounds.bound_width;
  report.bound_params = a.bounds.bound_params;
  report.source = row->row + " (" + status_name(row->status) + ")";
}

BoundAudit audit_gate(const GateKind& g) {
  const BoundRow* row = find_bound_row(g);
  if (!row) throw std::invalid_argument("no bound table row for " + gate_to_string(g));
  BoundAudit out;
  out.row = row->row;
  out.gate = gate_to_string(g);
  out.status = row->status;
  out.measured = stats(gate_network(g));
  Asserted a = asserted_bounds(*row, g);
  out.table = a.table;
  out.proof = a.proof;
  out.measured.bound_depth = a.bounds.bound_depth;
  out.measured.bound_width = a.bounds.bound_width;
  out.measured.bound_params = a.bounds.bound_params;
  out.measured.source = row->row;
  out.ok = out.measured.within_bounds();
  if (a.table) {
    over(out.discrepancy, "depth", out.measured.depth, a.table->bound_depth);
    over(out.discrepancy, "width", out.measured.width, a.table->bound_width);
    over(out.discrepancy, "params", out.measured.nonzero_params, a.table->bound_params);
  }
  return out;
}

std::vector<BoundAudit> audit_bound_table() {
  std::vector<BoundAudit> out;
  for (const auto& r : bound_table().rows)
    for (const auto& c : r.cases) out.push_back(audit_gate(parse_gate(c)));
  return out;
}

}  // namespace circnet
