#ifndef CIRCNET_BOUNDS_HPP
#define CIRCNET_BOUNDS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "circnet/gate.hpp"
#include "circnet/relunet.hpp"

namespace circnet {

// formulas over gate parameters; an empty string means "no bound"
struct BoundFormulas {
  std::string depth;
  std::string width;
  std::string params;
};

enum class BoundStatus { Strict, Discrepant, Lemma };

/**
 * One row of the shipped bound table.  Strict rows assert the table
 * formulas; discrepant rows assert the looser of table and proof per field;
 * lemma rows have no table entry and assert the proof formulas.
 **/
struct BoundRow {
  std::string row;
  std::vector<GateOp> ops;
  std::optional<BoundFormulas> table;
  std::optional<BoundFormulas> proof;
  BoundStatus status = BoundStatus::Strict;
  std::string reference;
  std::string note;
  std::vector<std::string> cases;
};

struct BoundTable {
  int format_version = 0;
  std::vector<BoundRow> rows;
};

const BoundTable& bound_table();
BoundTable parse_bound_table(const std::string& json_text);
const BoundRow* find_bound_row(const GateKind& g);
const char* status_name(BoundStatus s);

// variables available to formulas: B, B1, q, M, n, h = floor(n/2), d, and
// for quantifiers D, W, S of the inner network
std::map<std::string, int64_t> bound_variables(const GateKind& g);
// + - * / (floor) ^, parentheses, ceil_log2, floor_log2, max, min, pow2
int64_t eval_bound(const std::string& expr, const std::map<std::string, int64_t>& vars);

void attach_declared_bounds(const GateKind& g, ComplexityReport& report);

struct BoundAudit {
  std::string row;
  std::string gate;
  BoundStatus status = BoundStatus::Strict;
  ComplexityReport measured;  // bounds = the asserted ones
  std::optional<ComplexityReport> table;
  std::optional<ComplexityReport> proof;
  bool ok = false;
  std::string discrepancy;  // empty when the table row holds
};

BoundAudit audit_gate(const GateKind& g);
std::vector<BoundAudit> audit_bound_table();

}  // namespace circnet

#endif
