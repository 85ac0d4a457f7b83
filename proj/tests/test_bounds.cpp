#include <gtest/gtest.h>

#include <set>

#include "circnet/bounds.hpp"
#include "circnet/gatelib.hpp"

using namespace circnet;

TEST(BoundFormula, Evaluator) {
  std::map<std::string, int64_t> v{{"B", 4}, {"q", 2}, {"M", 7}, {"n", 5}};
  EXPECT_EQ(eval_bound("2*B+1", v), 9);
  EXPECT_EQ(eval_bound("B^2+1", v), 17);
  EXPECT_EQ(eval_bound("3*ceil_log2(2*M+1)+9", v), 21);
  EXPECT_EQ(eval_bound("floor_log2(n)", v), 2);
  EXPECT_EQ(eval_bound("max(B, q, 7) - min(1, 2)", v), 6);
  EXPECT_EQ(eval_bound("pow2(q+1)", v), 8);
  EXPECT_EQ(eval_bound("-7/2", v), -4);  // floor division
  EXPECT_THROW(eval_bound("B+", v), std::invalid_argument);
  EXPECT_THROW(eval_bound("Z", v), std::invalid_argument);
  EXPECT_THROW(eval_bound("1/0", v), std::invalid_argument);
}

TEST(BoundTable, Loads) {
  const BoundTable& t = bound_table();
  EXPECT_EQ(t.format_version, 1);
  EXPECT_FALSE(t.rows.empty());
  std::set<GateOp> covered;
  for (const auto& r : t.rows) {
    EXPECT_FALSE(r.cases.empty()) << r.row;
    for (GateOp op : r.ops) covered.insert(op);
    if (r.status == BoundStatus::Strict) EXPECT_TRUE(r.table.has_value()) << r.row;
    if (r.status == BoundStatus::Lemma) EXPECT_TRUE(r.proof.has_value()) << r.row;
    if (r.status == BoundStatus::Discrepant) EXPECT_TRUE(r.table && r.proof) << r.row;
  }
  for (GateOp op : all_gate_ops()) {
    if (op == GateOp::Identity) continue;
    EXPECT_TRUE(covered.count(op)) << gate_name(op);
  }
}

TEST(BoundTable, RejectsMalformed) {
  EXPECT_THROW(parse_bound_table(R"({"format_version":1,"rows":[{"row":"x","ops":["AND"],"status":"odd"}]})"),
               std::invalid_argument);
  EXPECT_THROW(parse_bound_table(R"({"format_version":1,"rows":[{"row":"x","ops":["AND"],"status":"strict"}]})"),
               std::invalid_argument);
}

TEST(BoundAudit, EveryCaseWithinAssertedBound) {
  auto audits = audit_bound_table();
  ASSERT_FALSE(audits.empty());
  for (const auto& a : audits) {
    EXPECT_TRUE(a.ok) << a.row << " " << a.gate << ": depth " << a.measured.depth << " width " << a.measured.width
                      << " params " << a.measured.nonzero_params;
    // a strict row may not exceed its table entry anywhere
    if (a.status == BoundStatus::Strict) EXPECT_TRUE(a.discrepancy.empty()) << a.row << ": " << a.discrepancy;
  }
}

TEST(BoundAudit, DiscrepantRowsExplainThemselves) {
  for (const auto& r : bound_table().rows)
    if (r.status == BoundStatus::Discrepant) EXPECT_FALSE(r.note.empty() && r.reference.empty()) << r.row;
}

TEST(BoundAudit, AttachDeclared) {
  ComplexityReport rep = stats(gate_network(parse_gate("XOR[B=3]")));
  attach_declared_bounds(parse_gate("XOR[B=3]"), rep);
  EXPECT_TRUE(rep.bound_depth && rep.bound_width && rep.bound_params);
  EXPECT_TRUE(rep.within_bounds());
  EXPECT_FALSE(rep.source.empty());
  // grid-port modular gates are not table rows by themselves
  EXPECT_EQ(find_bound_row(GateKind::modular(GateOp::ModAdd, 1)), nullptr);
  EXPECT_NE(find_bound_row(GateKind::modular(GateOp::ModAdd, 1, true)), nullptr);
}

TEST(BoundAudit, QuantifierVariables) {
  GateKind g = GateKind::forall(GateKind::logic(GateOp::Or, 1), 1);
  auto v = bound_variables(g);
  ComplexityReport inner = stats(gate_network(GateKind::logic(GateOp::Or, 1)));
  EXPECT_EQ(v["D"], inner.depth);
  EXPECT_EQ(v["S"], inner.nonzero_params);
  EXPECT_EQ(v["B"], 1);
}
