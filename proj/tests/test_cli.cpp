#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string out;  // stdout and stderr together
};

Outcome run(const std::string& args) {
  std::string cmd = std::string(CIRCNET_BIN) + " " + args + " 2>&1";
  Outcome r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  std::array<char, 4096> buf;
  size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string fixture(const std::string& name) { return std::string(FIXTURES) + "/" + name; }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class Cli : public ::testing::Test {
protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("circnet_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string tmp(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, AdderExampleOnBits) {
  ASSERT_EQ(run("gate 'ADD[B=4]' -o " + tmp("add.json")).code, 0);
  Outcome r = run("eval " + tmp("add.json") + " 0b0001 0b0111 --bits");
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_EQ(r.out, "0b1000\n");
}

TEST_F(Cli, GateThenVerify) {
  Outcome g = run("gate 'XOR[B=2]' -o " + tmp("x.json"));
  ASSERT_EQ(g.code, 0) << g.out;
  EXPECT_NE(g.out.find("depth 2"), std::string::npos);
  Outcome v = run("verify " + fixture("xor2.circ") + " " + tmp("x.json"));
  EXPECT_EQ(v.code, 0) << v.out;
  EXPECT_NE(v.out.find("PASS checked 16 mismatches 0"), std::string::npos) << v.out;
}

TEST_F(Cli, VerifyFailureReportsCounterexample) {
  ASSERT_EQ(run("gate 'AND[B=2]' -o " + tmp("a.json")).code, 0);
  Outcome v = run("verify " + fixture("xor2.circ") + " " + tmp("a.json"));
  EXPECT_EQ(v.code, 1);
  EXPECT_NE(v.out.find("FAIL"), std::string::npos);
  EXPECT_NE(v.out.find("counterexample #1: input (0 0 0 1) expected (0 1) got (0 0)"), std::string::npos) << v.out;
}

TEST_F(Cli, ApspTriangle) {
  Outcome r = run("--q 3 apsp --weights " + fixture("triangle.txt"));
  EXPECT_EQ(r.code, 0) << r.out;
  EXPECT_NE(r.out.find("d(1,3)=2"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("d(1,2)=1"), std::string::npos);
}

TEST_F(Cli, SynthCompileVerify) {
  ASSERT_EQ(run("synth " + fixture("parity3.tt") + " -o " + tmp("p.circ")).code, 0);
  Outcome c = run("compile " + tmp("p.circ") + " -o " + tmp("p.json"));
  ASSERT_EQ(c.code, 0) << c.out;
  EXPECT_NE(c.out.find("network"), std::string::npos);
  Outcome v = run("verify " + tmp("p.circ") + " " + tmp("p.json"));
  EXPECT_EQ(v.code, 0) << v.out;
  for (int x = 0; x < 8; ++x) {
    Outcome e = run("eval " + tmp("p.circ") + " " + std::to_string(x >> 2) + " " + std::to_string((x >> 1) & 1) + " " +
                std::to_string(x & 1));
    EXPECT_EQ(e.out, std::to_string(__builtin_popcount(x) & 1) + "\n");
  }
}

TEST_F(Cli, CircuitAndNetworkEvalAgree) {
  ASSERT_EQ(run("compile " + fixture("mixed.circ") + " -o " + tmp("m.json")).code, 0);
  Outcome a = run("eval " + fixture("mixed.circ") + " 1.5 -0.5 1");
  Outcome b = run("eval " + tmp("m.json") + " 1.5 -0.5 1");
  EXPECT_EQ(a.out, "-0.5 -1 0\n");
  EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, Universal) {
  Outcome u = run("--q 1 universal " + fixture("abs_q1.txt") + " -o " + tmp("u.json"));
  ASSERT_EQ(u.code, 0) << u.out;
  EXPECT_NE(u.out.find("grid points 15"), std::string::npos);
  EXPECT_EQ(run("eval " + tmp("u.json") + " -- -2.5").out, "2.5\n");
  EXPECT_EQ(run("eval " + tmp("u.json") + " 0.5").out, "0.5\n");
  // wrong count for q = 2
  EXPECT_EQ(run("--q 2 universal " + fixture("abs_q1.txt") + " -o " + tmp("v.json")).code, 2);
}

TEST_F(Cli, Dot) {
  Outcome d = run("dot " + fixture("xor2.circ"));
  EXPECT_EQ(d.code, 0);
  EXPECT_NE(d.out.find("digraph"), std::string::npos);
  EXPECT_NE(d.out.find("XOR[B=2]"), std::string::npos);
  ASSERT_EQ(run("gate 'XOR[B=2]' -o " + tmp("x.json")).code, 0);
  EXPECT_EQ(run("dot " + tmp("x.json")).code, 0);
}

TEST_F(Cli, ParseErrorNamesFileAndLine) {
  Outcome r = run("compile " + fixture("bad.circ"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("bad.circ: line 3"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("error:"), std::string::npos);
  EXPECT_EQ(run("gate 'NOPE[B=1]'").code, 2);
  EXPECT_NE(run("compile /nonexistent/file.circ").code, 0);
}

TEST_F(Cli, ByteDeterministicOutputs) {
  ASSERT_EQ(run("compile " + fixture("mixed.circ") + " -o " + tmp("a.json")).code, 0);
  ASSERT_EQ(run("compile " + fixture("mixed.circ") + " -o " + tmp("b.json")).code, 0);
  EXPECT_EQ(slurp(tmp("a.json")), slurp(tmp("b.json")));
  std::string v = "verify " + fixture("mixed.circ") + " " + tmp("a.json") + " --omit-timing -o ";
  ASSERT_EQ(run(v + tmp("c1.json")).code, 0);
  ASSERT_EQ(run("--threads 2 " + v + tmp("c2.json")).code, 0);
  EXPECT_EQ(slurp(tmp("c1.json")), slurp(tmp("c2.json")));
  EXPECT_EQ(slurp(tmp("c1.json")).find("seconds"), std::string::npos);
}

TEST_F(Cli, GateCatalog) {
  Outcome r = run("gate --catalog " + tmp("cat.json"));
  EXPECT_EQ(r.code, 0) << r.out.substr(0, 2000);
  EXPECT_TRUE(fs::exists(tmp("cat.json")));
}
