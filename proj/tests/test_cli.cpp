#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qsd/state_io.hpp"
#include "test_support.hpp"

using namespace qsd;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = -1;
  std::string out;
};

Invocation run(const std::string& args) {
  const std::string cmd = std::string(QSD_BOUNDS_EXE) + " " + args + " 2>&1";
  Invocation r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::size_t n = fread(buf, 1, sizeof buf, pipe)) r.out.append(buf, n);
  const int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

double value_of(const std::string& out, const std::string& key) {
  std::istringstream in(out);
  std::string k;
  std::string v;
  while (in >> k) {
    std::getline(in, v);
    if (k == key) return std::stod(v);
  }
  return NAN;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("qsd_cli_" + std::to_string(::getpid()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write(const std::string& name, const StateSet& s) {
    const fs::path p = dir_ / name;
    write_state_set(p, s);
    return p.string();
  }
  std::string write_text(const std::string& name, const std::string& text) {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p.string();
  }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, ValidateOk) {
  const Invocation r = run("validate " + write("pair.json", qsd::testing::identical_pair()));
  EXPECT_EQ(r.code, 0) << r.out;
}

TEST_F(Cli, ValidateRejectsBadPriors) {
  const HermitianOperator half = 0.5 * HermitianOperator::identity(2);
  const Invocation r = run("validate " + write("bad.json", StateSet({{0.3, half}, {0.6, half}})));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("prior_sum"), std::string::npos);
}

TEST_F(Cli, MalformedFileIsInputError) {
  const Invocation r = run("bounds me " + write_text("m.json", R"({"dim": 1, "states": [{"density": {"re": [[1]], "im": [[0]]}}]})"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.out.find("$.states[0].prior"), std::string::npos) << r.out;
  EXPECT_EQ(run("bounds me " + (dir_ / "missing.json").string()).code, 2);
  EXPECT_EQ(run("bounds me").code, 2);
}

TEST_F(Cli, BoundsMeIdenticalPair) {
  const std::string json = (dir_ / "report.json").string();
  const Invocation r = run("bounds me " + write("pair.json", qsd::testing::identical_pair()) + " --json " + json);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(value_of(r.out, "pcup"), 0.7, 1e-12);
  EXPECT_NEAR(value_of(r.out, "pclp"), 0.7, 1e-12);
  EXPECT_NEAR(value_of(r.out, "srm"), 0.58, 1e-12);
  EXPECT_NEAR(value_of(r.out, "oracle_primal"), 0.7, 1e-6);
  EXPECT_TRUE(fs::exists(json));
}

TEST_F(Cli, BoundsMeOrthogonal) {
  const Invocation r = run("bounds me " + write("o.json", qsd::testing::orthogonal_pair()));
  ASSERT_EQ(r.code, 0) << r.out;
  for (const char* k : {"pcup", "pcup_prime", "qiu", "pclp", "srm"}) EXPECT_NEAR(value_of(r.out, k), 1.0, 1e-12) << k;
}

TEST_F(Cli, BoundsInc) {
  const std::string f = write("o.json", qsd::testing::orthogonal_pair());
  Invocation r = run("bounds inc " + f + " --p 0.25 --iters 3");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(value_of(r.out, "pcuip"), 0.75, 1e-9);
  EXPECT_NEAR(value_of(r.out, "pclip"), 0.75, 1e-9);
  r = run("bounds inc " + f + " --p 1");
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(value_of(r.out, "pcuip"), 0.0, 1e-12);
  EXPECT_NEAR(value_of(r.out, "pclip"), 0.0, 1e-9);
  EXPECT_EQ(run("bounds inc " + f + " --p 1.5").code, 2);
}

TEST_F(Cli, Oracle) {
  const std::string f = write("pp.json", qsd::testing::pure_pair());
  const Invocation r = run("oracle me " + f);
  ASSERT_EQ(r.code, 0) << r.out;
  EXPECT_NEAR(value_of(r.out, "primal"), 0.9, 1e-6);
  const Invocation i = run("oracle inc " + write("ip.json", qsd::testing::identical_pair()) + " --p 0.1");
  ASSERT_EQ(i.code, 0) << i.out;
  EXPECT_NEAR(value_of(i.out, "primal"), 0.63, 1e-6);
}

TEST_F(Cli, ExperimentIsByteIdentical) {
  const std::string a = (dir_ / "a.csv").string();
  const std::string b = (dir_ / "b.csv").string();
  const std::string args = "experiment --M 2 3 --R 1 --trials 4 --seed 5 --no-timing --out ";
  ASSERT_EQ(run(args + a).code, 0);
  ASSERT_EQ(run(args + b).code, 0);
  std::ifstream fa(a);
  std::ifstream fb(b);
  std::stringstream sa;
  std::stringstream sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  EXPECT_EQ(sa.str(), sb.str());
  EXPECT_EQ(sa.str().rfind("# qsd-bounds v1", 0), 0u);
}
