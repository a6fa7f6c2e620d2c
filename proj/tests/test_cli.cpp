#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "srj/csv.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" SRJ_CLI_PATH "\" " + args + " 2>/dev/null";
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::vector<std::vector<std::string>> records(const std::string& text) {
  std::istringstream in(text);
  std::vector<std::vector<std::string>> out;
  std::string line;
  while (srj::csv::next_record(in, line)) out.push_back(srj::csv::split(line));
  return out;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "srj_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
}

}  // namespace

TEST(Cli, SchemeSingleFactor) {
  const auto r = run("scheme 1");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# schema=1\n", 0), 0u);
  const auto rec = records(r.out);
  ASSERT_EQ(rec.size(), 2u);
  EXPECT_EQ(rec[0], (std::vector<std::string>{"index", "omega", "order_position"}));
  EXPECT_NEAR(std::stod(rec[1][1]), 2.0 / 3.0, 1e-15);
}

TEST(Cli, SchemeByLevel) {
  const auto r = run("scheme --level 10");
  ASSERT_EQ(r.code, 0);
  const auto rec = records(r.out);
  EXPECT_EQ(rec.size(), 48u);
  std::vector<bool> seen(47, false);
  for (std::size_t i = 1; i < rec.size(); ++i) seen.at(std::stoul(rec[i][2])) = true;
  for (bool s : seen) EXPECT_TRUE(s);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run("scheme 0").code, 1);
  EXPECT_EQ(run("scheme --level 25").code, 1);
  EXPECT_EQ(run("solve").code, 1);
  EXPECT_EQ(run("solve --problem nosuch:3").code, 1);
  EXPECT_EQ(run("frobnicate").code, 1);
  EXPECT_EQ(run("fit --method magic").code, 1);
}

TEST(Cli, SolveExitCodes) {
  const auto ok = run("solve --problem poisson1d:100 --controller heuristic");
  ASSERT_EQ(ok.code, 0);
  const auto rec = records(ok.out);
  ASSERT_GE(rec.size(), 3u);
  EXPECT_EQ(rec.back()[0], "total");
  EXPECT_LT(std::stoul(rec.back()[6]), 1500u);
  EXPECT_NE(ok.out.find("# converged=1"), std::string::npos);

  const auto capped = run("solve --problem poisson1d:100 --controller jacobi --max-iters 1000");
  EXPECT_EQ(capped.code, 2);
  EXPECT_NE(capped.out.find("# converged=0"), std::string::npos);

  const auto mesh = run("solve --problem mesh:" SRJ_ASSET_DIR "/disk.mesh --tol 1e-9");
  EXPECT_EQ(mesh.code, 0);
}

TEST(Cli, SolveTraceAndThresholds) {
  const auto trace = scratch("trace.csv");
  const auto th = scratch("th.txt");
  write_file(th, "t_hi=0.39\nt_lo=0.21\n");
  const auto r = run("solve --problem poisson1d:50 --thresholds " + th.string() + " --trace " + trace.string());
  ASSERT_EQ(r.code, 0);
  std::ifstream in(trace);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto rec = records(ss.str());
  ASSERT_GE(rec.size(), 2u);
  EXPECT_EQ(rec[0], (std::vector<std::string>{"iteration", "residual"}));
  EXPECT_EQ(rec[1][0], "0");
  write_file(th, "t_hi=0.1\nt_lo=0.3\n");
  EXPECT_EQ(run("solve --problem poisson1d:50 --thresholds " + th.string()).code, 1);
}

TEST(Cli, BenchHeuristicBeatsIncreasing) {
  const auto spec = scratch("bench.json");
  write_file(spec, R"({"family":"poisson1d","sizes":[50,100,200,400],"controllers":["heuristic","increasing"]})");
  const auto a = run("bench " + spec.string());
  ASSERT_EQ(a.code, 0);
  const auto rec = records(a.out);
  ASSERT_EQ(rec.size(), 9u);
  EXPECT_EQ(rec[0][0], "size");
  for (std::size_t i = 1; i < rec.size(); i += 2) {
    EXPECT_EQ(rec[i][2], "heuristic");
    EXPECT_EQ(rec[i][7], "ok");
    EXPECT_LE(std::stoul(rec[i][4]), std::stoul(rec[i + 1][4])) << "size " << rec[i][0];
  }
  const auto b = run("bench " + spec.string() + " --jobs 2");
  const auto rec_b = records(b.out);
  ASSERT_EQ(rec_b.size(), rec.size());
  for (std::size_t i = 0; i < rec.size(); ++i) {
    for (std::size_t k = 0; k < rec[i].size(); ++k) {
      if (k != 6) {
        EXPECT_EQ(rec[i][k], rec_b[i][k]);
      }
    }
  }
}

TEST(Cli, BenchErrors) {
  const auto spec = scratch("bad.json");
  write_file(spec, R"({"family":"poisson1d","sizes":[10],"controllers":[]})");
  EXPECT_EQ(run("bench " + spec.string()).code, 1);
  write_file(spec, "{not json");
  EXPECT_EQ(run("bench " + spec.string()).code, 1);
  write_file(spec, R"({"problems":["poisson1d:10","mesh:/nonexistent.mesh"],"controllers":["heuristic"]})");
  const auto r = run("bench " + spec.string());
  EXPECT_EQ(r.code, 0);
  const auto rec = records(r.out);
  ASSERT_EQ(rec.size(), 3u);
  EXPECT_EQ(rec[1][7], "ok");
  EXPECT_EQ(rec[2][7], "error");
}

TEST(Cli, CollectIsReproducibleAndFitReadsIt) {
  const auto a = run("collect --sizes 5,10 --points 200 --seed 4");
  const auto b = run("collect --sizes 5,10 --points 200 --seed 4");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_GE(records(a.out).size(), 201u);
  const auto env = run("collect --sizes 5,10 --points 200", "SRJ_SEED=4");
  EXPECT_EQ(env.out, a.out);
  const auto other = run("collect --sizes 5,10 --points 200", "SRJ_SEED=5");
  EXPECT_NE(other.out, a.out);

  const auto data = scratch("points.csv");
  write_file(data, a.out);
  const auto clusters = scratch("clusters.csv");
  const auto f = run("fit --data " + data.string() + " --n-set 40 --method min-error --clusters " + clusters.string());
  ASSERT_EQ(f.code, 0);
  EXPECT_NE(f.out.find("t_hi="), std::string::npos);
  EXPECT_NE(f.out.find("t_lo="), std::string::npos);
  EXPECT_TRUE(fs::exists(clusters));
}

TEST(Cli, FitRejectsEmptyData) {
  const auto empty = scratch("empty.csv");
  write_file(empty, "# schema=1\ntrial,step,action,avg_rate,level,prev_ratio\n");
  EXPECT_EQ(run("fit --data " + empty.string()).code, 1);
  EXPECT_EQ(run("fit --data /nonexistent/data.csv").code, 1);
}

TEST(Cli, SeedSelectsRandomProblem) {
  const auto a = run("solve --problem tridiag:60", "SRJ_SEED=1");
  const auto b = run("solve --problem tridiag:60 --seed 1");
  const auto c = run("solve --problem tridiag:60 --seed 2");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(records(a.out).back(), records(b.out).back());
  EXPECT_NE(records(a.out).back(), records(c.out).back());
}

TEST(Cli, ExportWritesMatrixMarket) {
  const auto prefix = scratch("exp").string();
  ASSERT_EQ(run("export --problem poisson1d:4 --out " + prefix).code, 0);
  for (const char* suffix : {"_A.mtx", "_b.mtx", "_x0.mtx"}) {
    std::ifstream in(prefix + suffix);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.rfind("%%MatrixMarket", 0), 0u) << suffix;
  }
  const auto r = run("solve --problem mtx:" + prefix + "_A.mtx --controller fixed:5");
  EXPECT_EQ(r.code, 0);
}
