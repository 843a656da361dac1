#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#ifdef CDSPLIT_CLI_PATH

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
};

Run run(const std::string& args, const fs::path& dir) {
  const fs::path out = dir / "stdout.txt";
  const std::string cmd = std::string("\"") + CDSPLIT_CLI_PATH + "\" " + args + " > \"" + out.string() + "\" 2> \"" +
                          (dir / "stderr.txt").string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("cdsplit_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::size_t count_lines(const std::string& s) {
  std::size_t n = 0;
  for (char c : s) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("cli list") {
  const fs::path dir = scratch("list");
  const Run r = run("list", dir);
  CHECK(r.code == 0);
  for (const char* name : {"homoscedastic", "bimodal", "heteroscedastic", "asymmetric", "logistic", "cd-split",
                           "hpd-split", "reg-split", "local-reg-split", "quantile-split", "dist-split",
                           "probability-split"}) {
    CHECK(r.out.find(name) != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("cli predict on a small query") {
  const fs::path dir = scratch("predict");
  std::string train = "a,b,y\n";
  for (int i = 0; i < 300; ++i) {
    const double a = (i % 17) / 17.0;
    const double b = (i % 5) / 5.0;
    train += std::to_string(a) + "," + std::to_string(b) + "," + std::to_string(2.0 * a + ((i * 7919) % 101) / 100.0) + "\n";
  }
  write(dir / "train.csv", train);
  write(dir / "query.csv", "a,b\n0.1,0.2\n0.5,0.5\n0.9,0.1\n");
  const Run r = run("predict --train \"" + (dir / "train.csv").string() + "\" --query \"" +
                        (dir / "query.csv").string() + "\" --k 50",
                    dir);
  CHECK(r.code == 0);
  CHECK(count_lines(r.out) == 4);
  CHECK(r.out.rfind("row,element,size,flags,region\n", 0) == 0);

  write(dir / "bad.csv", "a,b,y\n1,2,3\n4,oops,6\n");
  const Run bad = run("predict --train \"" + (dir / "bad.csv").string() + "\" --query \"" +
                          (dir / "query.csv").string() + "\"",
                      dir);
  CHECK(bad.code == 1);
  fs::remove_all(dir);
}

TEST_CASE("cli simulate, flags and exit codes") {
  const fs::path dir = scratch("simulate");
  write(dir / "ok.json", R"({"scenario": {"name": "homoscedastic", "d": 1}, "n": 200, "replications": 3,
    "test_size": 20, "methods": ["hpd-split", "reg-split"], "output": "unused"})");
  const Run one = run("simulate --config \"" + (dir / "ok.json").string() + "\" --threads 1 --out \"" +
                          (dir / "t1").string() + "\"",
                      dir);
  CHECK(one.code == 0);
  const Run eight = run("simulate --config \"" + (dir / "ok.json").string() + "\" --threads 8 --out \"" +
                            (dir / "t8").string() + "\"",
                        dir);
  CHECK(eight.code == 0);
  std::ifstream a(dir / "t1" / "raw.csv");
  std::ifstream b(dir / "t8" / "raw.csv");
  std::stringstream sa;
  std::stringstream sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK_FALSE(sa.str().empty());
  CHECK(sa.str() == sb.str());
  CHECK_FALSE(fs::exists(dir / "unused"));

  write(dir / "bad.json", R"({"scenario": "homoscedastic", "methods": ["magic-split"], "output": "bad_out"})");
  const Run bad = run("simulate --config \"" + (dir / "bad.json").string() + "\" --out \"" +
                          (dir / "bad_out").string() + "\"",
                      dir);
  CHECK(bad.code == 1);
  CHECK_FALSE(fs::exists(dir / "bad_out"));

  CHECK(run("simulate", dir).code == 1);
  CHECK(run("frobnicate", dir).code == 1);
  fs::remove_all(dir);
}

#endif
