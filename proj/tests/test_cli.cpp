#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(SPATINV_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  size_t got;
  while ((got = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, got);
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string temp_csv(const std::string& tag) {
  return "/tmp/spatinv_cli_" + tag + "_" + std::to_string(getpid()) + ".csv";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("analyze prints the hypothesis report") {
  const auto r = run("analyze --model robot");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("\"n_phi\": 2") != std::string::npos);
  CHECK(r.output.find("Certified") != std::string::npos);
  CHECK(r.output.find("t^-1/2 sharp") != std::string::npos);
}

TEST_CASE("analyze rejects unknown models with exit code 2") {
  const auto r = run("analyze --model nope");
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("simulate writes a CSV that fit can consume") {
  FileGuard fg{temp_csv("sim")};
  // The square-root envelope of the supremum curve holds while t stays well
  // below N_max^2, so the section sizes must reach past the fit window.
  const auto r = run("simulate --model robot --kind circulant --N 4..256 --p 2 "
                     "--t 1:10000:10 --out " + fg.path);
  CHECK(r.exit_code == 0);
  const std::string body = slurp(fg.path);
  CHECK(body.rfind("# spatinv", 0) == 0);
  CHECK(body.find("t,lower,upper,N,p,kind") != std::string::npos);

  const auto f = run("fit " + fg.path + " --t-lo 100 --t-hi 1000");
  CHECK(f.exit_code == 0);
  const auto pos = f.output.find("\"alpha\"");
  REQUIRE(pos != std::string::npos);
  const double alpha = std::stod(f.output.substr(f.output.find(':', pos) + 1));
  CHECK(alpha > 0.4);
  CHECK(alpha < 0.6);
}

TEST_CASE("simulate output is deterministic") {
  FileGuard a{temp_csv("det_a")}, b{temp_csv("det_b")};
  const std::string spec = "simulate --model platoon_pair --params 2,1,1 --kind onesided "
                           "--N 4 --p 1 --t 1:100:5 --out ";
  CHECK(run(spec + a.path).exit_code == 0);
  CHECK(run(spec + b.path).exit_code == 0);
  CHECK(slurp(a.path) == slurp(b.path));
  CHECK(!slurp(a.path).empty());
}

TEST_CASE("cesaro classifies the telescoping initial state") {
  const auto r = run("cesaro --model robot --x0 difference --p 1 --n-max 50");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("classification=O(1/n)") != std::string::npos);
}

TEST_CASE("bad arguments exit with code 2") {
  CHECK(run("simulate --model robot --kind bogus --N 4 --t 1:10:5").exit_code == 2);
  CHECK(run("fit /tmp/spatinv_no_such_file.csv").exit_code == 2);
}

TEST_CASE("spectrum emits tagged eigenvalue rows") {
  const auto r = run("spectrum --model platoon_pair --params 2,1,1 --N 8");
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("re,im,tag") != std::string::npos);
  CHECK(r.output.find("circulant-N8") != std::string::npos);
  CHECK(r.output.find("contour-") != std::string::npos);
}
