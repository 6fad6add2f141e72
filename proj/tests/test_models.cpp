#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "spatinv/models.hpp"
#include "spatinv/spectra.hpp"

using namespace spatinv;

namespace {

std::string temp_path(const std::string& tag) {
  return "/tmp/spatinv_test_" + tag + "_" + std::to_string(getpid()) + ".json";
}

struct FileGuard {
  std::string path;
  ~FileGuard() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("scalar chain literals") {
  const SystemPair sys = build_robot();
  CHECK(sys.m == 1);
  CHECK(sys.label == "robot");
  CHECK(sys.A0(0, 0) == Complex(-1.0));
  CHECK(sys.A1(0, 0) == Complex(1.0));
}

TEST_CASE("vehicle-chain companion layout") {
  const SystemPair sys = build_platoon(6, 11, 6);
  CHECK(sys.m == 3);
  CHECK(sys.A0(0, 1) == Complex(1.0));
  CHECK(sys.A0(1, 2) == Complex(1.0));
  CHECK(sys.A0(2, 0) == Complex(-6.0));
  CHECK(sys.A0(2, 1) == Complex(-11.0));
  CHECK(sys.A0(2, 2) == Complex(-6.0));
  CHECK(sys.A1(0, 1) == Complex(-1.0));
  CHECK(sys.A1.cwiseAbs().sum() == 1.0);  // single coupling entry
}

TEST_CASE("pole placement uses the stabilizing sign by default") {
  const SystemPair sys = build_platoon_from_zeros(1, 2, 3);
  CHECK(sys.A0(2, 0) == Complex(-6.0));  // constant coefficient +6
  const auto ev = eigvals(sys.A0);
  CHECK(std::abs(ev[0] - Complex(-3.0)) < 1e-8);
  CHECK(std::abs(ev[1] - Complex(-2.0)) < 1e-8);
  CHECK(std::abs(ev[2] - Complex(-1.0)) < 1e-8);

  const SystemPair flipped = build_platoon_from_zeros(1, 2, 3, true);
  CHECK(flipped.A0(2, 0) == Complex(6.0));
  CHECK(flipped.label.find("negated-constant") != std::string::npos);
}

TEST_CASE("complex pole pair placement") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  const auto ev = eigvals(sys.A0);
  REQUIRE(ev.size() == 3);
  // Conjugate pairs can swap in a (re, im) sort at roundoff level, so match
  // each expected pole to its nearest computed one.
  for (Complex want : {Complex(-2.0, -1.0), Complex(-2.0, 1.0), Complex(-1.0, 0.0)}) {
    double best = 1e300;
    for (Complex got : ev) best = std::min(best, std::abs(got - want));
    CHECK(best < 1e-8);
  }
}

TEST_CASE("cascade characteristic data") {
  const SystemPair sys = build_cascade({1, 2, 3});
  CHECK(sys.m == 3);
  REQUIRE(sys.phi.den.degree() == 3);
  CHECK(std::abs(sys.phi.num.coeff(0) - 6.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(0) - 6.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(1) - 11.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(2) - 6.0) < 1e-10);
  CHECK(std::abs(sys.phi.den.coeff(3) - 1.0) < 1e-10);
}

TEST_CASE("model dispatch validates name and arity") {
  CHECK(build_model("robot", {}).m == 1);
  CHECK(build_model("platoon", {6, 11, 6}).m == 3);
  CHECK(build_model("cascade", {1, 2}).m == 2);
  CHECK_THROWS_AS((void)build_model("robot", {1.0}), BadModel);
  CHECK_THROWS_AS((void)build_model("platoon", {6, 11}), BadModel);
  CHECK_THROWS_AS((void)build_model("cascade", {}), BadModel);
  CHECK_THROWS_AS((void)build_model("nope", {}), BadModel);
  CHECK_THROWS_AS((void)build_model("cascade", {1.0, 0.0}), BadModel);
}

TEST_CASE("JSON round trip preserves the pair exactly") {
  const SystemPair sys = build_platoon_pair(2, 1, 1);
  FileGuard fg{temp_path("roundtrip")};
  save_system(sys, fg.path);
  const SystemPair back = load_system(fg.path);
  CHECK(back.label == sys.label);
  CHECK(back.m == sys.m);
  CHECK((back.A0 - sys.A0).norm() == 0.0);
  CHECK((back.A1 - sys.A1).norm() == 0.0);
  // phi is re-extracted on load; it must agree at sample points.
  for (Complex lam : {Complex(0.5, 0.0), Complex(1.0, 1.0)})
    CHECK(std::abs(rat_eval(back.phi, lam) - rat_eval(sys.phi, lam)) < 1e-12);
}

TEST_CASE("hand-written file matches the builder") {
  FileGuard fg{temp_path("handwritten")};
  {
    std::ofstream out(fg.path);
    out << R"({
      "schema": 1,
      "label": "custom",
      "m": 3,
      "A0": [[[0,0],[1,0],[0,0]],
             [[0,0],[0,0],[1,0]],
             [[-6,0],[-11,0],[-6,0]]],
      "A1": [[[0,0],[-1,0],[0,0]],
             [[0,0],[0,0],[0,0]],
             [[0,0],[0,0],[0,0]]]
    })";
  }
  const SystemPair sys = load_system(fg.path);
  const SystemPair want = build_platoon(6, 11, 6);
  CHECK(sys.label == "custom");
  CHECK((sys.A0 - want.A0).norm() == 0.0);
  CHECK((sys.A1 - want.A1).norm() == 0.0);
}

TEST_CASE("loader rejects inadmissible files") {
  {
    FileGuard fg{temp_path("zerocoupling")};
    std::ofstream out(fg.path);
    out << R"({"schema":1,"label":"z","m":1,"A0":[[[-1,0]]],"A1":[[[0,0]]]})";
    out.close();
    CHECK_THROWS_AS((void)load_system(fg.path), ZeroA1);
  }
  {
    FileGuard fg{temp_path("malformed")};
    std::ofstream out(fg.path);
    out << "{nope";
    out.close();
    CHECK_THROWS_AS((void)load_system(fg.path), BadModel);
  }
  {
    FileGuard fg{temp_path("badschema")};
    std::ofstream out(fg.path);
    out << R"({"schema":2,"label":"z","m":1,"A0":[[[-1,0]]],"A1":[[[1,0]]]})";
    out.close();
    CHECK_THROWS_AS((void)load_system(fg.path), BadModel);
  }
  CHECK_THROWS_AS((void)load_system("/tmp/spatinv_no_such_file_here.json"), IoError);
}
