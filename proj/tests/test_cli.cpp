#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

fs::path scratch() {
  static fs::path root = [] {
    std::random_device rd;
    fs::path p = fs::temp_directory_path() / ("inheritlab-cli-" + std::to_string(rd()));
    fs::create_directories(p);
    return p;
  }();
  return root;
}

int run(const std::string& args) {
  std::string cmd = std::string(INHERITLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(rc));
  return WEXITSTATUS(rc);
}

json load(const fs::path& p) {
  std::ifstream f(p);
  REQUIRE(f.good());
  return json::parse(f);
}

std::string out(const std::string& name) { return "--out " + (scratch() / name).string(); }

}  // namespace

TEST_CASE("usage errors exit 2") {
  CHECK(run("") == 2);
  CHECK(run("nosuch") == 2);
  CHECK(run("verify-solution --name nosuch " + out("u1")) == 2);
  CHECK(run("verify-solution " + out("u2")) == 2);
  CHECK(run("carleman --check bogus " + out("u3")) == 2);
  CHECK(run("carleman --spacing sideways " + out("u4")) == 2);
  CHECK(run("frequency-scan --field zero " + out("u5")) == 2);
  CHECK(run("verify-solution --name mc --config /nonexistent/config.txt " + out("u6")) == 2);
  CHECK(run("--version") == 0);
}

TEST_CASE("verify-solution writes report, manifest and config") {
  CHECK(run("verify-solution --name mc --b 0.3 --points 200 --seed 7 " + out("mc")) == 0);
  fs::path d = scratch() / "mc";
  json rep = load(d / "report.json");
  CHECK(rep["pass"] == true);
  CHECK(rep["maxwell"]["closure"]["max"].get<double>() <= 1e-9);
  CHECK(rep["einstein"]["kappa"].get<double>() == doctest::Approx(1.0).epsilon(1e-8));
  json man = load(d / "manifest.json");
  CHECK(man["command"] == "verify-solution");
  CHECK(man["seed"] == 7);
  CHECK(man.contains("version"));
  CHECK(man["config"]["name"] == "mc");
  CHECK(fs::exists(d / "config.txt"));

  CHECK(run("verify-solution --name ppwave --f sin " + out("pp")) == 0);
  CHECK(run("verify-solution --name minkowski " + out("mk")) == 0);
}

TEST_CASE("tolerance failure exits 1") {
  CHECK(run("verify-solution --name mc --b 0.3 --points 50 --einstein-tol 1e-300 " + out("tf")) == 1);
  CHECK(load(scratch() / "tf" / "report.json")["pass"] == false);
}

TEST_CASE("frequency scan outputs") {
  CHECK(run("frequency-scan --synth power:exp=4 " + out("syn")) == 0);
  fs::path d = scratch() / "syn";
  CHECK(load(d / "report.json")["classification"]["verdict"] == "in_L2_consistent");
  CHECK(fs::exists(d / "profile.csv"));
  CHECK(fs::exists(d / "profile.svg"));
}

TEST_CASE("config replay reproduces the report") {
  CHECK(run("carleman --check squared-identity --grid 1024 --vectors 10 --seed 3 " + out("c1")) == 0);
  fs::path a = scratch() / "c1";
  CHECK(run("carleman --config " + (a / "config.txt").string() + " --seed 3 " + out("c2")) == 0);
  fs::path b = scratch() / "c2";
  CHECK(load(a / "report.json") == load(b / "report.json"));
  json ma = load(a / "manifest.json"), mb = load(b / "manifest.json");
  CHECK(ma["config"] == mb["config"]);

  // Command-line flags override the file.
  CHECK(run("carleman --config " + (a / "config.txt").string() + " --vectors 4 " + out("c3")) == 0);
  CHECK(load(scratch() / "c3" / "report.json")["vectors"] == 4);
}

TEST_CASE("carleman positive control") {
  CHECK(run("carleman --check probe --lambda -1 --bound-state " + out("bs")) == 0);
  json rep = load(scratch() / "bs" / "report.json");
  CHECK(rep["detected"] == true);
  CHECK(rep["relative_to_reference"].get<double>() < 1e-3);
  // Flags survive the config echo.
  CHECK(run("carleman --config " + (scratch() / "bs" / "config.txt").string() + " " + out("bs2")) == 0);
  CHECK(load(scratch() / "bs2" / "report.json") == rep);
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
