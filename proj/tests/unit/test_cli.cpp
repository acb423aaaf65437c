#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "cli.hpp"

namespace fs = std::filesystem;
using condensate::cli::Hooks;
using condensate::cli::run;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    dir = fs::temp_directory_path() / ("condensate_cli_" + std::to_string(std::rand()) + "_" +
                                       std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Scratch() { fs::remove_all(dir); }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args, const Hooks& hooks = {}) {
  std::ostringstream out, err;
  const int code = run(args, out, err, hooks);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

}  // namespace

TEST_CASE("profile writes the kernel column for a point functional") {
  Scratch s;
  const auto out = s.path("p.csv");
  const auto r = invoke({"profile", "--kernel", "sqexp:1:0.2", "--functional", "point:0.5", "--out", out});
  REQUIRE(r.code == 0);
  std::istringstream lines(slurp(out));
  std::string line;
  std::getline(lines, line);
  CHECK(line == "x,profile_value");
  std::size_t rows = 0;
  while (std::getline(lines, line)) {
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma));
    const double v = std::stod(line.substr(comma + 1));
    // The grid point nearest 0.5 is 0.49609375 (ties go low at M = 128).
    const double d = (x - 0.49609375) / 0.2;
    CHECK(v == doctest::Approx(std::exp(-0.5 * d * d)).epsilon(1e-12));
    ++rows;
  }
  CHECK(rows == 128);
}

TEST_CASE("profile adds an analytic column for smooth derivative functionals") {
  Scratch s;
  const auto out = s.path("d.csv");
  REQUIRE(invoke({"profile", "--functional", "dpoint:0.5:1:4", "--out", out}).code == 0);
  CHECK(slurp(out).starts_with("x,profile_value,analytic_value\n"));
  REQUIRE(invoke({"profile", "--kernel", "exp:1:0.5", "--functional", "dpoint:0.5:1:4", "--out", out}).code == 0);
  CHECK(slurp(out).starts_with("x,profile_value\n"));
}

TEST_CASE("exit codes for configuration and I/O failures") {
  Scratch s;
  const auto unknown = invoke({"profile", "--kernel", "matern:1:0.2", "--out", s.path("a.csv")});
  CHECK(unknown.code == 2);
  CHECK(unknown.err.find("Usage") != std::string::npos);

  CHECK(invoke({"profile", "--out", s.path("missing/dir/a.csv")}).code == 1);
  CHECK(invoke({"condition", "--u", "-3", "--out", s.path("c.csv")}).code == 2);
  CHECK(invoke({"condition", "--scalar", "real", "--mode", "fixed-rho:1:1.57", "--out", s.path("c.csv")}).code ==
        2);
  CHECK(invoke({"condition", "--mode", "fixed-rho:-1", "--out", s.path("c.csv")}).code == 2);
  CHECK(invoke({"sweep", "--u-list", "100,10", "--out", s.path("x.csv")}).code == 2);
  CHECK(invoke({"sweep", "--grid", "abc"}).code == 2);
  CHECK(invoke({"verify", "prop9"}).code == 2);
  CHECK(invoke({}).code == 2);
  CHECK(invoke({"--help"}).code == 0);
}

TEST_CASE("condition is byte-identical across repeat runs and writes its sidecar") {
  Scratch s;
  const std::vector<std::string> base = {"condition", "--u", "1000", "--mode", "fixed-rho:1", "--seed", "7"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out", s.path("a.csv")});
  b.insert(b.end(), {"--out", s.path("b.csv")});
  REQUIRE(invoke(a).code == 0);
  REQUIRE(invoke(b).code == 0);
  CHECK(slurp(s.path("a.csv")) == slurp(s.path("b.csv")));
  CHECK(slurp(s.path("a.json")) == slurp(s.path("b.json")));

  const auto doc = load_json(s.path("a.json"));
  CHECK(doc["u"] == 1000.0);
  CHECK(doc["rho"] == 1.0);
  CHECK(doc["theta"] == 0.0);
  const double t_re = doc["t_u"]["re"];
  CHECK(t_re == doctest::Approx(std::sqrt(1.0 + 1e6)).epsilon(1e-12));
  CHECK(doc["sup_dist"].get<double>() <= doc["bound_rhs"].get<double>());
  CHECK(doc["config"]["grid"] == 128);
  CHECK(doc["config"]["seed"] == 7);
  CHECK(slurp(s.path("a.csv")).starts_with("x,re,im\n"));
}

TEST_CASE("seed falls back to the environment") {
  Scratch s;
  ::setenv("CONDENSATE_SEED", "41", 1);
  REQUIRE(invoke({"condition", "--out", s.path("e.csv")}).code == 0);
  ::unsetenv("CONDENSATE_SEED");
  CHECK(load_json(s.path("e.json"))["config"]["seed"] == 41);
  REQUIRE(invoke({"condition", "--seed", "41", "--out", s.path("f.csv")}).code == 0);
  CHECK(slurp(s.path("e.csv")) == slurp(s.path("f.csv")));
}

TEST_CASE("sweep with a single threshold reports a null slope") {
  Scratch s;
  const auto r = invoke({"sweep", "--u-list", "100", "--mc", "20", "--out", s.path("one.csv")});
  REQUIRE(r.code == 0);
  const auto doc = load_json(s.path("one.json"));
  CHECK(doc["slope"].is_null());
  CHECK(doc["per_u"].size() == 1);
  CHECK(doc["config"]["u_list"].size() == 1);
}

TEST_CASE("sweep output does not depend on the thread count") {
  Scratch s;
  const std::vector<std::string> base = {"sweep", "--grid", "64", "--mc", "40", "--seed", "5"};
  auto a = base, b = base;
  a.insert(a.end(), {"--threads", "1", "--out", s.path("a.csv")});
  b.insert(b.end(), {"--threads", "3", "--out", s.path("b.csv")});
  REQUIRE(invoke(a).code == 0);
  REQUIRE(invoke(b).code == 0);
  CHECK(slurp(s.path("a.csv")) == slurp(s.path("b.csv")));
  CHECK(slurp(s.path("a.json")) == slurp(s.path("b.json")));
  CHECK(load_json(s.path("a.json"))["config"].count("threads") == 0);
}

TEST_CASE("an injected bound violation makes sweep exit 3") {
  Scratch s;
  Hooks hooks;
  hooks.record_hook = [](condensate::DistanceRecord& rec) {
    if (rec.sample_index == 3) rec.sup_dist = rec.bound_rhs * 2.0 + 1.0;
  };
  const auto r = invoke({"sweep", "--grid", "64", "--mc", "10", "--u-list", "10,100", "--out", s.path("v.csv")}, hooks);
  CHECK(r.code == 3);
  const auto doc = load_json(s.path("v.json"));
  CHECK(doc["violations_est0"] == 2);
}

TEST_CASE("config file values mirror flags and yield to the command line") {
  Scratch s;
  const auto cfg = s.path("run.json");
  std::ofstream(cfg) << R"({"grid": 64, "u-list": [10, 100], "mc": 15, "seed": 9})";
  REQUIRE(invoke({"sweep", "--config", cfg, "--seed", "11", "--out", s.path("c.csv")}).code == 0);
  const auto doc = load_json(s.path("c.json"));
  CHECK(doc["config"]["grid"] == 64);
  CHECK(doc["config"]["mc"] == 15);
  CHECK(doc["config"]["seed"] == 11);
  CHECK(doc["n_records"] == 30);

  CHECK(invoke({"sweep", "--config", s.path("absent.json")}).code == 1);
  std::ofstream(s.path("bad.json")) << "{not json";
  CHECK(invoke({"sweep", "--config", s.path("bad.json")}).code == 2);
}

TEST_CASE("verify prop1 passes on the reference configuration") {
  Scratch s;
  const auto out = s.path("v1.json");
  const auto r = invoke({"verify", "prop1", "--mc", "20000", "--kernel", "sqexp:1:0.2", "--functional",
                         "point:0.5", "--out", out});
  CHECK(r.code == 0);
  const auto doc = load_json(out);
  CHECK(doc["pass"] == true);
  CHECK(std::abs(doc["var_hat"].get<double>() - 1.0) <= 0.05);
  CHECK(invoke({"verify", "prop1", "--mc", "10", "--out", out}).code == 2);
}

TEST_CASE("verify prop3 with a rough kernel passes with the warning flag") {
  Scratch s;
  const auto out = s.path("v3.json");
  const auto r = invoke({"verify", "prop3", "--functional", "dpoint:0.5:1:4", "--kernel", "exp:1:0.5", "--out", out});
  CHECK(r.code == 0);
  CHECK(r.err.find("warning") != std::string::npos);
  const auto doc = load_json(out);
  CHECK(doc["pass"] == true);
  CHECK(doc["smoothness_warning"] == true);
  CHECK(invoke({"verify", "prop3", "--functional", "integral:uniform", "--out", out}).code == 2);
}

TEST_CASE("verify bounds reports zero violations") {
  Scratch s;
  const auto out = s.path("vb.json");
  CHECK(invoke({"verify", "bounds", "--u", "1000", "--mc", "200", "--out", out}).code == 0);
  const auto doc = load_json(out);
  CHECK(doc["pass"] == true);
  CHECK(doc["violations_est0"] == 0);
  CHECK(doc["violations_est12"] == 0);
  CHECK(doc["n_records"] == 200);
}
