#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bvpcont/cli.hpp"
#include "bvpcont/families.hpp"

using namespace bvpcont;
namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "bvpcont_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
  std::ofstream(path) << text;
  return path;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& path) {
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  return line;
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "bvpcont");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

Json result(const fs::path& dir) { return Json::parse(slurp(dir / "result.json")); }

const char* kLinear = R"toml(
[problem]
kind = "nonlocal"
half_length = 1.0
f = "const(2)"
g = "poly(0, 0.5)"
growth = "sublinear"

[numerics]
n_nodes = 201
steps = 32
)toml";

const char* kWashout = R"toml(
[problem]
kind = "chemostat"
tau = 0.5
D = ["const(0.6)"]
s0 = ["const(1)"]
mu = "monod(1, 1)"
)toml";

const char* kConstantChemostat = R"toml(
[problem]
kind = "chemostat"
tau = 0.5
D = ["const(0.25)"]
s0 = ["const(1)"]
mu = "monod(1, 1)"

[numerics]
steps_per_period = 512
)toml";

const char* kSinRange = R"toml(
[problem]
kind = "resonance"
omega = 6.283185307179586
a = 0.5
g = "sin"
g_class = "periodic"
periods = [6.283185307179586]
p0 = ["const(0)"]

[numerics]
n_nodes = 201
steps = 32
)toml";

}  // namespace

TEST(ParseCall, NamesAndArguments) {
  const FamilyCall c = parse_call("monod(1, 2.5)");
  EXPECT_EQ(c.name, "monod");
  EXPECT_EQ(c.args, (std::vector<double>{1.0, 2.5}));
  const FamilyCall bare = parse_call("  sin ");
  EXPECT_EQ(bare.name, "sin");
  EXPECT_TRUE(bare.args.empty());
  EXPECT_EQ(parse_call("poly(-1e-2)").args, std::vector<double>{-0.01});
}

TEST(ParseCall, Malformed) {
  for (const char* bad : {"", "sin(", "poly(1,,2)", "poly(a)", "(1)", "cos(1) x"}) {
    EXPECT_THROW(parse_call(bad), ConfigError) << bad;
  }
}

TEST(ScalarFamily, Values) {
  EXPECT_EQ(scalar_family("const(3)")(7.0), 3.0);
  EXPECT_DOUBLE_EQ(scalar_family("poly(1, 2, 3)")(2.0), 17.0);
  EXPECT_DOUBLE_EQ(scalar_family("sin")(0.5), std::sin(0.5));
  EXPECT_DOUBLE_EQ(scalar_family("sin(2)")(0.5), 2 * std::sin(0.5));
  EXPECT_DOUBLE_EQ(scalar_family("cos(0.5)")(1.0), 0.5 * std::cos(1.0));
  EXPECT_DOUBLE_EQ(scalar_family("atan_ll(2)")(2.0), 0.5);
  EXPECT_DOUBLE_EQ(scalar_family("cubic_root_shift")(8.0), 8.0 + std::sin(2.0));
  EXPECT_DOUBLE_EQ(scalar_family("monod(1, 1)")(1.0), 0.5);
}

TEST(ScalarFamily, Errors) {
  for (const char* bad : {"nope", "sin(1, 2)", "monod(1)", "atan_ll(-1)", "cubic_root_shift(1)"}) {
    EXPECT_THROW(scalar_family(bad), ConfigError) << bad;
  }
}

TEST(Tabulated, InterpolatesMonotonically) {
  const fs::path dir = scratch("tabulated");
  write_file(dir / "mu.csv", "s,mu\n0,0\n1,0.5\n2,0.6\n4,0.61\n");
  const auto f = scalar_family("tabulated(mu.csv)", dir);
  EXPECT_DOUBLE_EQ(f(0.0), 0.0);
  EXPECT_DOUBLE_EQ(f(1.0), 0.5);
  EXPECT_DOUBLE_EQ(f(4.0), 0.61);
  double prev = -1.0;
  for (int i = 0; i <= 400; ++i) {
    const double v = f(4.0 * i / 400);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 0.61 + 1e-15);
    prev = v;
  }
  // Linear extension past the last knot keeps the end slope.
  EXPECT_GT(f(5.0), 0.61);
  EXPECT_NEAR(f(5.0) - f(4.5), f(4.5) - f(4.0), 1e-12);
}

TEST(Tabulated, ReproducesLinearData) {
  const auto f = tabulated_function({0, 1, 2, 3}, {1, 3, 5, 7});
  for (double x : {0.25, 1.5, 2.9}) EXPECT_NEAR(f(x), 1 + 2 * x, 1e-12);
}

TEST(Tabulated, Errors) {
  EXPECT_THROW(tabulated_function({0, 1, 1}, {0, 1, 2}), ConfigError);
  EXPECT_THROW(tabulated_function({0, 1}, {0}), ConfigError);
  const fs::path dir = scratch("tabulated_errors");
  EXPECT_THROW(load_tabulated(dir / "missing.csv"), IoError);
  write_file(dir / "bad.csv", "0,0\n1,x\n");
  EXPECT_THROW(load_tabulated(dir / "bad.csv"), ConfigError);
}

TEST(PlanarFamily, LinearAndPerComponent) {
  std::array<double, 2> u{1.0, 2.0}, out{};
  planar_family({"linear(1, 2, 3, 4)"})(u, out);
  EXPECT_EQ(out, (std::array<double, 2>{5.0, 11.0}));
  planar_family({"sin", "poly(0, 3)"})(u, out);
  EXPECT_DOUBLE_EQ(out[0], std::sin(1.0));
  EXPECT_DOUBLE_EQ(out[1], 6.0);
  EXPECT_THROW(planar_family({"sin"}), ConfigError);
}

TEST(TimeSignal, ValuesAndSlopes) {
  const TimeSignal sig = parse_time_signal({"const(0.5)", "cos(2, 3)", "sin(1, 2)"});
  const double t = 0.7;
  EXPECT_DOUBLE_EQ(sig.value(t), 0.5 + 2 * std::cos(3 * t) + std::sin(2 * t));
  EXPECT_DOUBLE_EQ(sig.derivative(t), -6 * std::sin(3 * t) + 2 * std::cos(2 * t));
  const PeriodicSignal p = sample_signal(sig, 2 * std::numbers::pi, 64);
  EXPECT_EQ(p.size(), 64u);
  for (std::size_t k = 0; k < p.size(); ++k) EXPECT_DOUBLE_EQ(p.sample_at(k), sig.value(p.node(k)));
  // Cubic Hermite with exact slopes: error below h^4 max|f''''| / 384.
  const double h = p.step();
  EXPECT_NEAR(p.eval(1.234), sig.value(1.234), std::pow(h, 4) * (2 * 81 + 16) / 384);
  EXPECT_THROW(parse_time_signal({"tan(1, 1)"}), ConfigError);
  EXPECT_THROW(parse_time_signal({"cos(1)"}), ConfigError);
}

TEST(Run, NonlocalLinearClosedForm) {
  const fs::path dir = scratch("nonlocal");
  const fs::path cfg = write_file(dir / "run.toml", kLinear);
  ASSERT_EQ(run_cli({"solve", "nonlocal", "--config", cfg.string(), "--out", dir.string()}), cli::kOk);
  const Json r = result(dir);
  EXPECT_EQ(r["status"], "ok");
  ASSERT_EQ(r["solutions"].size(), 1u);
  EXPECT_NEAR(r["solutions"][0]["c"].get<double>(), -1.0, 1e-6);
  EXPECT_LE(r["solutions"][0]["equation_residual"].get<double>(), 1e-6);
  EXPECT_LE(r["solutions"][0]["boundary_residual"].get<double>(), 1e-8);
  EXPECT_EQ(first_line(dir / "branch.csv"), "c,phi,residual");
}

TEST(Run, ChemostatWashoutIsCertified) {
  const fs::path dir = scratch("washout");
  const fs::path cfg = write_file(dir / "run.toml", kWashout);
  ASSERT_EQ(run_cli({"solve", "chemostat", "--config", cfg.string(), "--out", dir.string()}),
            cli::kCertifiedNoSolution);
  const Json r = result(dir);
  EXPECT_EQ(r["status"], "no_solution");
  EXPECT_NEAR(r["certificate"]["margin"].get<double>(), -0.1, 1e-9);
}

TEST(Run, ChemostatConstantOrbit) {
  const fs::path dir = scratch("chemostat");
  const fs::path cfg = write_file(dir / "run.toml", kConstantChemostat);
  ASSERT_EQ(run_cli({"solve", "chemostat", "--config", cfg.string(), "--out", dir.string()}), cli::kOk);
  const Json r = result(dir);
  EXPECT_NEAR(r["x0"].get<double>(), 2.0 / 3, 1e-5);
  EXPECT_TRUE(r["verified"].get<bool>());
  EXPECT_LE(r["poincare_residual"].get<double>(), 1e-7);
  EXPECT_EQ(first_line(dir / "trajectory.csv"), "t,s,x");
}

TEST(Run, PendulumRangeWithoutForcing) {
  const fs::path dir = scratch("range");
  const fs::path cfg = write_file(dir / "run.toml", kSinRange);
  ASSERT_EQ(run_cli({"range", "resonance", "--config", cfg.string(), "--out", dir.string()}), cli::kOk);
  const Json r = result(dir);
  EXPECT_NEAR(r["range"]["lo"].get<double>(), -1.0, 1e-3);
  EXPECT_NEAR(r["range"]["hi"].get<double>(), 1.0, 1e-3);
  EXPECT_TRUE(r["range"]["within_g_bounds"].get<bool>());
  EXPECT_EQ(first_line(dir / "range.csv"), "c,I_value");
}

TEST(Run, ChecksAndDemo) {
  const fs::path dir = scratch("checks");
  const fs::path cfg = write_file(dir / "run.toml", kConstantChemostat);
  ASSERT_EQ(run_cli({"check", "condition", "--config", cfg.string(), "--out", dir.string()}), cli::kOk);
  EXPECT_NEAR(result(dir)["existence_condition"]["margin"].get<double>(), 0.25, 1e-9);
  ASSERT_EQ(run_cli({"demo", "poincare-miranda", "--out", dir.string()}), cli::kOk);
  EXPECT_FALSE(result(dir)["roots"].empty());
}

TEST(Run, ConfigErrorsExit64) {
  const fs::path dir = scratch("config_errors");
  const fs::path good = write_file(dir / "good.toml", kLinear);
  const fs::path syntax = write_file(dir / "syntax.toml", "[problem\nkind = 1\n");
  const fs::path family = write_file(dir / "family.toml", "[problem]\nkind = \"nonlocal\"\nf = \"bogus(1)\"\ng = \"sin\"\n");
  const fs::path tol = write_file(dir / "tol.toml", std::string(kLinear) + "tol = -1.0\n");
  const std::vector<std::vector<std::string>> cases{
      {"solve", "nonlocal", "--config", syntax.string()},
      {"solve", "nonlocal", "--config", family.string()},
      {"solve", "nonlocal", "--config", tol.string()},
      {"solve", "chemostat", "--config", good.string()},
      {"solve", "elliptic", "--config", good.string()},
      {"solve", "nonlocal", "--config", good.string(), "--tol", "-1"},
      {"solve", "nonlocal"},
      {"frobnicate"},
  };
  for (auto args : cases) {
    args.push_back("--out");
    args.push_back(dir.string());
    EXPECT_EQ(run_cli(args), cli::kConfigError) << args[0] << " " << args[1] << " " << args[2];
  }
}

TEST(Run, IoErrorsExit74) {
  const fs::path dir = scratch("io_errors");
  EXPECT_EQ(run_cli({"solve", "nonlocal", "--config", (dir / "absent.toml").string(), "--out", dir.string()}),
            cli::kIoError);
  const fs::path cfg = write_file(dir / "run.toml", kLinear);
  const fs::path blocker = write_file(dir / "blocker", "not a directory");
  EXPECT_EQ(run_cli({"solve", "nonlocal", "--config", cfg.string(), "--out", (blocker / "out").string()}),
            cli::kIoError);
}

TEST(Run, NumericalFailureExit1) {
  const fs::path dir = scratch("failure");
  const fs::path cfg = write_file(dir / "run.toml", R"toml(
[problem]
kind = "nonlocal"
f = "const(1)"
g = "poly(0.1, 1)"
growth = "superlinear"
)toml");
  EXPECT_EQ(run_cli({"solve", "nonlocal", "--config", cfg.string(), "--out", dir.string()}), cli::kNumericalFailure);
  const Json r = result(dir);
  EXPECT_TRUE(r.contains("error"));
}

TEST(Run, OutputsAreDeterministic) {
  const fs::path a = scratch("determinism_a");
  const fs::path b = scratch("determinism_b");
  const fs::path cfg = write_file(a / "run.toml", kSinRange);
  ASSERT_EQ(run_cli({"range", "resonance", "--config", cfg.string(), "--out", a.string(), "--jobs", "2"}), cli::kOk);
  ASSERT_EQ(run_cli({"range", "resonance", "--config", cfg.string(), "--out", b.string(), "--jobs", "2"}), cli::kOk);
  EXPECT_EQ(slurp(a / "result.json"), slurp(b / "result.json"));
  EXPECT_EQ(slurp(a / "range.csv"), slurp(b / "range.csv"));
}
