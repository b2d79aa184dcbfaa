#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include <json.hpp>

#include "snse/commands.hpp"
#include "snse/config.hpp"
#include "snse/errors.hpp"

using namespace snse;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation cli(std::vector<std::string> args) {
  args.insert(args.begin(), "snse");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "snse-test-cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.json";
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

double summary_value(const std::string& text, const std::string& key) {
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.rfind(key + " = ", 0) == 0) return std::stod(line.substr(key.size() + 3));
  }
  FAIL("missing summary key " << key);
  return 0.0;
}

// Small deterministic temporal study on the coarsest disk mesh.
const char* kDeterministicTime = R"({
  "mesh": {"domain": "disk", "base": 8, "level": 0},
  "time": {"T": 0.25, "levels": [16, 32, 64], "reference_J": 512},
  "noise": {"c_scale": 0.0},
  "study": {"seeds": "1..1"}
})";

const char* kStochasticTime = R"({
  "mesh": {"domain": "disk", "base": 8, "level": 0},
  "time": {"T": 0.1, "levels": [4, 8, 16], "reference_J": 64},
  "noise": {"c_scale": 1.0},
  "study": {"seeds": "1..6"}
})";

}  // namespace

TEST_CASE("config round trip") {
  RunConfig cfg;
  cfg.domain = Domain::square;
  cfg.mesh_base = 4;
  cfg.time_levels = {8, 16, 32};
  cfg.reference_J = 256;
  cfg.family = NoiseFamily::divergence_free;
  cfg.solver = NonlinearSolver::picard;
  cfg.jacobian_reuse = true;
  cfg.seed_first = 3;
  cfg.seed_last = 9;
  cfg.r_h = 2.5;
  cfg.pairs = {{0, 8}, {1, 16}, {2, 32}};
  cfg.exceedance_reference = {3, 64};
  cfg.epsilon = {0.5, 1.5};
  const RunConfig back = parse_config(dump_config(cfg));
  CHECK(back == cfg);
  CHECK(parse_config(dump_config(RunConfig{})) == RunConfig{});
  CHECK(parse_config("{}") == RunConfig{});
  CHECK_NOTHROW(validate_config(cfg));
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS((void)parse_config("{"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("[]"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(R"({"mesh": {"domian": "disk"}})"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(R"({"meshes": {}})"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(R"({"mesh": {"domain": "torus"}})"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(R"({"time": {"J": 1.5}})"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(R"({"time": {"T": "long"}})"), ConfigError);
  CHECK_THROWS_AS((void)parse_config(R"({"study": {"seeds": "9..3"}})"), ConfigError);
  CHECK_THROWS_AS((void)load_config("/nonexistent/snse.json"), ConfigError);

  auto invalid = [](auto mutate) {
    RunConfig c;
    mutate(c);
    CHECK_THROWS_AS(validate_config(c), ConfigError);
  };
  invalid([](RunConfig& c) { c.T = -1.0; });
  invalid([](RunConfig& c) { c.decay = 0.5; });
  invalid([](RunConfig& c) { c.mesh_base = 5; });
  invalid([](RunConfig& c) { c.time_levels = {3}; });
  invalid([](RunConfig& c) { c.space_levels = {0, 3}; });
  invalid([](RunConfig& c) { c.epsilon = {1.0, 0.5}; });
  invalid([](RunConfig& c) { c.workers = 0; });
  invalid([](RunConfig& c) { c.c_scale = -0.1; });
}

TEST_CASE("seed ranges") {
  CHECK(parse_seed_range("7") == std::pair<std::uint64_t, std::uint64_t>(7, 7));
  CHECK(parse_seed_range("3..12") == std::pair<std::uint64_t, std::uint64_t>(3, 12));
  CHECK_THROWS_AS((void)parse_seed_range("12..3"), ConfigError);
  CHECK_THROWS_AS((void)parse_seed_range("a..3"), ConfigError);
  CHECK_THROWS_AS((void)parse_seed_range("-1"), ConfigError);
  CHECK_THROWS_AS((void)parse_seed_range(""), ConfigError);
  RunConfig c;
  c.seed_first = 4;
  c.seed_last = 6;
  CHECK(seeds(c) == std::vector<std::uint64_t>{4, 5, 6});
}

TEST_CASE("usage errors exit with code 2") {
  const Invocation none = cli({});
  CHECK(none.code == kExitConfig);
  const Invocation missing = cli({"run", "--config", "/nonexistent/snse.json"});
  CHECK(missing.code == kExitConfig);
  CHECK(missing.err.find("configuration error") != std::string::npos);
  CHECK(cli({"frobnicate"}).code == kExitConfig);
  CHECK(cli({"run", "--workers", "0"}).code == kExitConfig);
  CHECK(cli({"run", "--seeds", "5..2"}).code == kExitConfig);
  CHECK(cli({"verify", "--inject-fault", "gravity"}).code == kExitConfig);
  CHECK(cli({"--help"}).code == kExitOk);
}

TEST_CASE("verify passes and writes a report") {
  const fs::path dir = scratch("verify");
  const Invocation r = cli({"verify", "--out", dir.string()});
  CHECK(r.code == kExitOk);
  const auto report = nlohmann::json::parse(slurp(dir / "verify.json"));
  CHECK(report.at("pass").get<bool>());
  std::vector<std::string> names;
  for (const auto& c : report.at("checks")) {
    names.push_back(c.at("name").get<std::string>());
    CHECK(c.at("pass").get<bool>());
  }
  for (const char* expected : {"skew_symmetry", "projection_idempotence", "projection_divergence", "stokes_symmetry",
                               "manufactured_stokes_order", "convection_jacobian", "noise_hypothesis"}) {
    CHECK(std::find(names.begin(), names.end(), expected) != names.end());
    CHECK(r.out.find(expected) != std::string::npos);
  }
}

TEST_CASE("an injected convection fault fails the skew check") {
  const fs::path dir = scratch("fault");
  const Invocation r = cli({"verify", "--inject-fault", "convection-sign", "--out", dir.string()});
  CHECK(r.code == kExitNumerical);
  CHECK(r.err.find("failed check: skew_symmetry") != std::string::npos);
  const auto report = nlohmann::json::parse(slurp(dir / "verify.json"));
  CHECK(!report.at("pass").get<bool>());
}

TEST_CASE("unwritable output exits with code 4") {
  const Invocation r = cli({"run", "--out", "/dev/null/snse"});
  CHECK(r.code == kExitIo);
  CHECK(r.err.find("i/o error") != std::string::npos);
}

TEST_CASE("run writes norms and a trajectory") {
  const fs::path dir = scratch("run");
  const std::string config = write_config(dir, R"({
    "mesh": {"level": 0}, "time": {"T": 0.05, "J": 5}, "study": {"seeds": "3..3"}})");
  const Invocation r = cli({"run", "--config", config, "--out", (dir / "out").string()});
  REQUIRE(r.code == kExitOk);
  const std::string norms = slurp(dir / "out" / "run" / "norms.tsv");
  CHECK(norms.rfind("j\tt\tl2\th1\tnewton_iterations\tresidual\tdivergence\n", 0) == 0);
  CHECK(std::count(norms.begin(), norms.end(), '\n') == 7);
  CHECK(fs::file_size(dir / "out" / "run" / "trajectory.snse") > 0);
  CHECK(parse_config(slurp(dir / "out" / "run" / "config.json")).seed_first == 3);
}

TEST_CASE("deterministic temporal study through the CLI is first order") {
  const fs::path dir = scratch("det-time");
  const std::string config = write_config(dir, kDeterministicTime);
  const Invocation r = cli({"converge-time", "--config", config, "--out", (dir / "out").string()});
  REQUIRE(r.code == kExitOk);
  const double slope = summary_value(r.out, "slope");
  CHECK(slope >= 0.9);
  CHECK(slope <= 1.1);
  for (const char* f : {"samples.tsv", "levels.tsv", "summary.txt", "error.svg", "config.json"}) {
    CHECK(fs::exists(dir / "out" / "converge-time" / f));
  }
}

TEST_CASE("study tables are byte-identical across runs and worker counts") {
  const fs::path dir = scratch("repro");
  const std::string config = write_config(dir, kStochasticTime);
  REQUIRE(cli({"converge-time", "--config", config, "--out", (dir / "a").string(), "--workers", "1"}).code == kExitOk);
  REQUIRE(cli({"converge-time", "--config", config, "--out", (dir / "b").string(), "--workers", "1"}).code == kExitOk);
  REQUIRE(cli({"converge-time", "--config", config, "--out", (dir / "c").string(), "--workers", "4"}).code == kExitOk);
  for (const char* f : {"samples.tsv", "levels.tsv", "summary.txt"}) {
    const std::string a = slurp(dir / "a" / "converge-time" / f);
    CHECK(!a.empty());
    CHECK(a == slurp(dir / "b" / "converge-time" / f));
    CHECK(a == slurp(dir / "c" / "converge-time" / f));
  }
}

TEST_CASE("failed samples exit with code 3 after writing the tables") {
  const fs::path dir = scratch("failures");
  const std::string config = write_config(dir, R"({
    "mesh": {"level": 0},
    "time": {"T": 0.5, "levels": [2, 4, 8], "reference_J": 32},
    "initial": {"amplitude": 20.0},
    "solver": {"newton_tol": 1e-15, "max_iters": 1},
    "study": {"seeds": "1..2"}})");
  const Invocation r = cli({"converge-time", "--config", config, "--out", (dir / "out").string()});
  CHECK(r.code == kExitNumerical);
  CHECK(r.err.find("failed") != std::string::npos);
  CHECK(fs::exists(dir / "out" / "converge-time" / "samples.tsv"));
  CHECK(fs::exists(dir / "out" / "converge-time" / "levels.tsv"));
}

TEST_CASE("exceedance command") {
  const fs::path dir = scratch("exceedance");
  const std::string config = write_config(dir, R"({
    "time": {"T": 0.1},
    "study": {"seeds": "1..4", "pairs": [{"level": 0, "J": 4}, {"level": 1, "J": 8}],
              "reference": {"level": 2, "J": 16}, "epsilon": [0.001, 0.1, 10.0]},
    "solver": {"jacobian_reuse": true}})");
  const Invocation r = cli({"exceedance", "--config", config, "--out", (dir / "out").string(), "--workers", "2"});
  REQUIRE(r.code == kExitOk);
  const std::string table = slurp(dir / "out" / "exceedance" / "exceedance.tsv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 1 + 2 * 3);
  CHECK(fs::exists(dir / "out" / "exceedance" / "exceedance.svg"));
  CHECK(fs::exists(dir / "out" / "exceedance" / "samples.tsv"));
}

TEST_CASE("the installed executable maps exit codes") {
  const fs::path dir = scratch("binary");
  const std::string bin = SNSE_CLI_PATH;
  const std::string ok = bin + " verify --out " + (dir / "ok").string() + " > " + (dir / "log").string() + " 2>&1";
  CHECK(WEXITSTATUS(std::system(ok.c_str())) == kExitOk);
  const std::string bad = bin + " run --config /nonexistent.json > " + (dir / "log2").string() + " 2>&1";
  CHECK(WEXITSTATUS(std::system(bad.c_str())) == kExitConfig);
  CHECK(slurp(dir / "log2").find("configuration error") != std::string::npos);
}
