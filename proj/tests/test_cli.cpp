#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "hlab/cli.hpp"
#include "hlab/io.hpp"

using namespace hlab;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hlab_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  const fs::path p = dir / "config.toml";
  std::ofstream(p) << text;
  return p;
}

const char* kSmall = R"(
[profile]
kind = "gaussian"
dim = 2
T = 0.5

[potential]
atom_weight = 0.5

[grid]
n = 16
L = 12.0

[ensemble]
N = 8
seed = 3

[evolution]
dt = 0.05
steps = 4
)";

int run(std::vector<std::string> args, std::string* err_text = nullptr) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  if (err_text) *err_text = err.str();
  return code;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("TOML subset") {
    const json j = parse_toml(R"(
top = 1
[a.b]
x = 2.5   # comment
s = "h#i"
flag = true
list = [1, 2.0, -3e-1]
big = inf
)");
    CHECK(j["top"] == 1);
    CHECK(j["a"]["b"]["x"].get<double>() == 2.5);
    CHECK(j["a"]["b"]["s"] == "h#i");
    CHECK(j["a"]["b"]["flag"] == true);
    CHECK(j["a"]["b"]["list"].size() == 3);
    CHECK(std::isinf(j["a"]["b"]["big"].get<double>()));
    CHECK_THROWS_AS(parse_toml("x = [1, 2"), Error);
    CHECK_THROWS_AS(parse_toml("[a]\nx = 1\nx = 2"), Error);
  }

  TEST_CASE("config merging and overrides") {
    json cfg = default_config();
    apply_override(cfg, "grid.n=64");
    CHECK(cfg["grid"]["n"] == 64);
    apply_override(cfg, "profile.kind=\"bose\"");
    CHECK(cfg["profile"]["kind"] == "bose");
    CHECK_THROWS_AS(apply_override(cfg, "grid.nope=1"), Error);
    CHECK_THROWS_AS(merge_config(default_config(), parse_toml("[grid]\nbogus = 1")), Error);
    CHECK_THROWS_AS(merge_config(default_config(), parse_toml("[grid]\nn = \"big\"")), Error);
  }

  TEST_CASE("config errors exit with code 4") {
    const fs::path dir = scratch("errors");
    std::string err;
    const std::string missing = (dir / "absent.toml").string();
    CHECK(run({"check-hypotheses", "--config", missing, "--out", (dir / "a").string()}, &err) == 4);
    CHECK(err.find(missing) != std::string::npos);
    const fs::path bad = write_config(dir, "[grid]\nunknown_key = 3\n");
    CHECK(run({"check-hypotheses", "--config", bad.string(), "--out", (dir / "b").string()}) == 4);
    CHECK(run({"no-such-command"}) == 4);
    CHECK(run({"evolve", "--config", write_config(dir, kSmall).string(), "--override", "grid.n=12",
               "--out", (dir / "c").string()}) == 4);
  }

  TEST_CASE("hypothesis failure exits with code 2") {
    const fs::path dir = scratch("step");
    const fs::path cfg = write_config(dir, R"(
[profile]
kind = "tabulated"
dim = 3
r_nodes = [0.0, 0.999, 1.0, 4.0]
f2_nodes = [1.0, 1.0, 0.0, 0.0]
)");
    CHECK(run({"check-hypotheses", "--config", cfg.string(), "--out", (dir / "run").string()}) == 2);
    const json rep = json::parse(slurp(dir / "run" / "hypotheses.json"));
    CHECK(rep["passed"] == false);
  }

  TEST_CASE("evolve with zero perturbation is stationary and reproducible") {
    const fs::path dir = scratch("evolve");
    const fs::path cfg = write_config(dir, kSmall);
    const std::vector<std::string> base = {"evolve", "--config", cfg.string(), "--override", "perturbation.amplitude=0"};
    auto with_out = [&](const std::string& name, int workers) {
      auto a = base;
      a.insert(a.end(), {"--out", (dir / name).string(), "--workers", std::to_string(workers)});
      return a;
    };
    REQUIRE(run(with_out("r1", 1)) == 0);
    REQUIRE(run(with_out("r2", 2)) == 0);
    const json ev = json::parse(slurp(dir / "r1" / "evolve.json"));
    CHECK(ev["stationary_exact"] == true);
    CHECK(ev["deviation_max"].get<double>() == 0.0);

    const json man = json::parse(slurp(dir / "r1" / "manifest.json"));
    CHECK(man["command"] == "evolve");
    CHECK(man["code_version"] == kCodeVersion);
    CHECK(man["config"]["perturbation"]["amplitude"].get<double>() == 0.0);
    for (const auto& entry : man["artifacts"]) {
      const std::string name = entry["file"];
      CHECK(entry["sha256"] == sha256_file(dir / "r1" / name));
      CHECK(slurp(dir / "r1" / name) == slurp(dir / "r2" / name));
    }
    const json man2 = json::parse(slurp(dir / "r2" / "manifest.json"));
    CHECK(man["input_hash"] == man2["input_hash"]);

    const EnsembleField X = read_field(dir / "r1" / "X_final");
    CHECK(X.realizations() == 8);
    CHECK(X.grid.n() == 16);
  }

  TEST_CASE("field and potential files round trip") {
    const fs::path dir = scratch("io");
    EnsembleField u;
    u.grid = Grid(2, 8, 3.0);
    u.values = RowArrayXXc::Random(3, u.grid.size());
    u.provenance = WienerProvenance{17, 3};
    write_field(dir / "u", u);
    const EnsembleField v = read_field(dir / "u");
    CHECK((v.values - u.values).abs().maxCoeff() == 0.0);
    CHECK(v.grid.same_as(u.grid));
    SpaceTimePotential V = SpaceTimePotential::zeros(u.grid, uniform_times(1.0, 4));
    V.values = RowArrayXXr::Random(5, u.grid.size());
    write_potential(dir / "V", V);
    const SpaceTimePotential W = read_potential(dir / "V");
    CHECK((W.values - V.values).abs().maxCoeff() == 0.0);
    CHECK(W.times == V.times);
  }

  TEST_CASE("seed override changes the sample and the input hash") {
    const fs::path dir = scratch("seed");
    const fs::path cfg = write_config(dir, kSmall);
    REQUIRE(run({"sample-equilibrium", "--config", cfg.string(), "--out", (dir / "a").string()}) == 0);
    REQUIRE(run({"sample-equilibrium", "--config", cfg.string(), "--seed", "4", "--out", (dir / "b").string()}) == 0);
    CHECK(slurp(dir / "a" / "Y0.bin") != slurp(dir / "b" / "Y0.bin"));
    CHECK(json::parse(slurp(dir / "a" / "manifest.json"))["input_hash"] !=
          json::parse(slurp(dir / "b" / "manifest.json"))["input_hash"]);
    CHECK(run({"sample-equilibrium", "--config", cfg.string(), "--seed", "x1", "--out", (dir / "c").string()}) == 4);
  }
}
