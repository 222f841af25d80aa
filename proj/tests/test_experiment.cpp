#include "doctest.h"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "robinlab/errors.hpp"
#include "robinlab/experiment.hpp"

using namespace robinlab;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "robinlab-tests" / name;
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  for (std::string l; std::getline(is, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

RunOptions into(const fs::path& dir, int workers = 1) {
  RunOptions o;
  o.output_dir = dir;
  o.workers = workers;
  return o;
}

int cli(const std::string& args) {
  const int status = std::system((std::string(ROBINLAB_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << text;
}

}  // namespace

TEST_CASE("sha256 known answers") {
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("real formatting uses 17 significant digits") {
  CHECK(format_real(0.1) == "0.10000000000000001");
  CHECK(format_real(-2.0) == "-2");
  CHECK(std::stod(format_real(std::exp(1.0))) == std::exp(1.0));
}

TEST_CASE("strict parsing") {
  const auto c = parse_config(R"({
    // comments are allowed
    "potential": {"kind": "step", "sigma": 1, "L": 1},
    "grid": {"R": 6, "h": [0.05, 0.2, 0.1]},
    "outer_bc": "both",
    "solver": {"k": 2, "tol": 1e-9, "method": "dense"},
    "tasks": ["bounds", "solve"]
  })");
  CHECK(c.potential.id() == "step(sigma=1,L=1)");
  CHECK(c.h_values == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(c.outer.size() == 2);
  CHECK(c.solver.k == 2);
  CHECK(c.solver.method == SolverMethod::Dense);
  CHECK(c.tasks.size() == 2);

  const char* bad[] = {
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "colour": 3})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1, "width": 2}})",
      R"({"potential": {"kind": "wave"}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "grid": {"R": 1, "h": 0.3}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "grid": {"R": 6, "h": [0.3, 0.2, 0.1]}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "solver": {"k": 0}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "solver": {"k": 1.5}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "tasks": ["solve", "dance"]})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "tasks": ["sweep"]})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "outer_bc": "robin"})",
      R"({"potential": {"kind": "piecewise", "breaks": [1, 2], "values": [1]}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "decay": {"ray": [-1, 1]}})",
      R"({"potential": {"kind": "step", "sigma": 1, "L": 1})",
      R"({"grid": {"R": 6}})",
  };
  for (const char* text : bad) {
    CAPTURE(text);
    CHECK_THROWS_AS(parse_config(text), ConfigError);
  }
}

TEST_CASE("sweep budgets are checked while parsing") {
  std::string values = "[";
  for (int i = 0; i < 101; ++i) values += (i ? "," : "") + std::to_string(0.01 * (i + 1));
  values += "]";
  const std::string solve = R"({"potential": {"kind": "step", "sigma": 1, "L": 1},
    "sweep": {"parameters": [{"name": "sigma", "values": )" + values + R"(}], "solve": true}})";
  CHECK_THROWS_AS(parse_config(solve), ConfigError);
  std::string bounds = solve;
  bounds.replace(bounds.find("true"), 4, "false");
  CHECK_NOTHROW(parse_config(bounds));
  const std::string huge = R"({"potential": {"kind": "step", "sigma": 1, "L": 1},
    "sweep": {"parameters": [{"name": "sigma", "values": )" + values + R"(}, {"name": "L", "values": )" + values + R"(}]}})";
  CHECK_THROWS_AS(parse_config(huge), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"potential": {"kind": "piecewise", "breaks": [1], "values": [1]},
    "sweep": {"parameters": [{"name": "sigma", "values": [1]}]}})"), ConfigError);
  CHECK_THROWS_AS(parse_config(R"({"potential": {"kind": "constant", "sigma": 1},
    "sweep": {"parameters": [{"name": "L", "values": [1]}]}})"), ConfigError);
}

TEST_CASE("reference and bounds reports") {
  const auto c = parse_config(R"({"potential": {"kind": "constant", "sigma": 1}, "tasks": ["reference"]})");
  const fs::path dir = scratch("reference");
  const auto summary = run(c, {}, into(dir));
  CHECK(summary.files == std::vector<std::string>{"reference.json", "manifest.json"});
  const json ref = json::parse(slurp(dir / "reference.json"));
  CHECK(ref["ground_energy"].get<double>() == -2.0);
  CHECK(ref["ess_bottom"].get<double>() == -1.0);

  const auto s = parse_config(R"({"potential": {"kind": "step", "sigma": 1, "L": 1}})");
  run(s, {Task::Bounds}, into(dir));
  const json b = json::parse(slurp(dir / "bounds.json"));
  CHECK(b["sandwich_lo"].get<double>() == -2.0);
  CHECK(b["sandwich_hi"].get<double>() == doctest::Approx(-2.0 + 4.0 * std::exp(-2.0)).epsilon(1e-14));
  CHECK(b["certificate_n"].get<int>() == 1);
  CHECK(b["count_bound"].get<int>() == 1);
  CHECK(b["ess_class"].get<std::string>() == "NonPositiveTail");

  // Absent fields are omitted rather than written as null.
  run(c, {Task::Bounds}, into(dir));
  const json cb = json::parse(slurp(dir / "bounds.json"));
  CHECK(!cb.contains("certificate_n"));
  CHECK(!cb.contains("count_bound"));
  CHECK(cb["ess_bottom"].get<double>() == -1.0);
}

TEST_CASE("sweep rows") {
  const auto c = parse_config(R"({"potential": {"kind": "step", "sigma": 1, "L": 1},
    "sweep": {"parameters": [{"name": "sigma", "values": [0.5, 1.0, 3.0]}]}})");
  const fs::path dir = scratch("sweep");
  run(c, {Task::Sweep}, into(dir));
  const auto rows = lines(slurp(dir / "sweep.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == "sigma,E_lo,E_hi,count_bound,E_computed,negative_count");
  const auto r1 = split(rows[1]);
  CHECK(std::stod(r1[0]) == 0.5);
  CHECK(std::stod(r1[1]) == -0.5);
  CHECK(std::stod(r1[2]) == doctest::Approx(-0.5 + std::exp(-1.0)).epsilon(1e-14));
  CHECK(r1[3] == "1");
  const auto r2 = split(rows[2]);
  CHECK(std::stod(r2[2]) == doctest::Approx(-2.0 + 4.0 * std::exp(-2.0)).epsilon(1e-14));
  // sigma = 3 > 2/L: no count bound, still a row.
  const auto r3 = split(rows[3]);
  CHECK(r3[3].empty());
  CHECK(std::stod(r3[1]) == -18.0);

  const auto empty = parse_config(R"({"potential": {"kind": "step", "sigma": 1, "L": 1},
    "sweep": {"parameters": [{"name": "sigma", "values": []}, {"name": "L", "values": [1, 2]}]}})");
  run(empty, {Task::Sweep}, into(dir));
  CHECK(slurp(dir / "sweep.csv") == "sigma,L,E_lo,E_hi,count_bound,E_computed,negative_count\n");
}

TEST_CASE("sweep output does not depend on the worker count") {
  const auto c = parse_config(R"({"potential": {"kind": "step", "sigma": 1, "L": 1},
    "grid": {"R": 6, "h": 0.25},
    "sweep": {"parameters": [{"name": "sigma", "values": [0.5, 1.0, 1.5]},
                             {"name": "L", "values": [0.5, 1.0]}], "solve": true}})");
  const fs::path one = scratch("sweep1");
  const fs::path four = scratch("sweep4");
  run(c, {Task::Sweep}, into(one, 1));
  run(c, {Task::Sweep}, into(four, 4));
  const std::string a = slurp(one / "sweep.csv");
  CHECK(a == slurp(four / "sweep.csv"));
  const auto rows = lines(a);
  REQUIRE(rows.size() == 7);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto cells = split(rows[i]);
    REQUIRE(cells.size() == 7);
    CHECK(!cells[5].empty());
    CHECK(std::stod(cells[5]) >= std::stod(cells[2]));  // above E_lo
    if (!cells[4].empty()) CHECK(std::stoi(cells[6]) <= std::stoi(cells[4]));
  }
}

TEST_CASE("solve task, manifest and determinism") {
  const std::string text = R"({"potential": {"kind": "step", "sigma": 1, "L": 1},
    "grid": {"R": 6, "h": [0.2, 0.1, 0.05]}, "outer_bc": "both",
    "solver": {"k": 2, "dump_matrix": true}, "roots1d": {"k_max": 15},
    "tasks": ["solve", "decay", "roots1d", "certify"]})";
  const auto c = parse_config(text);
  const fs::path a = scratch("det-a");
  const fs::path b = scratch("det-b");
  const auto sa = run(c, {}, into(a));
  run(c, {}, into(b));

  const json manifest = json::parse(slurp(a / "manifest.json"));
  CHECK(manifest["config_sha256"].get<std::string>() == sha256_hex(text));
  CHECK(manifest["tool"] == "robinlab");
  CHECK(manifest.contains("version"));
  CHECK(manifest["wall_time_seconds"].get<double>() >= 0.0);
  std::size_t listed = 0;
  for (const auto& f : manifest["files"]) {
    const std::string name = f["path"].get<std::string>();
    CHECK(sha256_hex(slurp(a / name)) == f["sha256"].get<std::string>());
    CHECK(slurp(a / name) == slurp(b / name));
    ++listed;
  }
  std::size_t on_disk = 0;
  for (const auto& e : fs::directory_iterator(a)) on_disk += e.path().filename() != "manifest.json";
  CHECK(listed == on_disk);
  CHECK(sa.files.back() == "manifest.json");

  const json solve = json::parse(slurp(a / "solve.json"));
  CHECK(solve["runs"].size() == 6);
  CHECK(solve["bracket"].size() == 3);
  CHECK(solve["richardson"].contains("dirichlet"));
  for (const auto& br : solve["bracket"]) CHECK(br["lo"].get<double>() <= br["hi"].get<double>());
  CHECK(fs::exists(a / "matrix_dirichlet_h0.05.txt"));

  const auto roots = lines(slurp(a / "roots1d.csv"));
  CHECK(roots[0] == "index,kind,k_or_kappa,eigenvalue,residual");
  CHECK(split(roots[1])[1] == "negative");
  for (std::size_t i = 1; i < roots.size(); ++i) CHECK(std::stod(split(roots[i])[4]) < 1e-10);

  const auto decay = lines(slurp(a / "decay.csv"));
  CHECK(decay[0] == "r,abs_phi,model");
  CHECK(decay.size() == 41);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const fs::path cfg = dir / "cfg";

  write(cfg / "unknown.cfg", R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "tasks": ["bounds"], "extra": 1})");
  CHECK(cli("run --config " + (cfg / "unknown.cfg").string() + " --out " + (dir / "o1").string()) == 2);
  CHECK(!fs::exists(dir / "o1"));

  write(cfg / "budget.cfg", R"({"potential": {"kind": "step", "sigma": 1, "L": 1}, "tasks": ["sweep"],
    "sweep": {"parameters": [{"name": "sigma", "values": [1,2,3,4,5,6,7,8,9,10,11]},
                             {"name": "L", "values": [1,2,3,4,5,6,7,8,9,10]}], "solve": true}})");
  CHECK(cli("run --config " + (cfg / "budget.cfg").string() + " --out " + (dir / "o2").string()) == 2);
  CHECK(!fs::exists(dir / "o2"));

  write(cfg / "constant.cfg", R"({"potential": {"kind": "constant", "sigma": 1}})");
  CHECK(cli("certify --config " + (cfg / "constant.cfg").string() + " --out " + (dir / "o3").string()) == 4);
  CHECK(cli("reference --config " + (cfg / "constant.cfg").string() + " --out " + (dir / "o3").string()) == 0);
  CHECK(fs::exists(dir / "o3" / "reference.json"));

  write(cfg / "starved.cfg", R"({"potential": {"kind": "constant", "sigma": 0},
    "grid": {"R": 12, "h": 0.1}, "outer_bc": "neumann",
    "solver": {"k": 40, "max_restarts": 1, "method": "shift-invert"}, "tasks": ["solve"]})");
  CHECK(cli("run --config " + (cfg / "starved.cfg").string() + " --out " + (dir / "o4").string()) == 3);

  CHECK(cli("run --config " + (cfg / "missing.cfg").string()) == 2);
  CHECK(cli("frobnicate --config " + (cfg / "constant.cfg").string()) == 2);
  CHECK(cli("bounds --config " + (cfg / "constant.cfg").string() + " --workers 0") == 2);
}

TEST_CASE("shipped presets parse") {
  for (const char* name : {"constant.cfg", "step.cfg", "oscillating.cfg"}) {
    CAPTURE(name);
    const auto c = load_config(fs::path(ROBINLAB_PRESETS) / name);
    CHECK(!c.tasks.empty());
  }
}
