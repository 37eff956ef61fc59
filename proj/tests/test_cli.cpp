#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "json.hpp"

#ifndef TREEDET_CLI_PATH
#error "TREEDET_CLI_PATH must point at the cli binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "treedet_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult cli(const std::string& args) {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = std::string(TREEDET_CLI_PATH) + " " + args + " >" +
                          out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = work_dir() / name;
  std::ofstream out(p);
  out << j.dump(2);
  return p;
}

json ber_config() {
  return json{{"experiment", "ber_sweep"},
              {"idd", {{"n", 2}, {"q", 2}, {"snr_db", {30.0}}, {"m", 2},
                       {"j", 8}, {"iterations", 2}, {"info_bits", 300},
                       {"interleaver_bits", 600}}}};
}

json cpl_config() {
  return json{{"experiment", "cpl_sweep"},
              {"cpl", {{"n", 3}, {"q", 2}, {"snr_db", {8.0}}, {"trials", 2000},
                       {"bound_samples", 200}}}};
}

std::string hash_from_stdout(const std::string& out) {
  std::smatch m;
  REQUIRE(std::regex_search(out, m, std::regex("config ([0-9a-f]{16})")));
  return m[1];
}

}  // namespace

TEST_CASE("validate echoes the fully resolved config with defaults") {
  const fs::path cfg = write_config("ber.json", ber_config());
  const RunResult r = cli("validate --config " + cfg.string());
  REQUIRE(r.code == 0);
  const json resolved = json::parse(r.out);

  CHECK(resolved["experiment"] == "ber_sweep");
  CHECK(resolved["seed"] == 1);
  CHECK(resolved["workers"] == 1);
  CHECK(resolved["out"] == "ber_sweep.csv");
  const json& idd = resolved["idd"];
  CHECK(idd["n"] == 2);
  CHECK(idd["l"] == 2);  // defaults to n
  CHECK(idd["iterations"] == 2);
  CHECK(idd["j"] == 8);
  CHECK(idd["n_l"] == 5);
  CHECK(idd["llr_clip"] == 8.0);
  CHECK(idd["detector"] == "issma");
  CHECK(idd["ordering"] == "vblast");
  CHECK(idd["block_fading"] == false);
  CHECK(idd["channel"]["kind"] == "iid");

  // with m = 4 the full set of defaults is admissible
  const json minimal{{"experiment", "ber_sweep"},
                     {"idd", {{"n", 4}, {"q", 2}, {"snr_db", {6.0}}, {"m", 4}}}};
  const fs::path cfg2 = write_config("ber_minimal.json", minimal);
  const RunResult r2 = cli("validate --config " + cfg2.string());
  REQUIRE(r2.code == 0);
  const json res2 = json::parse(r2.out);
  CHECK(res2["idd"]["j"] == 16);
  CHECK(res2["idd"]["iterations"] == 7);
  CHECK(res2["idd"]["info_bits"] == 200000);
  CHECK(res2["idd"]["interleaver_bits"] == 12000);
}

TEST_CASE("missing required field names its dotted path") {
  json bad = ber_config();
  bad["idd"].erase("m");
  const fs::path cfg = write_config("bad_m.json", bad);
  const RunResult r = cli("validate --config " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("config error: idd.m: required field is missing") !=
        std::string::npos);
}

TEST_CASE("list budget constraint is enforced at parse time") {
  const fs::path cfg = write_config("ber2.json", ber_config());
  const RunResult r =
      cli("validate --config " + cfg.string() + " --set idd.j=9");
  CHECK(r.code == 2);
  CHECK(r.err.find("config error: idd.j: must satisfy j <= 2^q * m") !=
        std::string::npos);
}

TEST_CASE("unknown fields and unknown experiments are rejected") {
  json bad = ber_config();
  bad["idd"]["typo_field"] = 1;
  const fs::path cfg = write_config("typo.json", bad);
  const RunResult r = cli("validate --config " + cfg.string());
  CHECK(r.code == 2);
  CHECK(r.err.find("idd.typo_field: unknown field") != std::string::npos);

  json unk = ber_config();
  unk["experiment"] = "mystery";
  const fs::path cfg2 = write_config("unk.json", unk);
  const RunResult r2 = cli("validate --config " + cfg2.string());
  CHECK(r2.code == 2);
  CHECK(r2.err.find("experiment: must be one of") != std::string::npos);
}

TEST_CASE("unreadable or malformed config files") {
  const RunResult r = cli("validate --config " +
                          (work_dir() / "does_not_exist.json").string());
  CHECK(r.code == 2);
  CHECK(r.err.find("config error: config: cannot read file") != std::string::npos);

  const fs::path garbled = work_dir() / "garbled.json";
  std::ofstream(garbled) << "{ not json";
  const RunResult r2 = cli("validate --config " + garbled.string());
  CHECK(r2.code == 2);
  CHECK(r2.err.find("not valid JSON") != std::string::npos);
}

TEST_CASE("set overrides parse JSON values and fall back to strings") {
  const fs::path cfg = write_config("cpl.json", cpl_config());
  const RunResult r = cli("validate --config " + cfg.string() +
                          " --set cpl.snr_db=[8,10] --set cpl.metric=causal" +
                          " --seed 7 --workers 2");
  REQUIRE(r.code == 0);
  const json resolved = json::parse(r.out);
  CHECK(resolved["seed"] == 7);
  CHECK(resolved["workers"] == 2);
  CHECK(resolved["cpl"]["snr_db"] == json::array({8.0, 10.0}));
  CHECK(resolved["cpl"]["metric"] == "causal");

  const RunResult bad = cli("validate --config " + cfg.string() + " --set nonsense");
  CHECK(bad.code == 2);
  CHECK(bad.err.find("--set: expected key=value") != std::string::npos);
}

TEST_CASE("run writes csv plus metadata and reruns are byte identical") {
  const fs::path cfg = write_config("cpl_run.json", cpl_config());
  const fs::path out_a = work_dir() / "a" / "cpl.csv";
  const fs::path out_b = work_dir() / "b" / "cpl.csv";

  const RunResult ra = cli("run --config " + cfg.string() + " --out " + out_a.string());
  REQUIRE(ra.code == 0);
  CHECK(ra.out.find("cpl_sweep: 1 rows -> ") != std::string::npos);

  const std::string csv = slurp(out_a);
  CHECK(csv.rfind("snr_db,cpl_simulated,cpl_eq49,cpl_eq50_bound\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one row
  CHECK_FALSE(fs::exists(out_a.string() + ".tmp"));

  const json meta = json::parse(slurp(out_a.string() + ".meta.json"));
  CHECK(meta["rows"] == 1);
  CHECK(meta["seed"] == 1);
  CHECK(meta["version"] == "treedet 0.1.0");
  CHECK(meta["config_hash"] == hash_from_stdout(ra.out));
  CHECK(meta["config"]["cpl"]["trials"] == 2000);

  const RunResult rb = cli("run --config " + cfg.string() + " --out " + out_b.string());
  REQUIRE(rb.code == 0);
  CHECK(slurp(out_b) == csv);
}

TEST_CASE("config hash tracks semantics but not out or workers") {
  const fs::path cfg = write_config("cpl_hash.json", cpl_config());
  const std::string base = "run --config " + cfg.string() + " --out ";
  const RunResult a = cli(base + (work_dir() / "h1.csv").string());
  const RunResult b =
      cli(base + (work_dir() / "h2.csv").string() + " --workers 3");
  const RunResult c = cli(base + (work_dir() / "h3.csv").string() +
                          " --set cpl.trials=2500");
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  REQUIRE(c.code == 0);
  CHECK(hash_from_stdout(a.out) == hash_from_stdout(b.out));
  CHECK(hash_from_stdout(a.out) != hash_from_stdout(c.out));
}

TEST_CASE("failed runs leave no partial output behind") {
  const fs::path blocker = work_dir() / "blocker";
  std::ofstream(blocker) << "occupied";
  const fs::path cfg = write_config("cpl_fail.json", cpl_config());
  const fs::path out = blocker / "cpl.csv";  // parent is a regular file

  const RunResult r = cli("run --config " + cfg.string() + " --out " + out.string());
  CHECK(r.code == 3);
  CHECK(r.err.rfind("error: ", 0) == 0);
  CHECK(fs::is_regular_file(blocker));
  CHECK(slurp(blocker) == "occupied");
  CHECK_FALSE(fs::exists(out));
}

TEST_CASE("ber sweep run produces one row per snr and iteration") {
  json cfg_json = ber_config();
  const fs::path cfg = write_config("ber_run.json", cfg_json);
  const fs::path out = work_dir() / "ber.csv";
  const RunResult r = cli("run --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);

  std::ifstream in(out);
  std::string header;
  std::getline(in, header);
  CHECK(header == "snr_db,iteration,ber_info,ber_coded,mult_per_symbol,frames");
  int rows = 0;
  double ber_last = 1.0;
  for (std::string line; std::getline(in, line);) {
    ++rows;
    std::stringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');
    CHECK(field == "30");
    std::getline(ss, field, ',');
    CHECK(field == std::to_string(rows));
    std::getline(ss, field, ',');
    ber_last = std::stod(field);
  }
  CHECK(rows == 2);
  CHECK(ber_last == 0.0);  // 30 dB is error free at this size
}

TEST_CASE("complexity report isolates the look-ahead overhead") {
  const json cfg_json{
      {"experiment", "complexity_report"},
      {"complexity", {{"n", 4}, {"q", 2}, {"m", 2}, {"n_l_list", {1, 3}},
                      {"vectors", 20}}}};
  const fs::path cfg = write_config("cx.json", cfg_json);
  const fs::path out = work_dir() / "cx.csv";
  const RunResult r = cli("run --config " + cfg.string() + " --out " + out.string());
  REQUIRE(r.code == 0);

  std::ifstream in(out);
  std::string line;
  std::getline(in, line);
  CHECK(line.rfind("n,m,n_l,lookahead,vectors,mult_metric,mult_bias", 0) == 0);
  std::vector<double> bias;
  while (std::getline(in, line)) {
    std::stringstream ss(line);
    std::string field;
    for (int i = 0; i <= 6; ++i) std::getline(ss, field, ',');
    bias.push_back(std::stod(field));
  }
  REQUIRE(bias.size() == 3);  // causal baseline plus two window sizes
  CHECK(bias[0] == 0.0);
  CHECK(bias[1] > 0.0);
  CHECK(bias[2] > bias[1]);
}
