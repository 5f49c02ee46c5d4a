#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "mpqkd/config_io.hpp"

using namespace mpqkd;

namespace {

const char* kSampleConfig = R"(# detector block
p_d = 1e-8
eta_d = 0.7
alpha = 0.2
f = 1.1
eps_tol = 1e-10
e_d_z = 0.005
e_d_x = 0.05
variant = original
N = 1e10
l = 10000
mu = 0.4
nu = 0.05
p_mu = 0.3
p_nu = 0.3
delta = 0.19634954084936207
dist_km = 25
)";

std::string write_temp(const std::string& text, const char* name) {
  std::string path = std::string("/tmp/mpqkd_test_") + name + ".conf";
  std::ofstream out(path);
  out << text;
  return path;
}

#ifdef MPQKD_BIN
int run_cli(const std::string& args, std::string* output = nullptr) {
  const std::string out_path = "/tmp/mpqkd_cli_out.txt";
  const std::string cmd =
      std::string(MPQKD_BIN) + " " + args + " > " + out_path + " 2>&1";
  const int status = std::system(cmd.c_str());
  if (output) {
    std::ifstream in(out_path);
    std::ostringstream buf;
    buf << in.rdbuf();
    *output = buf.str();
  }
  return WEXITSTATUS(status);
}
#endif

}  // namespace

TEST_CASE("config parse and typed getters") {
  const KeyValueConfig config = KeyValueConfig::parse(kSampleConfig);
  CHECK(config.require_number("p_d") == doctest::Approx(1e-8));
  CHECK(config.require_number("N") == doctest::Approx(1e10));
  CHECK(config.require_count("l") == 10000);
  CHECK(config.require_string("variant") == "original");
  CHECK(config.get_flag("optimize", false) == false);
  CHECK_THROWS_AS(config.require_number("missing_key"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("key_without_value\n"), ConfigError);
  CHECK_THROWS_AS(KeyValueConfig::parse("x = not_a_number\n").require_number("x"),
                  ConfigError);
}

TEST_CASE("config round-trip is idempotent") {
  const KeyValueConfig config = KeyValueConfig::parse(kSampleConfig);
  const std::string once = config.serialize();
  const std::string twice = KeyValueConfig::parse(once).serialize();
  CHECK(once == twice);
}

TEST_CASE("protocol_from_config builds a valid config") {
  const KeyValueConfig config = KeyValueConfig::parse(kSampleConfig);
  const ProtocolConfig cfg = protocol_from_config(config, 25.0);
  CHECK(cfg.channel.dist_a_km == doctest::Approx(12.5));
  CHECK(cfg.intensities_a.prob_vac == doctest::Approx(0.4));
  CHECK(cfg.variant == Variant::Original);
  CHECK(cfg.max_pair_interval == 10000);

  KeyValueConfig broken = config;
  broken.set("nu", "0.5");  // nu > mu
  CHECK_THROWS(protocol_from_config(broken, 25.0));
}

TEST_CASE("variant names round-trip") {
  CHECK(parse_variant("original") == Variant::Original);
  CHECK(parse_variant("six-state") == Variant::SixState);
  CHECK(variant_name(Variant::SixState) == "six-state");
  CHECK_THROWS_AS(parse_variant("bogus"), ConfigError);
}

#ifdef MPQKD_BIN

TEST_CASE("cli rate: success, output line and abort exit code") {
  const std::string path = write_temp(kSampleConfig, "rate");
  std::string output;
  CHECK(run_cli("rate --config " + path, &output) == 0);
  CHECK(output.find("distance_km=") != std::string::npos);
  CHECK(output.find("key_rate=") != std::string::npos);
  CHECK(output.find("aborted=0") != std::string::npos);

  // same invocation twice gives identical bytes
  std::string output2;
  run_cli("rate --config " + path, &output2);
  CHECK(output == output2);

  // far beyond reach: abort outcome, exit 2
  std::string far = kSampleConfig;
  far += "\n";
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  cfg.set("dist_km", "1000");
  const std::string far_path = write_temp(cfg.serialize(), "rate_far");
  CHECK(run_cli("rate --config " + far_path, &output) == 2);
  CHECK(output.find("aborted=1") != std::string::npos);
}

TEST_CASE("cli rate: variant override switches the pipeline") {
  const std::string path = write_temp(kSampleConfig, "rate_variant");
  std::string orig, six;
  CHECK(run_cli("rate --config " + path, &orig) == 0);
  CHECK(run_cli("rate --config " + path + " --variant six-state", &six) == 0);
  CHECK(orig != six);
  CHECK(run_cli("rate --config " + path + " --variant bogus") == 1);
}

TEST_CASE("cli rate: missing field names the field, exit 1") {
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  KeyValueConfig without;
  for (const auto& [k, v] : cfg.entries())
    if (k != "N") without.set(k, v);
  const std::string path = write_temp(without.serialize(), "rate_missing");
  std::string output;
  CHECK(run_cli("rate --config " + path, &output) == 1);
  CHECK(output.find("`N`") != std::string::npos);
}

TEST_CASE("cli sweep: fixed-parameter CSV is deterministic and well formed") {
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  cfg.set("start_km", "0");
  cfg.set("stop_km", "40");
  cfg.set("step_km", "20");
  cfg.set("optimize", "false");
  const std::string path = write_temp(cfg.serialize(), "sweep");
  std::string csv1, csv2;
  CHECK(run_cli("sweep --config " + path, &csv1) == 0);
  run_cli("sweep --config " + path, &csv2);
  CHECK(csv1 == csv2);
  CHECK(csv1.rfind("distance_km,key_rate,plob_bound,mu,nu,p_mu,p_nu,delta,"
                   "n_z1_lower,e_ph_upper\n", 0) == 0);
  // one header and three rows
  int lines = 0;
  for (char c : csv1)
    if (c == '\n') ++lines;
  CHECK(lines == 4);
}

TEST_CASE("cli mc-validate: agreement, determinism and fault injection") {
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  cfg.set("N", "1e6");
  cfg.set("mc_seeds", "2");
  const std::string path = write_temp(cfg.serialize(), "mcv");
  std::string rep1, rep2;
  CHECK(run_cli("mc-validate --config " + path + " --seed 42", &rep1) == 0);
  run_cli("mc-validate --config " + path + " --seed 42", &rep2);
  CHECK(rep1 == rep2);
  CHECK(rep1.find("n_Z[mu,mu] expected=") != std::string::npos);

  // seed is mandatory
  CHECK(run_cli("mc-validate --config " + path) == 1);

  // corrupting one analytic class must trip the exit code and the report
  cfg.set("corrupt_class", "n_Z[mu,mu]");
  cfg.set("mc_seeds", "8");
  const std::string bad_path = write_temp(cfg.serialize(), "mcv_bad");
  std::string rep3;
  CHECK(run_cli("mc-validate --config " + bad_path + " --seed 42", &rep3) ==
        3);
  CHECK(rep3.find("violation") != std::string::npos);
  CHECK(rep3.find("n_Z[mu,mu]") != std::string::npos);
}

TEST_CASE("cli usage errors exit with code 1") {
  CHECK(run_cli("rate") == 1);                      // missing --config
  CHECK(run_cli("unknown-subcommand") == 1);
  CHECK(run_cli("rate --config /nonexistent.conf") == 1);
}

namespace {

std::vector<std::vector<double>> parse_csv_rows(const std::string& csv,
                                                std::vector<std::string>* hdr) {
  std::istringstream in(csv);
  std::string line;
  std::vector<std::vector<double>> rows;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string cell;
    if (first) {
      while (std::getline(ls, cell, ',')) hdr->push_back(cell);
      first = false;
      continue;
    }
    std::vector<double> row;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_CASE("cli sweep: plob column consistency and the six-state ratio") {
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  cfg.set("start_km", "300");
  cfg.set("stop_km", "340");
  cfg.set("step_km", "20");
  cfg.set("optimize", "false");
  cfg.set("mu", "0.2");
  cfg.set("nu", "0.02");
  cfg.set("p_mu", "0.1");
  cfg.set("p_nu", "0.35");
  cfg.set("N", "1e13");
  cfg.set("l", "1000000");
  const std::string orig_path = write_temp(cfg.serialize(), "ratio_orig");
  const std::string orig_csv = "/tmp/mpqkd_ratio_orig.csv";
  REQUIRE(run_cli("sweep --config " + orig_path + " --out " + orig_csv) == 0);

  // plob column equals the bound at the overall efficiency of the row
  std::ifstream in(orig_csv);
  std::ostringstream buf;
  buf << in.rdbuf();
  std::vector<std::string> hdr;
  const auto rows = parse_csv_rows(buf.str(), &hdr);
  REQUIRE(rows.size() == 3);
  const ChannelParams channel{1e-8, 0.7, 0.2, 0.0, 0.0};
  for (const auto& row : rows) {
    CHECK(row[2] ==
          doctest::Approx(plob_bound(overall_efficiency(row[0], channel)))
              .epsilon(1e-8));
  }

  cfg.set("variant", "six-state");
  const std::string six_path = write_temp(cfg.serialize(), "ratio_six");
  std::string six_csv;
  REQUIRE(run_cli("sweep --config " + six_path + " --ratio-baseline " +
                      orig_csv,
                  &six_csv) == 0);
  std::vector<std::string> hdr6;
  const auto rows6 = parse_csv_rows(six_csv, &hdr6);
  REQUIRE(hdr6.size() == 13);
  CHECK(hdr6[10] == "e_bit_z_upper");
  CHECK(hdr6[12] == "ratio_to_original");
  REQUIRE(rows6.size() == 3);
  for (std::size_t k = 0; k < rows6.size(); ++k) {
    CHECK(rows6[k][12] ==
          doctest::Approx(rows6[k][1] / rows[k][1]).epsilon(1e-8));
    CHECK(rows6[k][12] > 1.0);  // six-state advantage at 300+ km
  }
}

TEST_CASE("cli sweep: optimized rows beyond reach emit zero-rate lines") {
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  cfg.set("N", "1e13");
  cfg.set("l", "1000000");
  cfg.set("start_km", "470");
  cfg.set("stop_km", "500");
  cfg.set("step_km", "30");
  cfg.set("optimize", "true");
  const std::string path = write_temp(cfg.serialize(), "sweep_far");
  std::string csv;
  REQUIRE(run_cli("sweep --config " + path, &csv) == 0);
  std::vector<std::string> hdr;
  const auto rows = parse_csv_rows(csv, &hdr);
  REQUIRE(rows.size() == 2);
  for (const auto& row : rows) CHECK(row[1] == 0.0);
}

TEST_CASE("cli sweep: worker pool reproduces the single-thread CSV") {
  KeyValueConfig cfg = KeyValueConfig::parse(kSampleConfig);
  cfg.set("start_km", "0");
  cfg.set("stop_km", "60");
  cfg.set("step_km", "20");
  cfg.set("optimize", "false");
  const std::string path = write_temp(cfg.serialize(), "workers");
  std::string one, four;
  REQUIRE(run_cli("sweep --config " + path + " --workers 1", &one) == 0);
  REQUIRE(run_cli("sweep --config " + path + " --workers 4", &four) == 0);
  CHECK(one == four);
}

TEST_CASE("shipped configs parse and build valid protocol configurations") {
  for (const char* name :
       {"tablev_sweep_l1e6.conf", "tablev_sweep_l1e4.conf",
        "mc_validate_25km.conf"}) {
    const KeyValueConfig cfg =
        KeyValueConfig::load(std::string(MPQKD_CONFIG_DIR) + "/" + name);
    CHECK_NOTHROW(
        protocol_from_config(cfg, cfg.get_number("dist_km", 100.0)));
  }
}

#endif  // MPQKD_BIN
