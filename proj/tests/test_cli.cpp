#include <doctest.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

namespace fs = std::filesystem;

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout only; stderr goes to the terminal
};

CommandResult run_cli(const std::string& args) {
  const std::string command = std::string(SIGSCALE_CLI_PATH) + " " + args;
  std::array<char, 4096> buffer{};
  CommandResult result;
  FILE* pipe = popen(command.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::size_t got = 0;
  while ((got = fread(buffer.data(), 1, buffer.size(), pipe)) > 0) {
    result.output.append(buffer.data(), got);
  }
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

std::string fixture(const std::string& name) {
  return std::string(SIGSCALE_FIXTURES_DIR) + "/" + name;
}

fs::path temp_path(const std::string& name) {
  return fs::temp_directory_path() / ("sigscale_cli_" + name);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path);
  out << content;
}

}  // namespace

TEST_CASE("eval scores the bundled run fixture") {
  const auto r = run_cli("eval --runs " + fixture("msmarco_run.tsv") + " --qrels " +
                         fixture("msmarco_qrels.tsv") + " --metric rr --k 10 --out -");
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.rfind("request,sysA,sysB\n", 0) == 0);
  // sysA q2: first relevant (d7) sits at rank 4 -> 0.25
  CHECK(r.output.find("q2,0.25,1\n") != std::string::npos);
}

TEST_CASE("eval column means match the reference MRR to 6 decimals") {
  const auto r = run_cli("eval --runs " + fixture("msmarco_run.tsv") + " --qrels " +
                         fixture("msmarco_qrels.tsv") + " --metric rr --k 10 --out -");
  REQUIRE(r.exit_code == 0);
  std::istringstream in(r.output);
  std::string line;
  std::getline(in, line);
  double sum_a = 0.0;
  double sum_b = 0.0;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    std::getline(cells, cell, ',');
    sum_a += std::stod(cell);
    std::getline(cells, cell, ',');
    sum_b += std::stod(cell);
    ++rows;
  }
  REQUIRE(rows == 5);
  nlohmann::json expected;
  std::ifstream ein(fixture("msmarco_expected.json"));
  ein >> expected;
  CHECK(std::abs(sum_a / rows - expected.at("sysA").get<double>()) < 1e-6);
  CHECK(std::abs(sum_b / rows - expected.at("sysB").get<double>()) < 1e-6);
}

TEST_CASE("test subcommand: identical columns give p = 1 for all five tests") {
  const auto matrix = temp_path("identical.csv");
  std::ostringstream body;
  body << "request,a,b\n";
  for (int i = 0; i < 30; ++i) {
    const double v = (i % 10) / 10.0;
    body << "u" << i << ',' << v << ',' << v << '\n';
  }
  write_file(matrix, body.str());

  const auto r = run_cli("test --matrix " + matrix.string() +
                         " --system-b a --system-e b --seed 3 --format json --out -");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.output);
  REQUIRE(j.size() == 5);
  for (const auto& [name, entry] : j.items()) {
    INFO(name);
    CHECK(entry.at("p_value").get<double>() == 1.0);
  }
  fs::remove(matrix);
}

TEST_CASE("test subcommand: unknown system id exits 2 and names it") {
  const auto r = run_cli("test --matrix " + fixture("skewed_pair_matrix.csv") +
                         " --system-b sysU --system-e nosuch --out - 2>/dev/null");
  CHECK(r.exit_code == 2);
}

TEST_CASE("fit writes a model bundle consumable by type1") {
  const auto bundle = temp_path("model.json");
  const auto r = run_cli("fit --matrix " + fixture("skewed_pair_matrix.csv") +
                         " --metric rr --k 10 --seed 11 --out " + bundle.string() +
                         " 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  const auto j = nlohmann::json::parse(slurp(bundle));
  CHECK(j.at("metric") == "rr@10");
  CHECK(j.at("systems").size() == 2);
  CHECK(j.at("copulas").size() == 1);
  CHECK(j.at("marginals").size() == 2);

  const auto report = temp_path("type1.csv");
  const auto r2 = run_cli("type1 --model " + bundle.string() +
                          " --n 25 --trials 100 --alphas 0.05 --seed 1 " +
                          "--bootstrap-samples 200 --randomization-samples 200 " +
                          "--out " + report.string() + " 2>/dev/null");
  REQUIRE(r2.exit_code == 0);
  const std::string csv = slurp(report);
  CHECK(csv.rfind("test,n,alpha,delta,rate,trials,se\n", 0) == 0);
  // 5 tests x 1 n x 1 alpha
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
  fs::remove(bundle);
  fs::remove(report);
}

TEST_CASE("experiments are byte-identical across reruns and thread counts") {
  const auto bundle = temp_path("det_model.json");
  REQUIRE(run_cli("fit --matrix " + fixture("skewed_pair_matrix.csv") +
                  " --metric rr --k 10 --out " + bundle.string() + " 2>/dev/null")
              .exit_code == 0);
  const auto out1 = temp_path("det1.csv");
  const auto out2 = temp_path("det2.csv");
  const std::string common = "type1 --model " + bundle.string() +
                             " --n 50 --trials 100 --alphas 0.05,0.1 --seed 7 " +
                             "--bootstrap-samples 300 --randomization-samples 300 ";
  REQUIRE(run_cli(common + "--threads 1 --out " + out1.string() + " 2>/dev/null")
              .exit_code == 0);
  REQUIRE(run_cli(common + "--threads 2 --out " + out2.string() + " 2>/dev/null")
              .exit_code == 0);
  CHECK(slurp(out1) == slurp(out2));
  fs::remove(bundle);
  fs::remove(out1);
  fs::remove(out2);
}

TEST_CASE("power expands the delta grid syntax") {
  const auto bundle = temp_path("power_model.json");
  REQUIRE(run_cli("fit --matrix " + fixture("skewed_pair_matrix.csv") +
                  " --metric rr --k 10 --out " + bundle.string() + " 2>/dev/null")
              .exit_code == 0);
  const auto r = run_cli("power --model " + bundle.string() +
                         " --n 25 --trials 100 --alphas 0.05 --seed 2 " +
                         "--deltas 0.01:0.1:0.01 --tests t --out - 2>/dev/null");
  REQUIRE(r.exit_code == 0);
  // header + 10 deltas
  CHECK(std::count(r.output.begin(), r.output.end(), '\n') == 11);
  for (const char* delta : {"0.01", "0.02", "0.05", "0.1"}) {
    INFO(delta);
    CHECK(r.output.find(std::string(",25,0.05,") + delta + ",") != std::string::npos);
  }
  fs::remove(bundle);
}

TEST_CASE("report turns archives into calibration curves and reports into power curves") {
  const auto bundle = temp_path("report_model.json");
  REQUIRE(run_cli("fit --matrix " + fixture("skewed_pair_matrix.csv") +
                  " --metric rr --k 10 --out " + bundle.string() + " 2>/dev/null")
              .exit_code == 0);
  const auto report = temp_path("rep.csv");
  const auto archive = temp_path("arch.csv");
  REQUIRE(run_cli("type1 --model " + bundle.string() +
                  " --n 25 --trials 100 --alphas 0.05 --seed 3 --tests t,sign " +
                  "--out " + report.string() + " --archive " + archive.string() +
                  " 2>/dev/null")
              .exit_code == 0);

  const auto cal = run_cli("report --input " + archive.string() +
                           " --kind calibration --out - 2>/dev/null");
  REQUIRE(cal.exit_code == 0);
  CHECK(cal.output.rfind("test,n,alpha,rate\n", 0) == 0);
  // 2 tests x 100 grid points
  CHECK(std::count(cal.output.begin(), cal.output.end(), '\n') == 201);

  // power-curve kind on a type1 report still works (delta column is 0);
  // mismatched file/kind must fail cleanly
  const auto bad = run_cli("report --input " + archive.string() +
                           " --kind power-curve --out - 2>/dev/null");
  CHECK(bad.exit_code == 2);

  const auto curve = run_cli("report --input " + report.string() +
                             " --kind power-curve --alpha 0.05 --out - 2>/dev/null");
  REQUIRE(curve.exit_code == 0);
  CHECK(curve.output.rfind("test,n,delta,power\n", 0) == 0);

  const auto empty_archive = temp_path("empty_arch.csv");
  write_file(empty_archive, "test,n,delta,trial,p\n");
  const auto empty = run_cli("report --input " + empty_archive.string() +
                             " --kind calibration --out - 2>/dev/null");
  CHECK(empty.exit_code == 2);

  fs::remove(bundle);
  fs::remove(report);
  fs::remove(archive);
  fs::remove(empty_archive);
}

TEST_CASE("JSON config file mirrors the flags") {
  const auto bundle = temp_path("cfg_model.json");
  REQUIRE(run_cli("fit --matrix " + fixture("skewed_pair_matrix.csv") +
                  " --metric rr --k 10 --out " + bundle.string() + " 2>/dev/null")
              .exit_code == 0);
  const auto config = temp_path("config.json");
  write_file(config, nlohmann::json{
                         {"type1",
                          {{"model", bundle.string()},
                           {"n", "25"},
                           {"trials", 100},
                           {"alphas", "0.05"},
                           {"seed", 7},
                           {"tests", "t"},
                           {"out", "-"}}}}
                         .dump());
  const auto from_config =
      run_cli("--config " + config.string() + " type1 2>/dev/null");
  REQUIRE(from_config.exit_code == 0);
  const auto from_flags = run_cli(
      "type1 --model " + bundle.string() +
      " --n 25 --trials 100 --alphas 0.05 --seed 7 --tests t --out - 2>/dev/null");
  REQUIRE(from_flags.exit_code == 0);
  CHECK(from_config.output == from_flags.output);
  fs::remove(bundle);
  fs::remove(config);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("frobnicate 2>/dev/null").exit_code == 2);
  CHECK(run_cli("eval --runs /nonexistent --qrels /nonexistent --out - 2>/dev/null")
            .exit_code == 2);
  CHECK(run_cli("type1 --model /nonexistent.json --out - 2>/dev/null").exit_code != 0);
}
