#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "openq/cli.hpp"

using namespace openq;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

nlohmann::json parse(const Run& r) { return nlohmann::json::parse(r.out); }

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("openq_test_" + name);
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_CASE("verify reports exact zeros") {
  const auto r = run({"verify", "--relation", "bybe-a", "--sites", "1", "--spin", "2", "--backend", "exact", "--points", "20"});
  REQUIRE(r.code == kExitOk);
  const auto j = parse(r);
  CHECK(j["command"] == "verify");
  CHECK(j["backend"] == "exact");
  REQUIRE(j["residuals"].size() == 20);
  for (const auto& row : j["residuals"]) {
    CHECK(row["residual"] == "0");
    CHECK(row["twice_s"] == 2);
  }
  CHECK(j["timing"].is_null());
}

TEST_CASE("report schema keys in order") {
  const auto r = run({"spectrum", "--sites", "1", "--x", "1/3"});
  REQUIRE(r.code == kExitOk);
  const auto j = nlohmann::ordered_json::parse(r.out);
  std::vector<std::string> keys;
  for (const auto& item : j.items()) keys.push_back(item.key());
  CHECK(keys == std::vector<std::string>{"command", "params", "backend", "results", "residuals", "timing"});
  CHECK(j["results"].size() == 2);
}

TEST_CASE("bethe-solve for one magnon on two sites") {
  const auto r = run({"bethe-solve", "--sites", "2", "--spin", "1", "--magnons", "1", "--p", "7/2", "--q", "-9/4"});
  REQUIRE(r.code == kExitOk);
  const auto j = parse(r);
  const auto& head = j["results"][0];
  CHECK(head["kind"] == "solution");
  CHECK(head["roots"].size() == 1);
  CHECK(std::stod(head["max_abs_g"].get<std::string>()) < 1e-10);
  for (const auto& row : j["results"]) {
    if (row["kind"] == "eigenvalue") CHECK(std::stod(row["t_spectrum_distance"].get<std::string>()) < 1e-9);
  }
}

TEST_CASE("qop converges to the vacuum value") {
  const auto r = run({"qop", "--sites", "2", "--spin", "1", "--magnons", "0", "--x", "1/3", "--cutoffs", "8,16,32"});
  REQUIRE(r.code == kExitOk);
  const auto j = parse(r);
  REQUIRE(j["results"].size() == 3);
  const double expect = 1.0 / (-37.0 / 4 - 29.0 / 4 - 2.0);
  std::vector<double> errors;
  for (const auto& row : j["results"]) {
    const std::string ev = row["eigenvalue"];
    errors.push_back(std::abs(std::stod(ev) - expect));
  }
  CHECK(errors[1] < errors[0]);
  CHECK(errors[2] < 1e-12);
}

TEST_CASE("exit codes") {
  CHECK(run({}).code == kExitUsage);
  CHECK(run({"spectrum", "--no-such-flag"}).code == kExitUsage);
  CHECK(run({"spectrum", "--backend", "quad"}).code == kExitUsage);
  CHECK(run({"spectrum", "--p", "1/0"}).code == kExitUsage);
  CHECK(run({"bethe-solve", "--sites", "1"}).code == kExitUsage);
  CHECK(run({"verify", "--relation", "nope"}).code == kExitUsage);
  CHECK(run({"spectrum", "--config", "/nonexistent/openq.json"}).code == kExitUsage);
  // Trace outside its convergent domain.
  CHECK(run({"qop", "--sites", "1", "--p", "1/4", "--q", "1/3", "--cutoffs", "8"}).code == kExitGuard);
  // 2m - p - q - 2Ns = 0.
  CHECK(run({"qop", "--sites", "1", "--magnons", "0", "--p", "-1/2", "--q", "-1/2", "--cutoffs", "8"}).code == kExitGuard);
  // A tolerance no truncated trace can meet.
  CHECK(run({"verify", "--relation", "trace-conj", "--backend", "float", "--points", "2", "--trace-cutoff", "6",
             "--tolerance", "1e-300"})
            .code == kExitCheckFailed);
  const auto help = run({"--help"});
  CHECK(help.code == kExitOk);
  CHECK(help.out.find("bethe-solve") != std::string::npos);
}

TEST_CASE("config file values act like flags, explicit flags win") {
  const auto cfg = temp_path("config.json");
  {
    std::ofstream f(cfg);
    f << R"({"sites": 1, "spin": 2, "x": ["1/3", "2/5"], "p": "5/2"})";
  }
  const auto from_config = run({"spectrum", "--config", cfg.string()});
  const auto from_flags = run({"spectrum", "--sites", "1", "--spin", "2", "--x", "1/3,2/5", "--p", "5/2"});
  REQUIRE(from_config.code == kExitOk);
  CHECK(from_config.out == from_flags.out);
  const auto overridden = run({"spectrum", "--config", cfg.string(), "--p", "7/2"});
  CHECK(parse(overridden)["params"]["p"] == "7/2");
  std::filesystem::remove(cfg);
}

TEST_CASE("output and CSV files") {
  const auto json_path = temp_path("report.json");
  const auto csv_path = temp_path("report.csv");
  const auto r = run({"spectrum", "--sites", "1", "--x", "1/3", "--output", json_path.string(), "--csv", csv_path.string()});
  REQUIRE(r.code == kExitOk);
  CHECK(r.out.empty());
  CHECK(nlohmann::json::parse(slurp(json_path))["command"] == "spectrum");
  const auto csv = slurp(csv_path);
  CHECK(csv.rfind("x,index,eigenvalue\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  std::filesystem::remove(json_path);
  std::filesystem::remove(csv_path);
}

TEST_CASE("fixed seeds give byte-identical reports at any thread count") {
  const std::vector<std::string> verify{"verify", "--backend", "float", "--points", "3", "--trace-cutoff", "32",
                                        "--seed", "7"};
  auto v1 = verify, v3 = verify;
  v1.insert(v1.end(), {"--threads", "1"});
  v3.insert(v3.end(), {"--threads", "3"});
  const auto a = run(v1), b = run(v3);
  CHECK(a.code == kExitOk);
  CHECK(a.out == b.out);

  const auto s1 = run({"bethe-solve", "--spin", "2", "--magnons", "2", "--all", "--threads", "1"});
  const auto s4 = run({"bethe-solve", "--spin", "2", "--magnons", "2", "--all", "--threads", "4"});
  CHECK(s1.out == s4.out);
}

TEST_CASE("timing is opt-in") {
  const auto r = run({"spectrum", "--sites", "1", "--timing"});
  CHECK(parse(r)["timing"]["wall_seconds"].is_number());
}

TEST_CASE("identities and convergence subcommands") {
  const auto id = run({"identities", "--points", "3"});
  CHECK(id.code == kExitOk);
  for (const auto& row : parse(id)["results"]) CHECK(row["passed"] == true);
  const auto conv = run({"convergence", "--cutoffs", "8,16,32,48"});
  CHECK(conv.code == kExitOk);
  const auto rows = parse(conv)["results"];
  CHECK(std::stod(rows[3]["commutator"].get<std::string>()) < 1e-9);
}
