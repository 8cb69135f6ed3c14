#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

fs::path fresh_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("xyconv_cli_" + tag + "_" +
                                                    std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd '" + dir.string() + "' && '" + XYCONV_CLI_PATH + "' " + args +
                          " >cli_out.txt 2>cli_err.txt";
  const int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  r.out = slurp(dir / "cli_out.txt");
  r.err = slurp(dir / "cli_err.txt");
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("scan writes the documented grid schema") {
  const fs::path dir = fresh_dir("scan");
  const CliResult r = run_cli(dir, "scan --L 8 --gamma 1.0 --h-min 0 --h-max 1.5 --h-step 0.01");
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(slurp(dir / "grid.csv"));
  REQUIRE(lines.size() == 2 + 151);  // run reference, header, 151 cells
  CHECK(lines[0].rfind("# run=", 0) == 0);
  CHECK(lines[1] == "gamma,h,locc,elocc,degenerate,gap,S1,lambda1,lambda2,lambda3,lambda4");

  const nlohmann::json manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  CHECK(manifest.at("command") == "scan");
  CHECK(manifest.at("failed_cells") == 0);
  CHECK(lines[0] == "# run=" + manifest.at("run_id").get<std::string>());
  CHECK(manifest.at("outputs") == nlohmann::json::array({"grid.csv"}));
  // defaults are materialized
  CHECK(manifest.at("config").contains("delta"));
  CHECK(manifest.at("config").contains("policy"));
}

TEST_CASE("scan validation failures exit with code 2 and name the invariant") {
  const fs::path dir = fresh_dir("badL");
  const CliResult r = run_cli(dir, "scan --L 1 --gamma 1.0");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("L") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "grid.csv"));
}

TEST_CASE("reruns with an identical config are byte-identical") {
  const fs::path a = fresh_dir("det_a");
  const fs::path b = fresh_dir("det_b");
  const std::string args = "scan --L 7 --gamma 0.8 --h-min 0 --h-max 1.0 --h-step 0.02";
  REQUIRE(run_cli(a, args).exit_code == 0);
  REQUIRE(run_cli(b, args).exit_code == 0);
  CHECK(slurp(a / "grid.csv") == slurp(b / "grid.csv"));
  const nlohmann::json ma = nlohmann::json::parse(slurp(a / "manifest.json"));
  const nlohmann::json mb = nlohmann::json::parse(slurp(b / "manifest.json"));
  CHECK(ma.at("run_id") == mb.at("run_id"));
  CHECK(ma.at("config") == mb.at("config"));
}

TEST_CASE("config files fill in flags and flags override the file") {
  const fs::path dir = fresh_dir("cfg");
  {
    std::ofstream cfg(dir / "run.cfg");
    cfg << "# sweep settings\n";
    cfg << "L = 6\n";
    cfg << "h-min = 0\n";
    cfg << "h-max = 1.0\n";
    cfg << "h-step = 0.05\n";
    cfg << "gamma-min = 1.0\n";
    cfg << "gamma-max = 1.0\n";
  }
  const CliResult r = run_cli(dir, "scan --config run.cfg");
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  CHECK(lines_of(slurp(dir / "grid.csv")).size() == 2 + 21);

  const CliResult shorter = run_cli(dir, "scan --config run.cfg --h-max 0.5");
  REQUIRE(shorter.exit_code == 0);
  CHECK(lines_of(slurp(dir / "grid.csv")).size() == 2 + 11);

  {
    std::ofstream cfg(dir / "bad.cfg");
    cfg << "no-such-key = 1\n";
  }
  CHECK(run_cli(dir, "scan --config bad.cfg").exit_code == 2);
}

TEST_CASE("a manifest alone reproduces the run byte for byte") {
  const fs::path a = fresh_dir("mani_a");
  const fs::path b = fresh_dir("mani_b");
  REQUIRE(run_cli(a, "scan --L 6 --gamma 0.5 --h-min 0.2 --h-max 0.8 --h-step 0.04").exit_code ==
          0);
  fs::copy_file(a / "manifest.json", b / "prev_manifest.json");
  REQUIRE(run_cli(b, "scan --from-manifest prev_manifest.json").exit_code == 0);
  CHECK(slurp(a / "grid.csv") == slurp(b / "grid.csv"));
}

TEST_CASE("renyi curves expose the tagged limit rows and cross below the critical field") {
  const fs::path dir = fresh_dir("renyi");
  REQUIRE(run_cli(dir, "renyi --L 8 --gamma 1.0 --h 0.5 --method dense --out a.csv").exit_code ==
          0);
  REQUIRE(run_cli(dir, "renyi --L 8 --gamma 1.0 --h 0.6 --method dense --out b.csv").exit_code ==
          0);
  const auto a = lines_of(slurp(dir / "a.csv"));
  const auto b = lines_of(slurp(dir / "b.csv"));
  REQUIRE(a.size() == 2 + 63);
  CHECK(a[1] == "alpha,S");
  CHECK(a[2].rfind("0+,", 0) == 0);
  CHECK(a.back().rfind("inf,", 0) == 0);
  bool saw_one = false;
  for (const auto& line : a) saw_one = saw_one || line.rfind("1,", 0) == 0;
  CHECK(saw_one);

  // difference of the two curves changes sign across alpha (crossing regime)
  bool pos = false, neg = false;
  for (std::size_t i = 2; i < a.size(); ++i) {
    const double va = std::stod(a[i].substr(a[i].find(',') + 1));
    const double vb = std::stod(b[i].substr(b[i].find(',') + 1));
    pos = pos || va - vb > 1e-10;
    neg = neg || va - vb < -1e-10;
  }
  CHECK(pos);
  CHECK(neg);
}

TEST_CASE("renyi curves above the critical field keep one sign") {
  const fs::path dir = fresh_dir("renyi_high");
  REQUIRE(run_cli(dir, "renyi --L 8 --gamma 1.0 --h 1.3 --method dense --out a.csv").exit_code ==
          0);
  REQUIRE(run_cli(dir, "renyi --L 8 --gamma 1.0 --h 1.32 --method dense --out b.csv").exit_code ==
          0);
  const auto a = lines_of(slurp(dir / "a.csv"));
  const auto b = lines_of(slurp(dir / "b.csv"));
  bool pos = false, neg = false;
  for (std::size_t i = 2; i < a.size(); ++i) {
    const double va = std::stod(a[i].substr(a[i].find(',') + 1));
    const double vb = std::stod(b[i].substr(b[i].find(',') + 1));
    pos = pos || va - vb > 1e-10;
    neg = neg || va - vb < -1e-10;
  }
  CHECK(pos != neg);
}

TEST_CASE("majorization reports the verdicts and the partial-sum profile") {
  const fs::path dir = fresh_dir("major");
  const CliResult r =
      run_cli(dir, "majorization --L 8 --gamma 1.0 --h 1.3 --delta 0.001 --method dense");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("locc: down") != std::string::npos);
  CHECK(r.out.find("elocc: down") != std::string::npos);
  const auto lines = lines_of(slurp(dir / "majorization.csv"));
  REQUIRE(lines.size() == 2 + 4);
  CHECK(lines[1] == "l,f_h,f_h_plus_delta");
  double prev = 0.0;
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const auto first_comma = lines[i].find(',');
    const auto second_comma = lines[i].find(',', first_comma + 1);
    const double f = std::stod(lines[i].substr(first_comma + 1, second_comma - first_comma - 1));
    CHECK(f >= prev - 1e-12);
    prev = f;
  }
  CHECK(prev == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("sign-map emits one row per field point and order") {
  const fs::path dir = fresh_dir("signmap");
  const CliResult r =
      run_cli(dir, "sign-map --L 6 --gamma 1.0 --h-min 1.2 --h-max 1.4 --h-step 0.05");
  REQUIRE(r.exit_code == 0);
  const auto lines = lines_of(slurp(dir / "signmap.csv"));
  REQUIRE(lines.size() == 2 + 5 * 63);
  CHECK(lines[1] == "h,alpha,sign,degenerate");
  for (std::size_t i = 2; i < lines.size(); ++i) {
    const bool ok = lines[i].find(",neg,") != std::string::npos ||
                    lines[i].find(",pos,") != std::string::npos ||
                    lines[i].find(",zero,") != std::string::npos;
    CHECK(ok);
  }
}

TEST_CASE("scaling refuses fewer than four sizes with exit code 2") {
  const fs::path dir = fresh_dir("scaling_few");
  const CliResult r = run_cli(dir, "scaling --gamma 0.8660254037844386 --L-list 8,10,12");
  CHECK(r.exit_code == 2);
  CHECK(r.err.find("4") != std::string::npos);
}

TEST_CASE("scaling over small chains pins the size-independent boundary") {
  const fs::path dir = fresh_dir("scaling_small");
  const CliResult r = run_cli(
      dir,
      "scaling --gamma 0.8660254037844386 --L-list 5,6,7,8 --kind first "
      "--h-min 0.25 --h-max 1.25 --h-step 0.02");
  INFO(r.err);
  REQUIRE(r.exit_code == 0);
  const nlohmann::json fit = nlohmann::json::parse(slurp(dir / "scaling.json"));
  REQUIRE(fit.at("samples").size() == 4);
  for (const auto& s : fit.at("samples"))  // within one grid step of the circle
    CHECK(std::abs(s.at("h_c").get<double>() - 0.5) <= 0.02 + 1e-9);
  CHECK(std::abs(fit.at("h_c_infinity").get<double>() - 0.5) < 0.05);
  CHECK(fit.at("rate").get<double>() > 0.0);
}

TEST_CASE("unknown method values exit with code 2") {
  const fs::path dir = fresh_dir("badmethod");
  CHECK(run_cli(dir, "scan --L 6 --gamma 1.0 --method bogus").exit_code == 2);
}
