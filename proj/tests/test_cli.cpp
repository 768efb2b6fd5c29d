#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "tempered/csv.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = TEMPERED_CLI_PATH;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " > /dev/null 2>&1";
  const int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("tempered_cli_" + tag);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("simulate preset row accounting and manifest") {
  TempDir dir("simulate");
  const std::string out = (dir.path / "run").string();
  const int rc = run("simulate --preset fig2 --reps 2 --n_values 30,60 --seed 7 --out " + out);
  REQUIRE(rc == 0);

  const tempered::CsvTable t = tempered::read_csv_file(out + "/alpha_samples.csv");
  // 2 methods x 2 n-values x 2 reps (misspecified only)
  CHECK(t.rows.size() == 8);
  CHECK(t.header[0] == "n");

  const std::string manifest = slurp(out + "/manifest.json");
  CHECK(manifest.find("\"config_digest\"") != std::string::npos);
  CHECK(manifest.find("\"artifact_version\"") != std::string::npos);
  CHECK(manifest.find("alpha_samples.csv") != std::string::npos);
  CHECK(fs::exists(out + "/alpha_histograms.svg"));
}

TEST_CASE("rates produces one row per method and spec") {
  TempDir dir("rates");
  const std::string sim = (dir.path / "sim").string();
  REQUIRE(run("simulate --methods loocv,safebayes --spec both --n_values 40,80 --reps 3 --seed 3 "
              "--out " + sim) == 0);
  const std::string out = (dir.path / "rates").string();
  REQUIRE(run("rates --input " + sim + "/alpha_samples.csv --out " + out) == 0);
  const tempered::CsvTable t = tempered::read_csv_file(out + "/rates.csv");
  CHECK(t.rows.size() == 4);  // 2 methods x 2 specs
}

TEST_CASE("simulate is byte-reproducible and plot is deterministic") {
  TempDir dir("repro");
  const std::string a = (dir.path / "a").string();
  const std::string b = (dir.path / "b").string();
  const std::string args = "simulate --methods loocv --spec misspecified --n_values 40 --reps 3 "
                           "--seed 11 --out ";
  REQUIRE(run(args + a) == 0);
  REQUIRE(run(args + b) == 0);
  CHECK(slurp(a + "/alpha_samples.csv") == slurp(b + "/alpha_samples.csv"));

  const std::string pa = (dir.path / "pa").string();
  const std::string pb = (dir.path / "pb").string();
  REQUIRE(run("plot --input " + a + "/alpha_samples.csv --kind histogram_grid --output h.svg "
              "--out " + pa) == 0);
  REQUIRE(run("plot --input " + a + "/alpha_samples.csv --kind histogram_grid --output h.svg "
              "--out " + pb) == 0);
  CHECK(slurp(pa + "/h.svg") == slurp(pb + "/h.svg"));
}

TEST_CASE("tune runs on a csv dataset") {
  TempDir dir("tune");
  const fs::path data = dir.path / "data.csv";
  {
    std::ofstream f(data);
    f << "y,x1,x2\n";
    for (int i = 0; i < 40; ++i) {
      const double x1 = 0.1 * i - 2.0;
      const double x2 = (i % 7) - 3.0;
      f << 0.5 * x1 - 0.2 * x2 + ((i % 5) - 2) * 0.1 << "," << x1 << "," << x2 << "\n";
    }
  }
  const std::string out = (dir.path / "run").string();
  REQUIRE(run("tune --data " + data.string() + " --response y --method loocv --seed 2 --out " +
              out) == 0);
  const std::string json = slurp(out + "/tuning_result.json");
  CHECK(json.find("\"alpha_hat\"") != std::string::npos);
  CHECK(json.find("\"curve\"") != std::string::npos);

  // the table5 preset switches to the simulation grid (lambda up to 30)
  const std::string out5 = (dir.path / "run5").string();
  REQUIRE(run("tune --data " + data.string() + " --response y --method loocv --preset table5 "
              "--seed 2 --out " + out5) == 0);
  const std::string json5 = slurp(out5 + "/tuning_result.json");
  CHECK(json5.find("[30,") != std::string::npos);       // grid upper endpoint
  CHECK(json.find("[0.5,") != std::string::npos);       // data-grid upper endpoint
}

TEST_CASE("error exit codes") {
  TempDir dir("errors");
  const std::string out = (dir.path / "x").string();
  CHECK(run("tune --method nope --data missing.csv --out " + out) == 2);      // bad config
  CHECK(run("tune --method loocv --data /does/not/exist.csv --out " + out) == 3);  // data error
  CHECK(run("plot --input /does/not/exist.csv --kind loglog_fit --out " + out) == 3);
  CHECK(run("nonsense-subcommand") == 2);
}

TEST_CASE("subsample runs on a cps-shaped csv") {
  TempDir dir("subsample");
  const fs::path data = dir.path / "wages.csv";
  {
    std::ofstream f(data);
    f << "wage,education,experience,ethnicity\n";
    unsigned state = 12345;
    auto next = [&state] {
      state = state * 1103515245u + 12345u;
      return (state >> 16) % 1000 / 1000.0;
    };
    for (int i = 0; i < 300; ++i) {
      const double edu = 8.0 + 8.0 * next();
      const double exp_y = 30.0 * next();
      const double eth = next() < 0.25 ? 1.0 : 0.0;
      const double wage = std::exp(1.0 + 0.07 * edu + 0.02 * exp_y - 0.0004 * exp_y * exp_y -
                                   0.15 * eth + 0.3 * (next() - 0.5));
      f << wage << "," << edu << "," << exp_y << "," << eth << "\n";
    }
  }
  const std::string out = (dir.path / "run").string();
  REQUIRE(run("subsample --data " + data.string() + " --model full --sizes 80,160 --reps 2 "
              "--methods safebayes,loocv --seed 9 --out " + out) == 0);
  const tempered::CsvTable t = tempered::read_csv_file(out + "/alpha_samples.csv");
  CHECK(t.rows.size() == 8);  // 2 sizes x 2 reps x 2 methods
  CHECK(fs::exists(out + "/rates.csv"));

  // oversized subsample is a data error
  CHECK(run("subsample --data " + data.string() + " --model full --sizes 5000 --reps 1 "
            "--methods loocv --out " + (dir.path / "big").string()) == 3);
}

TEST_CASE("figure4 closed form and conjugate subcommands") {
  TempDir dir("fig");
  const std::string out = (dir.path / "fig5").string();
  REQUIRE(run("figure4 --closed_form true --n-grid 100,1000 --reps 5 --seed 4 --out " + out) == 0);
  const tempered::CsvTable t = tempered::read_csv_file(out + "/threshold.csv");
  CHECK(t.rows.size() == 6);  // 2 n x 3 schedules
  const std::string svg = slurp(out + "/threshold.svg");
  CHECK(svg.find("mean_sq_scaled_diff_mle") != std::string::npos);
  CHECK(svg.find("mean_sq_scaled_diff_truth") != std::string::npos);  // second panel

  const std::string cout_dir = (dir.path / "conj").string();
  REQUIRE(run("conjugate --family gauss-gauss --alpha0 1 --theta_star 1 --n-grid 100,400 "
              "--reps 3 --seed 5 --out " + cout_dir) == 0);
  const tempered::CsvTable c = tempered::read_csv_file(cout_dir + "/conjugate_report.csv");
  CHECK(c.rows.size() == 6);  // 2 n x 3 reps
  CHECK(c.header == std::vector<std::string>{"n", "cf_gap", "tv_to_gaussian"});
}

TEST_CASE("theorem3 and metric subcommands") {
  TempDir dir("misc");
  const std::string out = (dir.path / "t3").string();
  REQUIRE(run("theorem3 --n_grid 100,1000 --p 2 --seed 5 --out " + out) == 0);
  const tempered::CsvTable t = tempered::read_csv_file(out + "/theorem3.csv");
  CHECK(t.rows.size() >= 6);

  const std::string mout = (dir.path / "metric").string();
  REQUIRE(run("metric --kind tv --a.kind gaussian --a.mean 0 --a.var 1 "
              "--b.kind gaussian --b.mean 1 --b.var 1 --out " + mout) == 0);
  const tempered::CsvTable m = tempered::read_csv_file(mout + "/metric.csv");
  REQUIRE(m.rows.size() == 1);
  const double tv = tempered::parse_double(m.rows[0][2]);
  CHECK(tv > 0.38);
  CHECK(tv < 0.39);
}
