// Drives the bcmf executable end to end on a 50-row toy dataset.

#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

#include "bcmf/io/table.hpp"
#include "bcmf/random.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& workdir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "bcmf_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string at(const std::string& name) { return (workdir() / name).string(); }

int run(const std::string& args) {
  const std::string cmd = "BCMF_LOG_LEVEL=error " + std::string(BCMF_CLI_PATH) + " " + args + " 2>" +
                          at("stderr.txt") + " >/dev/null";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

// Hand type-7 quantile.
double quantile7(std::vector<double> v, double p) {
  std::sort(v.begin(), v.end());
  const double h = static_cast<double>(v.size() - 1) * p;
  const auto lo = static_cast<std::size_t>(h);
  if (lo + 1 >= v.size()) return v.back();
  return v[lo] + (h - static_cast<double>(lo)) * (v[lo + 1] - v[lo]);
}

void make_inputs() {
  static bool done = false;
  if (done) return;
  bcmf::Rng rng(21);
  std::string text = "y,a,m,x1,x2,grp\n";
  const char* groups[3] = {"b", "a", "c"};
  for (int i = 0; i < 50; ++i) {
    const double x1 = rng.normal(), x2 = rng.uniform();
    const int a = i % 2;
    const double m = 0.3 * x1 + 0.5 * a + rng.normal();
    const double y = x1 + 0.4 * a + 0.3 * m + rng.normal();
    text += bcmf::io::format_double(y) + "," + std::to_string(a) + "," + bcmf::io::format_double(m) + "," +
            bcmf::io::format_double(x1) + "," + bcmf::io::format_double(x2) + "," + groups[i % 3] + "\n";
  }
  write_text(at("toy.csv"), text);
  write_text(at("cfg.yaml"), R"(data:
  outcome: y
  treatment: a
  mediator: m
  categorical: [grp]
model:
  burn_in: 40
  n_samples: 30
  chains: 2
  store_forests: true
  forests:
    mu: {trees: 20}
    mu_m: {trees: 20}
  auxiliary: {trees: 10, burn_in: 30, n_samples: 30}
summary:
  cart: {max_depth: 2, min_leaf: 5}
  gam: {knots: 4}
  grid_points: 10
)");
  write_text(at("sim.yaml"), R"(study:
  truths: [{kind: sparse-linear}]
  n_train: 60
  n_test: 20
  replications: 2
  bootstrap: 100
  model:
    burn_in: 20
    n_samples: 20
    forests: {mu: {trees: 20}, mu_m: {trees: 20}}
    auxiliary: {trees: 10, burn_in: 20, n_samples: 20}
)");
  REQUIRE(run("fit --data " + at("toy.csv") + " --config " + at("cfg.yaml") + " --out " + at("d1.bin") +
              " --seed 9") == 0);
  REQUIRE(run("effects --draws " + at("d1.bin") + " --out " + at("eff")) == 0);
  done = true;
}

}  // namespace

TEST_CASE("fit then effects on a toy dataset yields a draws x rows effects table") {
  make_inputs();
  const auto table = bcmf::io::read_table(at("eff/effect_draws.csv"));
  CHECK(table.rows.size() == 60 * 50);  // 2 chains x 30 kept draws, 50 rows
  CHECK(table.rows.back()[1] == "1");   // chain of the last draw
  CHECK(fs::exists(at("d1.bin.summary.txt")));
}

TEST_CASE("same seed gives byte-identical draws and effects files") {
  make_inputs();
  REQUIRE(run("fit --data " + at("toy.csv") + " --config " + at("cfg.yaml") + " --out " + at("d2.bin") +
              " --seed 9") == 0);
  CHECK(slurp(at("d1.bin")) == slurp(at("d2.bin")));
  REQUIRE(run("effects --draws " + at("d2.bin") + " --out " + at("eff2")) == 0);
  for (const char* f : {"effect_draws.csv", "row_summary.csv", "average_draws.csv", "average_summary.csv"}) {
    CHECK(slurp(at("eff/") + f) == slurp(at("eff2/") + f));
  }
  REQUIRE(run("fit --data " + at("toy.csv") + " --config " + at("cfg.yaml") + " --out " + at("d3.bin") +
              " --seed 10") == 0);
  CHECK(slurp(at("d1.bin")) != slurp(at("d3.bin")));
}

TEST_CASE("exported quantiles match an independent recomputation") {
  make_inputs();
  const auto draws = bcmf::io::read_table(at("eff/effect_draws.csv"));
  std::map<std::pair<std::string, std::string>, std::vector<double>> cols;
  const char* names[3] = {"zeta", "delta", "tau"};
  for (const auto& r : draws.rows) {
    for (int k = 0; k < 3; ++k) cols[{r[2], names[k]}].push_back(std::stod(r[3 + k]));
  }
  const auto summary = bcmf::io::read_table(at("eff/row_summary.csv"));
  REQUIRE(summary.rows.size() == 150);
  double worst = 0.0;
  for (const auto& r : summary.rows) {
    const auto& v = cols.at({r[0], r[1]});
    worst = std::max(worst, std::abs(std::stod(r[4]) - quantile7(v, 0.025)));
    worst = std::max(worst, std::abs(std::stod(r[5]) - quantile7(v, 0.975)));
  }
  CHECK(worst <= 1e-12);

  const auto avg = bcmf::io::read_table(at("eff/average_draws.csv"));
  std::vector<double> delta_bar;
  for (const auto& r : avg.rows) delta_bar.push_back(std::stod(r[2]));
  const auto avg_summary = bcmf::io::read_table(at("eff/average_summary.csv"));
  REQUIRE(avg_summary.rows[1][0] == "delta_bar");
  CHECK(std::abs(std::stod(avg_summary.rows[1][4]) - quantile7(delta_bar, 0.025)) <= 1e-12);
  CHECK(std::abs(std::stod(avg_summary.rows[1][5]) - quantile7(delta_bar, 0.975)) <= 1e-12);
}

TEST_CASE("new-data effects at the training rows reproduce the in-sample effects") {
  make_inputs();
  REQUIRE(run("effects --draws " + at("d1.bin") + " --out " + at("eff_new") + " --newdata " + at("toy.csv")) == 0);
  CHECK(slurp(at("eff/row_summary.csv")) == slurp(at("eff_new/row_summary.csv")));
}

TEST_CASE("summarize writes tree, component and R^2 outputs") {
  make_inputs();
  REQUIRE(run("summarize --effects " + at("eff") + " --covariates " + at("toy.csv") + " --config " + at("cfg.yaml") +
              " --method cart --out " + at("sum_cart")) == 0);
  CHECK(slurp(at("sum_cart/tree.txt")).find("leaf") != std::string::npos);
  CHECK(bcmf::io::read_table(at("sum_cart/r2_draws.csv")).rows.size() == 60);
  CHECK(bcmf::io::read_table(at("sum_cart/rules.csv")).rows.size() >= 1);
  REQUIRE(run("summarize --effects " + at("eff") + " --covariates " + at("toy.csv") + " --config " + at("cfg.yaml") +
              " --method gam --out " + at("sum_gam")) == 0);
  // x1, x2 and three grp levels on a 10-point grid (binary columns use their two levels).
  CHECK(bcmf::io::read_table(at("sum_gam/components.csv")).rows.size() >= 20);
}

TEST_CASE("simulate writes a labeled report and is reproducible") {
  make_inputs();
  REQUIRE(run("simulate --config " + at("sim.yaml") + " --out " + at("sim1") + " --seed 3") == 0);
  REQUIRE(run("simulate --config " + at("sim.yaml") + " --out " + at("sim2") + " --seed 3") == 0);
  CHECK(slurp(at("sim1/report.txt")).find("desk-scale analogue") != std::string::npos);
  for (const char* f : {"records.csv", "aggregates.csv", "held_out.csv", "failures.csv", "report.txt"}) {
    CHECK(slurp(at("sim1/") + f) == slurp(at("sim2/") + f));
  }
}

TEST_CASE("exit codes distinguish usage, data and runtime failures") {
  make_inputs();
  CHECK(run("") == 1);
  CHECK(run("fit --data " + at("toy.csv")) == 1);
  CHECK(run("summarize --effects x --covariates y --method lasso --out z") == 1);

  write_text(at("typo.yaml"), "data: {outcome: y, treatment: a, mediator: m}\nmodel: {burnin: 5}\n");
  CHECK(run("fit --data " + at("toy.csv") + " --config " + at("typo.yaml") + " --out " + at("t.bin") + " --seed 1") ==
        1);
  CHECK(slurp(at("stderr.txt")).find("model.burnin") != std::string::npos);

  std::string bad = slurp(at("toy.csv"));
  std::vector<std::string> lines;
  std::stringstream ss(bad);
  for (std::string l; std::getline(ss, l);) lines.push_back(l);
  lines[7] = "0.5,2,0.1,0.2,0.3,a";  // data row 7
  std::string joined;
  for (const auto& l : lines) joined += l + "\n";
  write_text(at("bad.csv"), joined);
  CHECK(run("fit --data " + at("bad.csv") + " --config " + at("cfg.yaml") + " --out " + at("bad.bin") +
            " --seed 1") == 2);
  CHECK(slurp(at("stderr.txt")).find("row 7") != std::string::npos);
  CHECK_FALSE(fs::exists(at("bad.bin")));

  std::string v2 = slurp(at("d1.bin"));
  v2[8] = 2;
  std::ofstream(at("v2.bin"), std::ios::binary) << v2;
  CHECK(run("effects --draws " + at("v2.bin") + " --out " + at("eff_v2")) == 2);
  CHECK(slurp(at("stderr.txt")).find("version") != std::string::npos);
  CHECK_FALSE(fs::exists(at("eff_v2")));

  // Output directory path occupied by a file: runtime failure, nothing written.
  write_text(at("occupied"), "x");
  CHECK(run("effects --draws " + at("d1.bin") + " --out " + at("occupied")) == 3);
}
