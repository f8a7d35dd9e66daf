#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "dcs/config.hpp"
#include "dcs/sweep.hpp"

using namespace dcs;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

cli::SweepSpec tiny_sweep() {
  cli::SweepSpec spec;
  spec.p_values = {1.0, 2.0};
  spec.q_values = {1.0, 2.0};
  spec.layouts = {2};
  spec.cells = 3;
  spec.iterations = 3;
  spec.seeds = {0};
  spec.methods = {ddm::Method::Osm, ddm::Method::DcsRjmin};
  return spec;
}

}  // namespace

TEST_CASE("default sweep reproduces the benchmark protocol") {
  const auto spec = cli::default_sweep();
  REQUIRE(spec.p_values.size() == 39);
  CHECK(spec.p_values.front() == 1.0);
  CHECK(spec.p_values.back() == 20.0);
  CHECK(spec.p_values[1] - spec.p_values[0] == doctest::Approx(0.5));
  CHECK(spec.q_values == std::vector<double>{1, 2, 4, 8, 10, 20, 40, 80});
  CHECK(spec.layouts == std::vector<int>{2, 4, 6, 8});
  CHECK(spec.cells == 20);
  CHECK(spec.iterations == 50);
  CHECK(spec.seeds == std::vector<std::uint64_t>{0});
  CHECK(spec.methods.size() == 2);
  CHECK(spec.eta == 0.0);
  CHECK(spec.domain_side == 4.0);
}

TEST_CASE("plan_sweep counts and collapses OSM over q") {
  const auto cells = cli::plan_sweep(cli::default_sweep());
  std::size_t osm = 0, dcs = 0;
  for (const auto& c : cells) {
    if (c.method == ddm::Method::Osm) {
      ++osm;
      CHECK(c.q == 0.0);
    } else {
      ++dcs;
    }
  }
  CHECK(osm == 39u * 4u);       // p x layouts, q collapsed
  CHECK(dcs == 39u * 8u * 4u);  // p x q x layouts

  cli::SweepSpec single;
  single.p_values = {5.0};
  single.q_values = {40.0};
  single.layouts = {2};
  single.seeds = {0};
  single.methods = {ddm::Method::DcsRjmin};
  CHECK(cli::plan_sweep(single).size() == 1);
}

TEST_CASE("planned cells are in table order") {
  const auto cells = cli::plan_sweep(cli::default_sweep());
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const auto key = [](const cli::SweepCell& c) {
      return std::make_tuple(cli::method_name(c.method), c.layout, c.p, c.q,
                             c.seed);
    };
    CHECK(key(cells[i - 1]) < key(cells[i]));
  }
}

TEST_CASE("number list parsing") {
  CHECK(cli::parse_number_list("5", "p") == std::vector<double>{5.0});
  CHECK(cli::parse_number_list("1,2.5,4", "p") ==
        std::vector<double>{1.0, 2.5, 4.0});
  const auto range = cli::parse_number_list("1:20:0.5", "p");
  CHECK(range.size() == 39);
  CHECK(range.back() == doctest::Approx(20.0));
  CHECK_THROWS_AS(cli::parse_number_list("1:2:0", "p"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_number_list("abc", "p"), cli::ConfigError);
  CHECK_THROWS_AS(cli::parse_number_list("1,,2", "p"), cli::ConfigError);
}

TEST_CASE("parse_config single run from flags") {
  cli::CliOptions opts;
  opts.p = "5";
  opts.q = "5";
  opts.layout = "4";
  const auto parsed = cli::parse_config(opts);
  CHECK(!parsed.sweep);
  CHECK(parsed.run.p == 5.0);
  CHECK(parsed.run.q == 5.0);
  CHECK(parsed.run.decomposition.subdomains_x == 4);
  CHECK(parsed.run.decomposition.cells_x == 20);
}

TEST_CASE("negative p is rejected with the offending key named") {
  cli::CliOptions opts;
  opts.p = "-1";
  try {
    cli::parse_config(opts);
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    CHECK(std::string(e.what()).find("p") != std::string::npos);
  }
}

TEST_CASE("empty config file yields the default sweep") {
  const auto path = temp_file("dcs_empty_config.ini");
  std::ofstream(path.string()) << "\n";
  cli::CliOptions opts;
  opts.config_path = path.string();
  const auto parsed = cli::parse_config(opts);
  CHECK(parsed.sweep);
  CHECK(parsed.sweep_spec.p_values.size() == 39);
  CHECK(parsed.sweep_spec.q_values.size() == 8);
  CHECK(parsed.sweep_spec.layouts.size() == 4);
  fs::remove(path);
}

TEST_CASE("config file keys are applied and unknown keys rejected") {
  const auto path = temp_file("dcs_config.ini");
  {
    std::ofstream out(path.string());
    out << "# comment\n"
        << "[problem]\n"
        << "eta = 1.5\n"
        << "[sweep]\n"
        << "p = 2,3\n"
        << "q = 10\n"
        << "layouts = 2\n"
        << "cells = 4\n"
        << "iterations = 7\n"
        << "seeds = 2\n"
        << "methods = dcs-rjmin\n";
  }
  cli::CliOptions opts;
  opts.config_path = path.string();
  auto parsed = cli::parse_config(opts);
  CHECK(parsed.sweep_spec.eta == 1.5);
  CHECK(parsed.sweep_spec.p_values == std::vector<double>{2.0, 3.0});
  CHECK(parsed.sweep_spec.seeds == std::vector<std::uint64_t>{0, 1});
  CHECK(parsed.sweep_spec.methods.size() == 1);

  // Flags override the file.
  opts.p = "9";
  parsed = cli::parse_config(opts);
  CHECK(parsed.sweep_spec.p_values == std::vector<double>{9.0});

  {
    std::ofstream out(path.string());
    out << "[sweep]\nunknown_key = 3\n";
  }
  cli::CliOptions bad;
  bad.config_path = path.string();
  try {
    cli::parse_config(bad);
    FAIL("expected ConfigError");
  } catch (const cli::ConfigError& e) {
    CHECK(std::string(e.what()).find("unknown_key") != std::string::npos);
  }
  fs::remove(path);
}

TEST_CASE("sweep execution is deterministic and worker-count independent") {
  const auto spec = tiny_sweep();
  const auto rows1 = cli::run_sweep(spec, 1);
  const auto rows2 = cli::run_sweep(spec, 2);
  const auto rows3 = cli::run_sweep(spec, 1);
  REQUIRE(rows1.size() == 6);  // 2 OSM + 4 DCS
  REQUIRE(rows2.size() == rows1.size());
  for (std::size_t i = 0; i < rows1.size(); ++i) {
    CHECK(rows1[i].method == rows2[i].method);
    CHECK(rows1[i].log_ratio == rows2[i].log_ratio);
    CHECK(rows1[i].j_p_final == rows2[i].j_p_final);
    CHECK(rows1[i].j_q_final == rows2[i].j_q_final);
    CHECK(rows1[i].log_ratio == rows3[i].log_ratio);
    CHECK(rows1[i].diverged == rows2[i].diverged);
  }
}

TEST_CASE("csv emission and exact round trip") {
  const auto path = temp_file("dcs_rows.csv");

  SUBCASE("empty table emits the header only") {
    cli::emit_csv({}, path.string());
    std::ifstream in(path.string());
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line ==
          "method,layout,p,q,seed,log_ratio,J_p_final,J_q_final,diverged,"
          "iters");
    CHECK(!std::getline(in, line));
  }

  SUBCASE("one row emits two lines and round-trips exactly") {
    cli::SweepRow row;
    row.method = "dcs-rjmin";
    row.layout = 4;
    row.p = 1.5;
    row.q = 0.1 + 0.2;  // not exactly representable in short decimal
    row.seed = 3;
    row.log_ratio = -7.123456789012345678;
    row.j_p_final = 1.0 / 3.0;
    row.j_q_final = 2.0 / 7.0;
    row.diverged = false;
    row.iters = 50;
    cli::emit_csv({row}, path.string());

    std::ifstream in(path.string());
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) ++lines;
    CHECK(lines == 2);

    const auto rows = cli::read_csv(path.string());
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].method == row.method);
    CHECK(rows[0].layout == row.layout);
    CHECK(rows[0].p == row.p);
    CHECK(rows[0].q == row.q);
    CHECK(rows[0].seed == row.seed);
    CHECK(rows[0].log_ratio == row.log_ratio);
    CHECK(rows[0].j_p_final == row.j_p_final);
    CHECK(rows[0].j_q_final == row.j_q_final);
    CHECK(rows[0].diverged == row.diverged);
    CHECK(rows[0].iters == row.iters);
  }

  fs::remove(path);
}

TEST_CASE("plot data files") {
  const auto dir = temp_file("dcs_plotdata");
  fs::remove_all(dir);

  SUBCASE("empty table writes nothing") {
    CHECK(cli::emit_plotdata({}, dir.string()).empty());
  }

  SUBCASE("one file per (method, layout, q), sorted by p, with markers") {
    std::vector<cli::SweepRow> rows;
    for (double p : {3.0, 1.0, 2.0}) {
      cli::SweepRow r;
      r.method = "dcs-rjmin";
      r.layout = 4;
      r.p = p;
      r.q = 40.0;
      r.log_ratio = -p;
      r.diverged = (p == 2.0);
      rows.push_back(r);
    }
    cli::SweepRow osm;
    osm.method = "osm";
    osm.layout = 4;
    osm.p = 1.0;
    osm.q = 0.0;
    osm.log_ratio = -0.5;
    rows.push_back(osm);

    const auto files = cli::emit_plotdata(rows, dir.string());
    REQUIRE(files.size() == 2);

    std::ifstream in(
        (fs::path(dir) / "dcs-rjmin_layout4_q40.dat").string());
    REQUIRE(in.good());
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    CHECK(l1 == "1 -1");
    CHECK(l2 == "2 -2 diverged");
    CHECK(l3 == "3 -3");

    CHECK(fs::exists(fs::path(dir) / "osm_layout4.dat"));
  }

  fs::remove_all(dir);
}
