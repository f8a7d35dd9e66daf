#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcs/ddm.hpp"

namespace dcs::cli {

std::string method_name(ddm::Method m);
ddm::Method parse_method(const std::string& name);  // throws ConfigError

/// One parameter-sweep specification. Defaults reproduce the benchmark
/// protocol: p from 1.0 to 20.0 in 0.5 increments, q in {1,2,4,8} x {1,10},
/// square layouts {2,4,6,8}, 20x20 cells per subdomain, 50 iterations,
/// seed 0, both methods, eta = 0 and f = 0 (iterate on the error).
struct SweepSpec {
  std::vector<double> p_values;
  std::vector<double> q_values;
  std::vector<int> layouts;  // subdomains per side
  int cells = 20;
  int iterations = 50;
  std::vector<std::uint64_t> seeds;
  std::vector<ddm::Method> methods;
  double eta = 0.0;
  double domain_side = 4.0;
  double source = 0.0;  // constant source term

  void validate() const;
};

SweepSpec default_sweep();

/// One planned run. OSM ignores q, so OSM cells are collapsed to a single
/// run per (layout, p, seed) carrying the sentinel q = 0; the run itself
/// uses q = p for its recorded q-functional.
struct SweepCell {
  ddm::Method method = ddm::Method::Osm;
  int layout = 0;
  double p = 0;
  double q = 0;  // 0 for OSM (collapsed)
  std::uint64_t seed = 0;
};

/// Cells in final table order: (method name, layout, p, q, seed).
std::vector<SweepCell> plan_sweep(const SweepSpec& spec);

struct SweepRow {
  std::string method;
  int layout = 0;
  double p = 0;
  double q = 0;
  std::uint64_t seed = 0;
  double log_ratio = 0;
  double j_p_final = 0;
  double j_q_final = 0;
  bool diverged = false;
  int iters = 0;
  double wall_seconds = 0;  // not part of the CSV schema
};

/// Runs every cell. Coarse spaces are built once per layout and jump
/// systems once per (layout, q), then shared read-only; each run is
/// single-threaded, so results are identical for any worker count.
/// workers <= 0 picks the hardware concurrency.
std::vector<SweepRow> run_sweep(
    const SweepSpec& spec, int workers = 0,
    const std::function<void(std::size_t done, std::size_t total)>& progress =
        {});

/// CSV with header method,layout,p,q,seed,log_ratio,J_p_final,J_q_final,
/// diverged,iters; doubles at 17 significant digits so a reread reproduces
/// them exactly.
void emit_csv(const std::vector<SweepRow>& rows, const std::string& path);
std::vector<SweepRow> read_csv(const std::string& path);

/// One whitespace-separated (p, log_ratio) file per (method, layout, q),
/// sorted by p; diverged rows carry a trailing "diverged" marker. OSM files
/// drop the q suffix. Returns the paths written.
std::vector<std::string> emit_plotdata(const std::vector<SweepRow>& rows,
                                       const std::string& dir);

}  // namespace dcs::cli
