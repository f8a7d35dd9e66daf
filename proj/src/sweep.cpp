#include "dcs/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <thread>

#include "dcs/config.hpp"

namespace dcs::cli {

std::string method_name(ddm::Method m) {
  return m == ddm::Method::Osm ? "osm" : "dcs-rjmin";
}

ddm::Method parse_method(const std::string& name) {
  if (name == "osm") return ddm::Method::Osm;
  if (name == "dcs-rjmin") return ddm::Method::DcsRjmin;
  throw ConfigError("unknown method '" + name +
                    "' (expected osm or dcs-rjmin)");
}

SweepSpec default_sweep() {
  SweepSpec s;
  for (int i = 0; i <= 38; ++i) s.p_values.push_back(1.0 + 0.5 * i);
  for (double e : {1.0, 10.0})
    for (double m : {1.0, 2.0, 4.0, 8.0}) s.q_values.push_back(m * e);
  std::sort(s.q_values.begin(), s.q_values.end());
  s.layouts = {2, 4, 6, 8};
  s.cells = 20;
  s.iterations = 50;
  s.seeds = {0};
  s.methods = {ddm::Method::Osm, ddm::Method::DcsRjmin};
  return s;
}

void SweepSpec::validate() const {
  auto nonempty = [](bool ok, const char* key) {
    if (!ok) throw ConfigError(std::string(key) + " must be a non-empty list");
  };
  nonempty(!p_values.empty(), "p");
  nonempty(!q_values.empty(), "q");
  nonempty(!layouts.empty(), "layouts");
  nonempty(!seeds.empty(), "seeds");
  nonempty(!methods.empty(), "methods");
  for (double p : p_values)
    if (!(p > 0)) throw ConfigError("p must be > 0");
  for (double q : q_values)
    if (!(q > 0)) throw ConfigError("q must be > 0");
  for (int l : layouts)
    if (l < 1) throw ConfigError("layouts must be >= 1");
  if (cells < 1) throw ConfigError("cells must be >= 1");
  if (iterations < 0) throw ConfigError("iterations must be >= 0");
  if (eta < 0) throw ConfigError("eta must be >= 0");
  if (!(domain_side > 0)) throw ConfigError("domain_side must be > 0");
}

namespace {

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::vector<SweepCell> plan_sweep(const SweepSpec& spec) {
  spec.validate();
  const auto p_values = sorted_unique(spec.p_values);
  const auto q_values = sorted_unique(spec.q_values);
  const auto layouts = sorted_unique(spec.layouts);
  const auto seeds = sorted_unique(spec.seeds);

  std::vector<std::string> names;
  for (ddm::Method m : spec.methods) names.push_back(method_name(m));
  names = sorted_unique(names);

  std::vector<SweepCell> cells;
  for (const auto& name : names) {
    const ddm::Method method = parse_method(name);
    const std::vector<double> qs =
        method == ddm::Method::Osm ? std::vector<double>{0.0} : q_values;
    for (int layout : layouts)
      for (double p : p_values)
        for (double q : qs)
          for (std::uint64_t seed : seeds)
            cells.push_back({method, layout, p, q, seed});
  }
  return cells;
}

namespace {

ddm::RunConfig cell_config(const SweepSpec& spec, const SweepCell& cell) {
  ddm::RunConfig cfg;
  cfg.decomposition.domain_side = spec.domain_side;
  cfg.decomposition.subdomains_x = cell.layout;
  cfg.decomposition.subdomains_y = cell.layout;
  cfg.decomposition.cells_x = spec.cells;
  cfg.decomposition.cells_y = spec.cells;
  cfg.problem.eta = spec.eta;
  if (spec.source != 0.0) {
    const double value = spec.source;
    cfg.problem.source = [value](double, double) { return value; };
  }
  cfg.p = cell.p;
  cfg.q = cell.method == ddm::Method::Osm ? cell.p : cell.q;
  cfg.iterations = spec.iterations;
  cfg.seed = cell.seed;
  cfg.method = cell.method;
  cfg.init = ddm::Init::RandomRobin;
  return cfg;
}

struct SharedSpaces {
  std::map<int, std::shared_ptr<const coarse::CoarseSpace>> coarse_by_layout;
  std::map<std::pair<int, double>, std::shared_ptr<const coarse::JumpSystem>>
      jump_by_layout_q;
};

SweepRow execute_cell(const SweepSpec& spec, const SweepCell& cell,
                      const SharedSpaces& shared) {
  SweepRow row;
  row.method = method_name(cell.method);
  row.layout = cell.layout;
  row.p = cell.p;
  row.q = cell.q;
  row.seed = cell.seed;
  row.iters = 0;

  const auto t0 = std::chrono::steady_clock::now();
  try {
    std::shared_ptr<const coarse::CoarseSpace> cs;
    std::shared_ptr<const coarse::JumpSystem> js;
    if (cell.method == ddm::Method::DcsRjmin) {
      cs = shared.coarse_by_layout.at(cell.layout);
      js = shared.jump_by_layout_q.at({cell.layout, cell.q});
    }
    ddm::Driver driver(cell_config(spec, cell), cs, js);
    const ddm::RunResult res = driver.run();
    row.log_ratio = res.log_ratio;
    row.j_p_final = res.history.back().j_p;
    row.j_q_final = res.history.back().j_q;
    row.diverged = res.diverged;
    row.iters = res.iterations_run;
  } catch (const fv::SolverError& e) {
    std::fprintf(stderr, "run failed (%s layout=%d p=%g q=%g seed=%llu): %s\n",
                 row.method.c_str(), row.layout, row.p, row.q,
                 static_cast<unsigned long long>(row.seed), e.what());
    const double nan = std::numeric_limits<double>::quiet_NaN();
    row.log_ratio = row.j_p_final = row.j_q_final = nan;
    row.diverged = true;
  }
  row.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return row;
}

}  // namespace

std::vector<SweepRow> run_sweep(
    const SweepSpec& spec, int workers,
    const std::function<void(std::size_t, std::size_t)>& progress) {
  const std::vector<SweepCell> cells = plan_sweep(spec);

  // Shared immutable state, built serially up front.
  SharedSpaces shared;
  const bool needs_coarse =
      std::any_of(cells.begin(), cells.end(), [](const SweepCell& c) {
        return c.method == ddm::Method::DcsRjmin;
      });
  if (needs_coarse) {
    fv::ProblemSpec problem;
    problem.eta = spec.eta;
    for (int layout : sorted_unique(spec.layouts)) {
      mesh::DecompositionSpec dspec;
      dspec.domain_side = spec.domain_side;
      dspec.subdomains_x = dspec.subdomains_y = layout;
      dspec.cells_x = dspec.cells_y = spec.cells;
      const mesh::Decomposition d = mesh::build_decomposition(dspec);
      auto cs = std::make_shared<const coarse::CoarseSpace>(
          coarse::build_coarse_space(problem, d));
      shared.coarse_by_layout[layout] = cs;
      for (double q : sorted_unique(spec.q_values))
        shared.jump_by_layout_q[{layout, q}] =
            std::make_shared<const coarse::JumpSystem>(*cs, d, q);
    }
  }

  std::vector<SweepRow> rows(cells.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;

  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= cells.size()) break;
      rows[i] = execute_cell(spec, cells[i], shared);
      const std::size_t d = ++done;
      if (progress) {
        std::lock_guard<std::mutex> lock(progress_mutex);
        progress(d, cells.size());
      }
    }
  };

  int n = workers > 0 ? workers
                      : static_cast<int>(std::thread::hardware_concurrency());
  n = std::max(1, std::min<int>(n, static_cast<int>(cells.size())));
  if (n == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return rows;
}

namespace {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void emit_csv(const std::vector<SweepRow>& rows, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write CSV to '" + path + "'");
  out << "method,layout,p,q,seed,log_ratio,J_p_final,J_q_final,diverged,"
         "iters\n";
  for (const SweepRow& r : rows) {
    out << r.method << ',' << r.layout << ',' << fmt17(r.p) << ','
        << fmt17(r.q) << ',' << r.seed << ',' << fmt17(r.log_ratio) << ','
        << fmt17(r.j_p_final) << ',' << fmt17(r.j_q_final) << ','
        << (r.diverged ? 1 : 0) << ',' << r.iters << '\n';
  }
  if (!out) throw ConfigError("write failed for '" + path + "'");
}

std::vector<SweepRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read CSV from '" + path + "'");
  std::string line;
  if (!std::getline(in, line))
    throw ConfigError("empty CSV file '" + path + "'");

  std::vector<SweepRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string item;
    std::vector<std::string> fields;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    if (fields.size() != 10)
      throw ConfigError("malformed CSV row: '" + line + "'");
    SweepRow r;
    r.method = fields[0];
    r.layout = std::stoi(fields[1]);
    r.p = std::strtod(fields[2].c_str(), nullptr);
    r.q = std::strtod(fields[3].c_str(), nullptr);
    r.seed = std::stoull(fields[4]);
    r.log_ratio = std::strtod(fields[5].c_str(), nullptr);
    r.j_p_final = std::strtod(fields[6].c_str(), nullptr);
    r.j_q_final = std::strtod(fields[7].c_str(), nullptr);
    r.diverged = std::stoi(fields[8]) != 0;
    r.iters = std::stoi(fields[9]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<std::string> emit_plotdata(const std::vector<SweepRow>& rows,
                                       const std::string& dir) {
  if (rows.empty()) return {};
  std::filesystem::create_directories(dir);

  std::map<std::string, std::vector<const SweepRow*>> groups;
  for (const SweepRow& r : rows) {
    char q_part[48] = "";
    if (r.method != "osm") std::snprintf(q_part, sizeof(q_part), "_q%g", r.q);
    std::ostringstream name;
    name << r.method << "_layout" << r.layout << q_part << ".dat";
    groups[name.str()].push_back(&r);
  }

  std::vector<std::string> written;
  for (auto& [name, group] : groups) {
    std::stable_sort(group.begin(), group.end(),
                     [](const SweepRow* a, const SweepRow* b) {
                       return a->p < b->p;
                     });
    const std::string path = (std::filesystem::path(dir) / name).string();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw ConfigError("cannot write plot data to '" + path + "'");
    for (const SweepRow* r : group) {
      char buf[96];
      std::snprintf(buf, sizeof(buf), "%.12g %.12g", r->p, r->log_ratio);
      out << buf;
      if (r->diverged) out << " diverged";
      out << '\n';
    }
    written.push_back(path);
  }
  return written;
}

}  // namespace dcs::cli
