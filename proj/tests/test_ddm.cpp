#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "dcs/ddm.hpp"

using namespace dcs;
using fv::Vector;
using mesh::Edge;
using mesh::Side;

namespace {

ddm::RunConfig base_config(int subs, int cells) {
  ddm::RunConfig cfg;
  cfg.decomposition.domain_side = 4.0;
  cfg.decomposition.subdomains_x = cfg.decomposition.subdomains_y = subs;
  cfg.decomposition.cells_x = cfg.decomposition.cells_y = cells;
  cfg.p = 5.0;
  cfg.q = 5.0;
  cfg.iterations = 10;
  cfg.seed = 0;
  cfg.method = ddm::Method::Osm;
  cfg.init = ddm::Init::Zero;
  return cfg;
}

// State whose fields are the monodomain restriction and whose face data are
// the exact centered traces/fluxes of the global solution: the fixed point.
ddm::IterationState exact_state(const ddm::Driver& driver,
                                const fv::CellField& global) {
  const auto& d = driver.decomposition();
  const int nx = d.spec.cells_x;
  const int ny = d.spec.cells_y;

  ddm::IterationState st = driver.init_state();
  for (const auto& sub : d.subdomains)
    for (int cy = 0; cy < ny; ++cy)
      for (int cx = 0; cx < nx; ++cx)
        st.fields[sub.id].at(cx, cy) =
            global.at(sub.ix * nx + cx, sub.iy * ny + cy);

  for (const auto& itf : d.interfaces) {
    const auto& sub_a = d.subdomains[itf.sub_a];
    for (int f = 0; f < itf.face_count; ++f) {
      // Global cells on either side of face f.
      int gax, gay;
      if (itf.vertical) {
        gax = sub_a.ix * nx + nx - 1;
        gay = sub_a.iy * ny + f;
      } else {
        gax = sub_a.ix * nx + f;
        gay = sub_a.iy * ny + ny - 1;
      }
      const int gbx = itf.vertical ? gax + 1 : gax;
      const int gby = itf.vertical ? gay : gay + 1;
      const double ua = global.at(gax, gay);
      const double ub = global.at(gbx, gby);
      st.faces[itf.id][Side::A].trace[f] = 0.5 * (ua + ub);
      st.faces[itf.id][Side::B].trace[f] = 0.5 * (ua + ub);
      st.faces[itf.id][Side::A].flux[f] = (ub - ua) / d.h;
      st.faces[itf.id][Side::B].flux[f] = (ua - ub) / d.h;
    }
  }
  return st;
}

double state_diff(const ddm::IterationState& a, const ddm::IterationState& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.fields.size(); ++i)
    m = std::max(m, (a.fields[i].v - b.fields[i].v).lpNorm<Eigen::Infinity>());
  return m;
}

}  // namespace

TEST_CASE("config validation") {
  auto cfg = base_config(2, 4);
  cfg.p = -1.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
  cfg.p = 5.0;
  cfg.q = 0.0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("init_state") {
  SUBCASE("zero init gives all-zero face data") {
    ddm::Driver driver(base_config(2, 4));
    const auto st = driver.init_state();
    for (const auto& itf : st.faces)
      for (Side s : {Side::A, Side::B}) {
        CHECK(itf[s].trace.cwiseAbs().maxCoeff() == 0.0);
        CHECK(itf[s].flux.cwiseAbs().maxCoeff() == 0.0);
      }
  }

  SUBCASE("random init is reproducible per seed") {
    auto cfg = base_config(3, 4);
    cfg.init = ddm::Init::RandomRobin;
    cfg.seed = 42;
    ddm::Driver driver(cfg);
    const auto a = driver.init_state();
    const auto b = driver.init_state();
    for (std::size_t k = 0; k < a.faces.size(); ++k)
      for (Side s : {Side::A, Side::B})
        CHECK(a.faces[k][s].flux == b.faces[k][s].flux);

    cfg.seed = 43;
    ddm::Driver other(cfg);
    const auto c = other.init_state();
    double diff = 0;
    for (std::size_t k = 0; k < a.faces.size(); ++k)
      for (Side s : {Side::A, Side::B})
        diff = std::max(
            diff, (a.faces[k][s].flux - c.faces[k][s].flux)
                      .lpNorm<Eigen::Infinity>());
    CHECK(diff > 0.0);
  }
}

TEST_CASE("osm_step keeps the zero state at zero when f = 0") {
  ddm::Driver driver(base_config(2, 4));
  auto st = driver.init_state();
  driver.osm_step(st);
  for (const auto& f : st.fields) CHECK(f.max_abs() == 0.0);
  CHECK(driver.jump_functional(st, 5.0) == 0.0);
}

TEST_CASE("osm_step reproduces the monodomain restriction from exact data") {
  auto cfg = base_config(2, 5);
  cfg.problem.source = [](double x, double y) {
    return std::sin(x) + 0.2 * y;
  };
  cfg.problem.eta = 0.4;
  ddm::Driver driver(cfg);
  const auto& d = driver.decomposition();
  const int gx = d.spec.subdomains_x * d.spec.cells_x;
  const int gy = d.spec.subdomains_y * d.spec.cells_y;
  const auto global = fv::solve_monodomain(
      cfg.problem, gx, gy, d.h,
      fv::sample_source(cfg.problem, gx, gy, d.h, 0.0, 0.0));

  auto st = exact_state(driver, global);
  const auto before = st;
  driver.osm_step(st);
  CHECK(state_diff(st, before) <= 1e-10);
  // At the fixed point both jump functionals vanish.
  CHECK(driver.jump_functional(st, cfg.p) <= 1e-18);
}

TEST_CASE("one osm_step preserves mirror symmetry of mirrored data") {
  // 2x1 layout; mirrored initial data means both subdomains receive the
  // same incoming values (the interface is invariant under the x-mirror).
  ddm::RunConfig cfg;
  cfg.decomposition.subdomains_x = 2;
  cfg.decomposition.subdomains_y = 1;
  cfg.decomposition.cells_x = 4;
  cfg.decomposition.cells_y = 8;
  cfg.p = 3.0;
  ddm::Driver driver(cfg);

  auto st = driver.init_state();
  std::mt19937_64 eng(3);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int f = 0; f < st.faces[0][Side::A].size(); ++f) {
    const double g = dist(eng);
    // Incoming datum g on both sides: store as (0, -g) on the sender slot.
    st.faces[0][Side::A].flux[f] = -g;
    st.faces[0][Side::B].flux[f] = -g;
  }
  driver.osm_step(st);

  const int nx = cfg.decomposition.cells_x;
  double diff = 0;
  for (int cy = 0; cy < cfg.decomposition.cells_y; ++cy)
    for (int cx = 0; cx < nx; ++cx)
      diff = std::max(diff, std::abs(st.fields[0].at(cx, cy) -
                                     st.fields[1].at(nx - 1 - cx, cy)));
  CHECK(diff <= 1e-12);
}

TEST_CASE("jump_functional") {
  SUBCASE("continuous state gives zero; constant example gives 32") {
    ddm::RunConfig cfg;
    cfg.decomposition.subdomains_x = 2;
    cfg.decomposition.subdomains_y = 1;
    cfg.decomposition.cells_x = 10;
    cfg.decomposition.cells_y = 20;
    cfg.q = 2.0;
    cfg.init = ddm::Init::Zero;
    ddm::Driver driver(cfg);
    auto st = driver.init_state();
    CHECK(driver.jump_functional(st, 2.0) == 0.0);

    st.faces[0][Side::A].trace.setOnes();
    CHECK(driver.jump_functional(st, 2.0) == doctest::Approx(32.0));
  }

  SUBCASE("matches the residual norm from the coarse module") {
    auto cfg = base_config(3, 4);
    ddm::Driver driver(cfg);
    auto st = driver.init_state();
    std::mt19937_64 eng(7);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (auto& itf : st.faces)
      for (Side s : {Side::A, Side::B})
        for (int f = 0; f < itf[s].size(); ++f) {
          itf[s].trace[f] = dist(eng);
          itf[s].flux[f] = dist(eng);
        }
    for (double coeff : {1.0, 4.0, 9.0}) {
      const Vector r =
          coarse::jump_residual(st.faces, driver.decomposition(), coeff);
      const double via_residual =
          driver.decomposition().h * r.squaredNorm();
      CHECK(driver.jump_functional(st, coeff) ==
            doctest::Approx(via_residual).epsilon(1e-12));
    }
  }
}

TEST_CASE("error_norms") {
  ddm::Driver driver(base_config(2, 5));
  auto st = driver.init_state();
  auto [inf0, l20] = driver.error_norms(st, nullptr);
  CHECK(inf0 == 0.0);
  CHECK(l20 == 0.0);

  for (auto& f : st.fields) f.v.setOnes();
  auto [inf1, l21] = driver.error_norms(st, nullptr);
  CHECK(inf1 == 1.0);
  CHECK(l21 == doctest::Approx(4.0));  // sqrt(area) on the side-4 square

  // The inf norm does not depend on subdomain traversal order.
  double rev = 0;
  for (auto it = st.fields.rbegin(); it != st.fields.rend(); ++it)
    rev = std::max(rev, it->max_abs());
  CHECK(rev == inf1);
}

TEST_CASE("dcs step: zero state stays zero with zero correction") {
  auto cfg = base_config(2, 4);
  cfg.method = ddm::Method::DcsRjmin;
  ddm::Driver driver(cfg);
  auto st = driver.init_state();
  const auto [j_half, j_full] = driver.dcs_rjmin_step(st);
  CHECK(j_half == 0.0);
  CHECK(j_full == 0.0);
  for (const auto& f : st.fields) CHECK(f.max_abs() == 0.0);
}

TEST_CASE("dcs iterations never worsen J_q and J_p is monotone at q=p") {
  auto cfg = base_config(3, 6);
  cfg.method = ddm::Method::DcsRjmin;
  cfg.init = ddm::Init::RandomRobin;
  cfg.p = cfg.q = 4.0;
  cfg.iterations = 30;
  cfg.seed = 1;
  ddm::Driver driver(cfg);
  const auto res = driver.run();
  REQUIRE(static_cast<int>(res.history.size()) == cfg.iterations + 1);
  CHECK(!res.diverged);

  for (std::size_t n = 1; n < res.history.size(); ++n) {
    const auto& m = res.history[n];
    CHECK(m.j_q <= m.j_q_half * (1.0 + 1e-12) + 1e-300);
    CHECK(m.j_p <= res.history[n - 1].j_p * (1.0 + 1e-10));
  }

  // Telescoped increments stay below J_p^0 / (4p), and the last increment
  // is below the first.
  double sum_sq = 0;
  for (std::size_t n = 1; n < res.history.size(); ++n)
    sum_sq += res.history[n].increment_l2 * res.history[n].increment_l2;
  CHECK(sum_sq <=
        res.history.front().j_p / (4.0 * cfg.p) * (1.0 + 1e-6));
  CHECK(res.history.back().increment_l2 < res.history[1].increment_l2);
}

TEST_CASE("stationarity at the fixed point") {
  auto cfg = base_config(2, 5);
  cfg.problem.source = [](double, double) { return 1.0; };
  cfg.method = ddm::Method::DcsRjmin;
  ddm::Driver driver(cfg);
  const auto& d = driver.decomposition();
  const int gx = d.spec.subdomains_x * d.spec.cells_x;
  const int gy = d.spec.subdomains_y * d.spec.cells_y;
  const auto global = fv::solve_monodomain(
      cfg.problem, gx, gy, d.h,
      fv::sample_source(cfg.problem, gx, gy, d.h, 0.0, 0.0));

  auto st = exact_state(driver, global);
  CHECK(driver.jump_functional(st, cfg.p) <= 1e-18);
  const auto before = st;
  for (int n = 0; n < 3; ++n) driver.dcs_rjmin_step(st);
  CHECK(state_diff(st, before) <= 1e-8);
}

TEST_CASE("single-subdomain decomposition degenerates gracefully") {
  // No interfaces: the coarse space is empty and one local solve already
  // yields the monodomain solution.
  auto cfg = base_config(1, 8);
  cfg.problem.source = [](double, double) { return 1.0; };
  cfg.method = ddm::Method::DcsRjmin;
  cfg.iterations = 2;
  ddm::Driver driver(cfg);
  CHECK(driver.coarse_space()->dim() == 0);
  const auto res = driver.run();
  CHECK(!res.diverged);
  CHECK(res.history.back().err_inf <= 1e-12);
  CHECK(res.history.back().j_p == 0.0);
}

TEST_CASE("run") {
  SUBCASE("zero iterations give a unit ratio") {
    auto cfg = base_config(2, 4);
    cfg.iterations = 0;
    cfg.init = ddm::Init::RandomRobin;
    const auto res = ddm::Driver(cfg).run();
    CHECK(res.history.size() == 1);
    CHECK(res.log_ratio == 0.0);
  }

  SUBCASE("OSM converges to the monodomain solution") {
    auto cfg = base_config(2, 5);
    cfg.problem.source = [](double, double) { return 1.0; };
    cfg.method = ddm::Method::Osm;
    cfg.init = ddm::Init::Zero;
    cfg.p = 5.0;
    cfg.iterations = 300;
    const auto res = ddm::Driver(cfg).run();
    CHECK(res.history.back().err_inf <= 1e-6);
  }

  SUBCASE("metric histories are bit-identical across repeated runs") {
    auto cfg = base_config(3, 5);
    cfg.method = ddm::Method::DcsRjmin;
    cfg.init = ddm::Init::RandomRobin;
    cfg.iterations = 8;
    cfg.seed = 9;
    const auto a = ddm::Driver(cfg).run();
    const auto b = ddm::Driver(cfg).run();
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t n = 0; n < a.history.size(); ++n) {
      CHECK(a.history[n].j_p == b.history[n].j_p);
      CHECK(a.history[n].j_q == b.history[n].j_q);
      CHECK(a.history[n].err_inf == b.history[n].err_inf);
      CHECK(a.history[n].err_l2 == b.history[n].err_l2);
      CHECK(a.history[n].increment_l2 == b.history[n].increment_l2);
    }
  }
}
