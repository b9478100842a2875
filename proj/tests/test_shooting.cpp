#include <doctest.h>

#include <cmath>

#include "core/config.hpp"
#include "core/dynamics.hpp"
#include "core/extremal.hpp"
#include "core/scaling.hpp"
#include "core/shooting.hpp"

using namespace fopdg;

namespace {

const Quadruple kDemo{0.753, -0.238, 0.019, 0.361};

}  // namespace

TEST_CASE("residual vanishes on a backward-generated extremal") {
  const Config cfg;
  const EngineParams eng = make_engine(cfg.phys);
  const WarmStart ws = backward_point(kDemo, 0.3, eng, cfg.gen);

  ShootingUnknowns z;
  z.p0 = ws.p0;
  z.tf = ws.tf;
  const ShootingResidual res = shooting_residual(ws.x, z, 1e-10, eng);
  for (double c : res) CHECK(std::abs(c) < 1e-6);
}

TEST_CASE("warm-started solve converges with optimality certificates") {
  const Config cfg;
  const EngineParams eng = make_engine(cfg.phys);
  const WarmStart ws = backward_point(kDemo, 0.45, eng, cfg.gen);

  // perturb the warm start so the solver has real work to do
  ShootingUnknowns z0;
  z0.p0 = ws.p0;
  z0.tf = ws.tf * 1.05;
  z0.p0.p_r *= 1.03;
  z0.p0.p_v *= 0.95;

  const ShootingSolution sol = solve_shooting(ws.x, z0, eng, cfg.oracle);
  REQUIRE(sol.converged);
  CHECK(sol.res_norm < 1e-8);
  CHECK(sol.z.tf == doctest::Approx(0.45).epsilon(5e-3));

  SUBCASE("homotopy staged the smoothing constant downward") {
    REQUIRE(sol.stages.size() >= 2);
    for (std::size_t i = 1; i < sol.stages.size(); ++i)
      CHECK(sol.stages[i].delta < sol.stages[i - 1].delta);
    CHECK(sol.stages.back().converged);
  }

  SUBCASE("reconstruction satisfies the transversality conditions") {
    CHECK(std::abs(sol.pm_tf) < 1e-8);
    CHECK(sol.max_abs_H < 1e-6);
    CHECK(sol.fuel_bar > 0.0);
    CHECK(std::abs(sol.x_final.r - 1.0) < 1e-6);
    CHECK(std::abs(sol.x_final.v) < 1e-6);
    CHECK(std::abs(sol.x_final.omega) < 1e-6);
    CHECK(!sol.records.empty());
  }

  SUBCASE("recovered fuel matches the backward mass profile") {
    // the backward run burned from m_bar0 up to the flight mass
    const double m_flight = ws.x.m;
    CHECK(sol.fuel_bar == doctest::Approx(m_flight - sol.x_final.m).epsilon(1e-6));
  }
}

TEST_CASE("bank seeding lands near the truth") {
  const Config cfg;
  const EngineParams eng = make_engine(cfg.phys);
  const WarmStart ws = backward_point(kDemo, 0.35, eng, cfg.gen);

  const ShootingUnknowns z = seed_from_bank(ws.x, cfg, 99, 40);
  CHECK(std::isfinite(z.tf));
  CHECK(z.tf > 0.0);
  CHECK(z.tf < 1.0);
  CHECK(std::isfinite(z.p0.p_r));
  CHECK(std::isfinite(z.p0.p_v));

  // the seed must be good enough for the solver
  const ShootingSolution sol = solve_shooting(ws.x, z, eng, cfg.oracle);
  CHECK(sol.converged);
}

TEST_CASE("cold start heuristic is finite and positive in time") {
  const Config cfg;
  const EngineParams eng = make_engine(cfg.phys);
  const LanderState x0{1.06, -0.07, 0.4, 0.25, 0.82};
  const ShootingUnknowns z = cold_start(x0, eng);
  CHECK(std::isfinite(z.p0.p_r));
  CHECK(std::isfinite(z.p0.p_v));
  CHECK(std::isfinite(z.p0.p_theta));
  CHECK(std::isfinite(z.p0.p_omega));
  CHECK(z.tf > 0.0);
}

TEST_CASE("hopeless solves report non-convergence without throwing") {
  Config cfg;
  cfg.oracle.max_iter = 2;
  cfg.oracle.delta_start = 1e-2;
  cfg.oracle.delta_end = 1e-2;  // single starved stage
  const EngineParams eng = make_engine(cfg.phys);

  const LanderState x0{1.07, -0.05, 0.5, 0.3, 0.9};
  ShootingUnknowns z0;
  z0.p0 = Costate{5.0, 5.0, 5.0, 5.0, 0.0};  // far from any root
  z0.tf = 0.5;

  const ShootingSolution sol = solve_shooting(x0, z0, eng, cfg.oracle);
  CHECK(!sol.converged);
  CHECK(!sol.stages.empty());
  CHECK(sol.records.empty());  // no reconstruction on failure
}

TEST_CASE("backward point reproduces the touchdown limit") {
  const Config cfg;
  const EngineParams eng = make_engine(cfg.phys);
  const WarmStart ws = backward_point(kDemo, 0.0, eng, cfg.gen);
  CHECK(ws.x.r == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(ws.x.v) < 1e-12);
  CHECK(ws.tf == 0.0);
}
