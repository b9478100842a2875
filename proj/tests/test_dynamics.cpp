#include <doctest.h>

#include <array>
#include <cmath>

#include "core/dynamics.hpp"
#include "core/error.hpp"
#include "core/scaling.hpp"

using namespace fopdg;

namespace {

EngineParams stock_engine() { return make_engine(PhysicalParams{}); }

const LanderState kFlight{1.05, -0.08, 0.25, 3.1e-1, 0.83};
const Costate kCostate{0.61, -0.22, 0.04, 0.35, 0.12};

}  // namespace

TEST_CASE("state rates at surface rest") {
  const EngineParams eng = stock_engine();
  const LanderState x{1.0, 0.0, 0.0, 0.0, 1.0};

  SUBCASE("coasting: pure gravity") {
    const Vec5 dx = dynamics_rhs(x, {0.0, 0.3}, eng);
    CHECK(dx[0] == 0.0);
    CHECK(dx[1] == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(dx[2] == 0.0);
    CHECK(dx[3] == 0.0);
    CHECK(dx[4] == 0.0);
  }

  SUBCASE("full vertical thrust") {
    const double pi2 = 1.57079632679489662;
    const Vec5 dx = dynamics_rhs(x, {1.0, pi2}, eng);
    CHECK(dx[1] == doctest::Approx(eng.tm - 1.0).epsilon(1e-12));
    CHECK(dx[3] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(dx[4] == doctest::Approx(-eng.tm / eng.ve).epsilon(1e-13));
  }
}

TEST_CASE("centrifugal and Coriolis terms") {
  const EngineParams eng = stock_engine();
  const LanderState x{1.2, 0.1, 0.0, 0.5, 0.9};
  const Vec5 dx = dynamics_rhs(x, {0.0, 0.0}, eng);

  CHECK(dx[0] == doctest::Approx(0.1));
  CHECK(dx[1] == doctest::Approx(-1.0 / (1.2 * 1.2) + 1.2 * 0.25).epsilon(1e-13));
  CHECK(dx[2] == doctest::Approx(-0.5));
  CHECK(dx[3] == doctest::Approx(-(2.0 * 0.1 * 0.5) / 1.2).epsilon(1e-13));
}

TEST_CASE("non-finite states are rejected") {
  const EngineParams eng = stock_engine();
  LanderState x = kFlight;
  x.v = std::nan("");
  CHECK_THROWS_AS(dynamics_rhs(x, {0.0, 0.0}, eng), Error);
  try {
    dynamics_rhs(x, {0.0, 0.0}, eng);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_finite);
  }
}

TEST_CASE("costate rates equal the negated Hamiltonian state gradient") {
  const EngineParams eng = stock_engine();
  const ThrustCommand cmd{1.0, 0.7};
  const Vec5 pd = costate_rhs(kFlight, kCostate, cmd, eng);

  const double h = 1e-6;
  std::array<double, 5> xa = kFlight.to_array();
  for (int i = 0; i < 5; ++i) {
    std::array<double, 5> xp = xa, xm = xa;
    xp[static_cast<std::size_t>(i)] += h;
    xm[static_cast<std::size_t>(i)] -= h;
    const double Hp = hamiltonian(LanderState::from_array(xp), kCostate, cmd, eng);
    const double Hm = hamiltonian(LanderState::from_array(xm), kCostate, cmd, eng);
    const double fd = -(Hp - Hm) / (2.0 * h);
    const double scale = std::max(1.0, std::abs(fd));
    CHECK(std::abs(pd[static_cast<std::size_t>(i)] - fd) / scale < 1e-5);
  }
}

TEST_CASE("theta is cyclic so its costate is constant") {
  const EngineParams eng = stock_engine();
  const Vec5 pd = costate_rhs(kFlight, kCostate, {1.0, 0.4}, eng);
  CHECK(pd[2] == 0.0);
}

TEST_CASE("optimal steering minimizes the Hamiltonian over thrust angles") {
  const EngineParams eng = stock_engine();
  const double psi_star = optimal_steering(kFlight, kCostate);
  const double H_star = hamiltonian(kFlight, kCostate, {1.0, psi_star}, eng);

  for (int k = 0; k < 360; ++k) {
    const double psi = -3.14159265358979 + k * (2.0 * 3.14159265358979 / 360.0);
    CHECK(H_star <= hamiltonian(kFlight, kCostate, {1.0, psi}, eng) + 1e-12);
  }
}

TEST_CASE("steering with vanishing primer vector is singular") {
  const Costate p{0.3, 0.0, 0.1, 0.0, 0.0};
  CHECK_THROWS_AS(optimal_steering(kFlight, p), Error);
}

TEST_CASE("switching function and throttle law") {
  const EngineParams eng = stock_engine();
  const double S = switching_function(kFlight, kCostate, eng);

  // S = 1 - (tm/m) N - p_m tm / ve with N = |(p_v, p_omega/r)|
  const double N = std::hypot(kCostate.p_v, kCostate.p_omega / kFlight.r);
  const double S_ref = 1.0 - (eng.tm / kFlight.m) * N - kCostate.p_m * eng.tm / eng.ve;
  CHECK(S == doctest::Approx(S_ref).epsilon(1e-14));

  CHECK(bang_bang_u(-0.3) == 1.0);
  CHECK(bang_bang_u(0.3) == 0.0);
  CHECK(bang_bang_u(0.0) == 1.0);  // thrust on the switching boundary
}

TEST_CASE("smoothed throttle approaches the bang-bang law") {
  CHECK(smoothed_u(0.0, 1e-4) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(smoothed_u(-0.2, 1e-10) == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(smoothed_u(0.2, 1e-10) == doctest::Approx(0.0).epsilon(1e-4));
  // monotone decreasing in S
  CHECK(smoothed_u(-0.1, 1e-2) > smoothed_u(0.1, 1e-2));
}

TEST_CASE("Hamiltonian assembles running cost plus costate-weighted rates") {
  const EngineParams eng = stock_engine();
  const ThrustCommand cmd{1.0, 0.9};
  const Vec5 dx = dynamics_rhs(kFlight, cmd, eng);
  const std::array<double, 5> pa = kCostate.to_array();

  double H_ref = cmd.u;
  for (int i = 0; i < 5; ++i)
    H_ref += pa[static_cast<std::size_t>(i)] * dx[static_cast<std::size_t>(i)];
  CHECK(hamiltonian(kFlight, kCostate, cmd, eng) == doctest::Approx(H_ref).epsilon(1e-14));
}

TEST_CASE("steering norm") {
  const double N = steering_norm(kFlight, kCostate);
  CHECK(N == doctest::Approx(std::hypot(kCostate.p_v, kCostate.p_omega / kFlight.r)).epsilon(1e-14));
}
