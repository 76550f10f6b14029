#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "roadheat/oracles.hpp"
#include "roadheat/thermal.hpp"

#include <cmath>
#include <random>

using namespace roadheat;

namespace {
const ThermalParams kParams;  // table defaults: q_r = 0, gamma = 1.04, C = 18, ...
}

TEST_CASE("cable surface stays at zero without forcing") {
  ThermalState st = ThermalState::initial(4, kParams, 5);
  const ArrayXd gamma = ArrayXd::Zero(4);
  for (int i = 0; i < 100; ++i) step_cable_surface(st, gamma, kParams, 30.0);
  CHECK(st.surf_diff.abs().maxCoeff() == 0.0);
}

TEST_CASE("cable surface reaches the analytic steady state") {
  ThermalState st = ThermalState::initial(1, kParams, 5);
  const double gamma_w_per_m = 250.0;
  const ArrayXd gamma = ArrayXd::Constant(1, gamma_w_per_m);
  for (int i = 0; i < 10000; ++i) step_cable_surface(st, gamma, kParams, 30.0);
  const double steady = (gamma_w_per_m * 1e-2 - kParams.radiative_cooling_w_per_cm) /
                        kParams.cable_contact_w_per_m_k;
  CHECK(std::abs(st.surf_diff(0) - steady) <= 1e-9);
}

TEST_CASE("one 30 s step matches the closed-form exponential") {
  ThermalState st = ThermalState::initial(1, kParams, 5);
  st.surf_diff(0) = 0.0;
  // 100 p.u. of loss density converted at W_base / L_f = 100 W/m per p.u.
  const double gamma_w_per_m = 100.0 * 100.0;
  step_cable_surface(st, ArrayXd::Constant(1, gamma_w_per_m), kParams, 30.0);
  const double exact = oracles::exact_cable_surface_step(0.0, gamma_w_per_m, kParams, 30.0);
  CHECK(std::abs(st.surf_diff(0) - exact) <= 1e-10);
}

TEST_CASE("uniform column at the bath temperatures stays put") {
  ThermalState st = ThermalState::initial(2, kParams, 21);
  st.soil.setConstant(kParams.snow_temperature_c);
  st.surf_diff.setConstant(0.0);  // cable bath = snow temperature
  for (int i = 0; i < 50; ++i) step_soil_columns(st, kParams, 30.0);
  CHECK((st.soil.array() - kParams.snow_temperature_c).abs().maxCoeff() <= 1e-12);
}

TEST_CASE("soil column settles onto the two-Robin steady profile") {
  const double cable_surface = 9.0;
  ThermalState st = ThermalState::initial(1, kParams, 21);
  for (int i = 0; i < 20000; ++i) {
    st.surf_diff(0) = cable_surface - st.soil(st.soil.rows() - 1, 0);  // pin the bath
    step_soil_column(st, 0, kParams, 10.0);
  }
  const auto steady = oracles::two_robin_steady(cable_surface, kParams);
  CHECK(std::abs(st.soil(0, 0) - steady.surface_c) <= 1e-6);
  CHECK(std::abs(st.soil(st.soil.rows() - 1, 0) - steady.cable_side_c) <= 1e-6);
  // interior is linear between the endpoints
  const Index ny = st.soil.rows();
  for (Index i = 0; i < ny; ++i) {
    const double frac = static_cast<double>(i) / static_cast<double>(ny - 1);
    const double expect = steady.surface_c + frac * (steady.cable_side_c - steady.surface_c);
    CHECK(std::abs(st.soil(i, 0) - expect) <= 1e-6);
  }
}

TEST_CASE("step response tracks the Fourier series on a matched Dirichlet problem") {
  // huge transfer coefficients turn both Robin films into Dirichlet walls
  ThermalParams dirichlet = kParams;
  dirichlet.ground_snow_transfer_w_per_m2_k = 1e9;
  dirichlet.cable_soil_transfer_w_per_m2_k = 1e9;
  dirichlet.snow_temperature_c = 0.0;

  const Index ny = 641;
  ThermalState st = ThermalState::initial(1, dirichlet, ny);
  const double depth = dirichlet.burial_depth_cm / 100.0;
  for (Index i = 0; i < ny; ++i) st.soil(i, 0) = std::sin(M_PI * st.depth_m(i) / depth);

  const double t_end = 0.05;
  const double dt = 1e-5;
  const int steps = static_cast<int>(t_end / dt);
  for (int n = 0; n < steps; ++n) {
    st.surf_diff(0) = -st.soil(ny - 1, 0);  // bath pinned at zero
    step_soil_column(st, 0, dirichlet, dt);
  }
  const Index mid = ny / 2;
  const double exact = oracles::dirichlet_mode_solution(st.depth_m(mid), t_end, depth,
                                                        dirichlet.soil_diffusivity_m2_per_s);
  CHECK(std::abs(st.soil(mid, 0) - exact) <= 1e-4);
}

TEST_CASE("soil maximum principle on random bounded data") {
  std::mt19937 gen(5);
  std::uniform_real_distribution<double> temp(-3.0, 7.0);
  for (int rep = 0; rep < 20; ++rep) {
    ThermalParams p = kParams;
    p.snow_temperature_c = temp(gen);
    ThermalState st = ThermalState::initial(1, p, 15);
    const double bath_bottom = temp(gen);
    const double lo = std::min(p.snow_temperature_c, bath_bottom);
    const double hi = std::max(p.snow_temperature_c, bath_bottom);
    for (Index i = 0; i < 15; ++i) st.soil(i, 0) = std::clamp(temp(gen), lo, hi);
    for (int n = 0; n < 200; ++n) {
      st.surf_diff(0) = bath_bottom - st.soil(14, 0);
      step_soil_column(st, 0, p, 30.0);
      CHECK(st.soil.col(0).minCoeff() >= lo - 1e-9);
      CHECK(st.soil.col(0).maxCoeff() <= hi + 1e-9);
    }
  }
}

TEST_CASE("implicit step keeps monotone data monotone when dt doubles") {
  for (const double dt : {30.0, 60.0, 120.0, 240.0}) {
    ThermalState st = ThermalState::initial(1, kParams, 21);
    for (Index i = 0; i < 21; ++i) st.soil(i, 0) = static_cast<double>(i) / 2.0;
    for (int n = 0; n < 50; ++n) {
      st.surf_diff(0) = 10.0 - st.soil(20, 0);
      step_soil_column(st, 0, kParams, dt);
      for (Index i = 1; i < 21; ++i) CHECK(st.soil(i, 0) >= st.soil(i - 1, 0) - 1e-9);
    }
  }
}

TEST_CASE("melt flux assembly") {
  ThermalState st = ThermalState::initial(3, kParams, 5);
  SUBCASE("equilibrium surface gives zero soil flux") {
    ExogenousSample night;
    night.phi_r = 1.0;
    night.phi_s = -0.5;
    night.phi_l = 0.25;
    const MeltFluxes f = melt_fluxes(st, night, kParams);
    CHECK(f.mu1(0) == doctest::Approx(0.75));
    CHECK(f.mu2.abs().maxCoeff() == 0.0);
  }
  SUBCASE("one degree of surface soil gives beta_ground watts") {
    st.soil(0, 1) = 1.0;
    const MeltFluxes f = melt_fluxes(st, ExogenousSample{}, kParams);
    CHECK(f.mu2(1) == doctest::Approx(88.0));
    CHECK(f.mu2(0) == 0.0);
  }
  SUBCASE("mu1 equals the flux sum sample-wise") {
    ExogenousSample morning;
    morning.phi_r = 111.0;
    morning.phi_s = 22.0;
    morning.phi_l = 3.0;
    const MeltFluxes f = melt_fluxes(st, morning, kParams);
    for (Index i = 0; i < 3; ++i) CHECK(f.mu1(i) == doctest::Approx(136.0));
  }
}

TEST_CASE("snow accumulation, clamping, and the hand-computed melt step") {
  ThermalState st = ThermalState::initial(1, kParams, 5);
  MeltFluxes none;
  none.mu1 = ArrayXd::Zero(1);
  none.mu2 = ArrayXd::Zero(1);

  SUBCASE("pure accumulation") {
    st.snow(0) = 30.0;
    step_snow(st, none, 0.2, kParams, 1.0);
    CHECK(st.snow(0) == doctest::Approx(30.2).epsilon(1e-12));
  }
  SUBCASE("clamped at zero under large melt") {
    st.snow(0) = 0.0;
    MeltFluxes big;
    big.mu1 = ArrayXd::Constant(1, 1e6);
    big.mu2 = ArrayXd::Zero(1);
    step_snow(st, big, 0.0, kParams, 1.0);
    CHECK(st.snow(0) == 0.0);
  }
  SUBCASE("hand evaluation with the table constants") {
    st.snow(0) = 30.0;
    MeltFluxes f;
    f.mu1 = ArrayXd::Constant(1, 167.4);
    f.mu2 = ArrayXd::Zero(1);
    step_snow(st, f, 0.0, kParams, 10.0);
    CHECK(st.snow(0) == doctest::Approx(25.0).epsilon(1e-3));
  }
}

TEST_CASE("zero-melt snowfall ledger is conservative") {
  std::mt19937 gen(17);
  std::uniform_real_distribution<double> fall(0.0, 0.5);
  ThermalState st = ThermalState::initial(2, kParams, 5);
  st.snow.setConstant(3.0);
  MeltFluxes none;
  none.mu1 = ArrayXd::Zero(2);
  none.mu2 = ArrayXd::Zero(2);
  double integral = 0.0;
  for (int n = 0; n < 2000; ++n) {
    const double f = fall(gen);
    integral += f * 0.5;
    step_snow(st, none, f, kParams, 0.5);
  }
  CHECK(std::abs(st.snow(0) - (3.0 + integral)) <= 1e-12 * std::max(1.0, integral));
  CHECK(std::abs(st.snow(1) - (3.0 + integral)) <= 1e-12 * std::max(1.0, integral));
}

TEST_CASE("snow never goes negative under randomized stepping") {
  std::mt19937 gen(29);
  std::uniform_real_distribution<double> mu(-200.0, 400.0);
  std::uniform_real_distribution<double> fall(0.0, 0.3);
  std::uniform_real_distribution<double> dt(0.1, 2.0);
  ThermalState st = ThermalState::initial(4, kParams, 5);
  st.snow.setConstant(1.0);
  for (int n = 0; n < 50000; ++n) {
    MeltFluxes f;
    f.mu1 = ArrayXd::Constant(4, mu(gen));
    f.mu2 = ArrayXd::Constant(4, mu(gen));
    step_snow(st, f, fall(gen), kParams, dt(gen));
    CHECK(st.snow.minCoeff() >= 0.0);
  }
}
