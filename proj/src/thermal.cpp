#include "roadheat/thermal.hpp"

#include <cmath>
#include <vector>

namespace roadheat {

ThermalState ThermalState::initial(Index x_nodes, const ThermalParams& params, Index depth_nodes) {
  ThermalState st;
  st.surf_diff = ArrayXd::Zero(x_nodes);
  st.soil = MatrixXd::Constant(depth_nodes, x_nodes, params.initial_soil_c);
  st.snow = ArrayXd::Constant(x_nodes, params.initial_snow_mm);
  st.depth_m = linspace(0.0, params.burial_depth_cm / 100.0, depth_nodes);
  return st;
}

void step_cable_surface(ThermalState& state, const ArrayXd& gamma_h_w_per_m,
                        const ThermalParams& params, double dt_s) {
  const double rate = params.cable_contact_w_per_m_k / params.cable_heat_capacity_j_per_cm_c;
  const double decay = std::exp(-rate * dt_s);
  // steady point of the linear ODE under the current (constant) forcing
  const ArrayXd steady = (gamma_h_w_per_m * 1e-2 - params.radiative_cooling_w_per_cm) /
                         params.cable_contact_w_per_m_k;
  state.surf_diff = steady + (state.surf_diff - steady) * decay;
}

void step_soil_column(ThermalState& state, Index j, const ThermalParams& params, double dt_s) {
  const Index ny = state.soil.rows();
  const double h = state.depth_m(1) - state.depth_m(0);
  const double r = params.soil_diffusivity_m2_per_s * dt_s / (h * h);
  const double bg = 2.0 * h * params.ground_snow_transfer_w_per_m2_k / params.soil_conductivity_w_per_m_k;
  const double bc = 2.0 * h * params.cable_soil_transfer_w_per_m2_k / params.soil_conductivity_w_per_m_k;
  const double bath_top = params.snow_temperature_c;
  const double bath_bottom = state.surf_diff(j) + state.soil(ny - 1, j);

  // backward Euler, Robin ends via second-order ghost nodes
  std::vector<double> sub(ny), diag(ny), sup(ny), rhs(ny);
  diag[0] = 1.0 + r * (2.0 + bg);
  sup[0] = -2.0 * r;
  rhs[0] = state.soil(0, j) + r * bg * bath_top;
  for (Index i = 1; i + 1 < ny; ++i) {
    sub[i] = -r;
    diag[i] = 1.0 + 2.0 * r;
    sup[i] = -r;
    rhs[i] = state.soil(i, j);
  }
  sub[ny - 1] = -2.0 * r;
  diag[ny - 1] = 1.0 + r * (2.0 + bc);
  rhs[ny - 1] = state.soil(ny - 1, j) + r * bc * bath_bottom;

  // Thomas sweep
  for (Index i = 1; i < ny; ++i) {
    const double m = sub[i] / diag[i - 1];
    diag[i] -= m * sup[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  state.soil(ny - 1, j) = rhs[ny - 1] / diag[ny - 1];
  for (Index i = ny - 2; i >= 0; --i) {
    state.soil(i, j) = (rhs[i] - sup[i] * state.soil(i + 1, j)) / diag[i];
  }
}

void step_soil_columns(ThermalState& state, const ThermalParams& params, double dt_s) {
  for (Index j = 0; j < state.soil.cols(); ++j) step_soil_column(state, j, params, dt_s);
}

MeltFluxes melt_fluxes(const ThermalState& state, const ExogenousSample& weather,
                       const ThermalParams& params) {
  MeltFluxes f;
  const Index nx = state.snow.size();
  f.mu1 = ArrayXd::Constant(nx, weather.phi_r + weather.phi_s + weather.phi_l);
  f.mu2 = params.ground_snow_transfer_w_per_m2_k *
          (state.soil.row(0).transpose().array() - params.snow_temperature_c);
  return f;
}

void step_snow(ThermalState& state, const MeltFluxes& fluxes, double f_snow_mm_min,
               const ThermalParams& params, double dt_min) {
  const double a_over_d = params.melt_unit_conversion / params.snow_density_g_per_cm3;
  const ArrayXd melt = a_over_d * (fluxes.mu1 + fluxes.mu2) * dt_min;
  const double fall = f_snow_mm_min * dt_min;
  for (Index i = 0; i < state.snow.size(); ++i) {
    const double melted = state.snow(i) > 0.0 ? melt(i) : 0.0;
    state.snow(i) = std::max(0.0, state.snow(i) - melted + fall);
  }
}

}  // namespace roadheat
