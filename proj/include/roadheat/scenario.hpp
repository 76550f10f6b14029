#pragma once

#include "roadheat/timeseries.hpp"
#include "roadheat/types.hpp"

#include <cmath>
#include <string>

namespace roadheat {

/// Electrical constants. All power-flow computation runs in p.u. on
/// base_apparent_power_va and the per-conductor reference amplitudes;
/// SI values appear only at I/O boundaries.
struct GridParams {
  double base_apparent_power_va = 10e3;           // W_base
  double line_length_m = 100.0;                   // L_f
  double ref_phase_rad = 0.0;                     // theta_1
  double ref_amplitude_v = 6600.0 / std::sqrt(3.0);  // v_1
  double cable_ref_amplitude_v = 200.0;           // v_1 / a_1
  double transformer_ratio = 33.0 / std::sqrt(3.0);  // a_1
  double base_conductance = 918.0;                // m/ohm
  double base_susceptance = 918.0;                // m/ohm
  double line_conductance_pu = 1.0;               // g_e
  double line_susceptance_pu = 1.0;               // b_e
  double cable_conductance_pu = 0.5;              // g_h
  double cable_susceptance_pu = 0.5;              // b_h
  double cable_load_power_pu = -10.0;             // p_h(x_load, t), density over the load cell
  double load_position_m = 25.0;
  double pv_position_m = 50.0;
  double battery_position_m = 75.0;

  /// Nominal cable feed used by the cost and battery ledgers.
  double cable_nominal_power_pu() const { return -cable_load_power_pu; }
};

struct ThermalParams {
  double radiative_cooling_w_per_cm = 0.0;        // q_r
  double cable_contact_w_per_m_k = 1.04;          // gamma_cable
  double cable_heat_capacity_j_per_cm_c = 18.0;   // C_cable
  double soil_conductivity_w_per_m_k = 0.5;       // lambda
  double cable_soil_transfer_w_per_m2_k = 300.0;  // beta_cable
  double burial_depth_cm = 10.0;                  // D_f
  double soil_diffusivity_m2_per_s = 0.008;       // alpha_soil
  double ground_snow_transfer_w_per_m2_k = 88.0;  // beta_ground
  double snow_temperature_c = 0.0;                // delta_snow
  double snow_density_g_per_cm3 = 0.06;           // d_snow
  double melt_unit_conversion = 1.792e-4;         // a_snow, W/m^2 -> mm/min
  double initial_snow_mm = 30.0;
  double initial_soil_c = 0.0;
};

struct Weights {
  double loss = 4e2;
  double fluc = 1e7;
  double snow = 1.2e5;
  double cost = 8e5;
  double pvfluc = 1.0;
  double stor1 = 1e-3;
  double batteryfluc = 1.0;
  double stor2 = 1e-3;
};

struct ControllerParams {
  double t_mini_min = 10.0;
  double t_pred_min = 30.0;
  Weights weights;
  double battery_initial_puh = 10.0;
  double battery_reserve_floor_puh = 2.0;
  double battery_capacity_puh = 20.0;
  double zeta_guard_puh = 0.1;

  int horizon_slots() const { return static_cast<int>(std::lround(t_pred_min / t_mini_min)); }
};

struct NumericsParams {
  int grid_cells = 200;
  int depth_nodes = 21;
  double sim_step_s = 30.0;
  double solver_tol = 1e-10;
  double battery_line_discharge_cap_pu = 10.0;
};

/// Optional bulk generators for the sensible/latent heat fluxes when no
/// measured series is supplied: phi_s = c_s * wind * (T_air - delta_snow),
/// phi_l = c_l * wind.
struct BulkFluxParams {
  double sensible_coeff = 2.0;  // c_s, W.s/(m^3.K)
  double latent_coeff = 0.0;    // c_l, W.s/m^3
};

/// Exogenous inputs resampled onto the common simulation grid.
struct ExogenousSeries {
  TimeSeries residential_load;  // p.u., <= 0
  TimeSeries pv_generation;     // p.u., >= 0
  TimeSeries solar_flux;        // phi_r, W/m^2
  TimeSeries sensible_flux;     // phi_s, W/m^2
  TimeSeries latent_flux;       // phi_l, W/m^2
  TimeSeries snowfall;          // mm/min, >= 0
  TimeSeries air_temperature;   // degC
  TimeSeries wind_speed;        // m/s
};

/// All exogenous values at one instant.
struct ExogenousSample {
  double load_pu = 0.0;
  double pv_pu = 0.0;
  double phi_r = 0.0;
  double phi_s = 0.0;
  double phi_l = 0.0;
  double f_snow_mm_min = 0.0;
  double t_air_c = 0.0;
  double wind_ms = 0.0;
};

struct Scenario {
  std::string name;
  double duration_min = 120.0;
  GridParams grid;
  ThermalParams thermal;
  ControllerParams ctrl;
  NumericsParams num;
  BulkFluxParams bulk;
  ExogenousSeries series;

  ExogenousSample at(double t_min) const;
  int steps_per_slot() const {
    return static_cast<int>(std::lround(ctrl.t_mini_min * 60.0 / num.sim_step_s));
  }
};

/// Loads a JSON scenario config; series file paths resolve relative to it.
Scenario load_scenario(const std::string& config_path);

/// Checks all parameter and series invariants; throws ConfigError.
void validate(const Scenario& scenario);

}  // namespace roadheat
