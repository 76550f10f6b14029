#pragma once

#include "roadheat/scenario.hpp"
#include "roadheat/types.hpp"

namespace roadheat {

/// Cable-surface offsets, per-position soil temperature columns, and snow
/// depth, sharing the power-flow x grid (one column per node).
struct ThermalState {
  ArrayXd surf_diff;  // delta_surf,diff per x [degC]
  MatrixXd soil;      // (depth node, x node) [degC]; row 0 = ground surface
  ArrayXd snow;       // h_snow per x [mm]
  ArrayXd depth_m;    // depth grid, 0 .. D_f

  /// Cable surface temperature delta_surf = offset + soil at cable depth.
  ArrayXd surface_temperature() const { return surf_diff + soil.row(soil.rows() - 1).transpose().array(); }

  static ThermalState initial(Index x_nodes, const ThermalParams& params, Index depth_nodes);
};

struct MeltFluxes {
  ArrayXd mu1;  // solar + sensible + latent [W/m^2]
  ArrayXd mu2;  // soil-to-snow Robin flux [W/m^2]
};

/// Advances d(delta)/dt = (Gamma_h[W/m] * 1e-2 - q_r - gamma_cable * delta) / C_cable
/// with the exact exponential step for the piecewise-constant forcing.
void step_cable_surface(ThermalState& state, const ArrayXd& gamma_h_w_per_m,
                        const ThermalParams& params, double dt_s);

/// Backward-Euler step of one soil column (index j) with Robin baths at both
/// ends: snow at the surface, the cable surface at depth D_f. Second-order
/// ghost-node discretization; tridiagonal solve.
void step_soil_column(ThermalState& state, Index j, const ThermalParams& params, double dt_s);

/// All columns (they are independent; no horizontal diffusion).
void step_soil_columns(ThermalState& state, const ThermalParams& params, double dt_s);

MeltFluxes melt_fluxes(const ThermalState& state, const ExogenousSample& weather,
                       const ThermalParams& params);

/// h <- max(0, h - (a_snow/d_snow)(mu1 + mu2) dt + f_snow dt); the melt term
/// applies only where h > 0.
void step_snow(ThermalState& state, const MeltFluxes& fluxes, double f_snow_mm_min,
               const ThermalParams& params, double dt_min);

}  // namespace roadheat
