#pragma once

#include "roadheat/controlword.hpp"
#include "roadheat/scenario.hpp"
#include "roadheat/types.hpp"

#include <optional>
#include <vector>

namespace roadheat {

/// Electrical state sampled along one conductor at a fixed instant, p.u.
/// An energized profile has v > 0 at every node; a de-energized cable is
/// represented by the all-zero profile.
struct VoltageProfile {
  ArrayXd x;      // node positions on [0, 1], strictly increasing
  ArrayXd theta;  // voltage phase [rad]
  ArrayXd v;      // voltage amplitude
  ArrayXd s;      // supplemental variable
  ArrayXd w;      // voltage gradient
  ArrayXd gamma;  // loss density, filled via the loss_density_* helpers
};

/// One top-hat injection: `density` (p.u. active power per unit length)
/// applied on [position, position + width).
struct InjectionEntry {
  double position = 0.0;
  double density = 0.0;
  double q_density = 0.0;
  double width = 0.0;
};

struct InjectionMap {
  std::vector<InjectionEntry> entries;
  bool empty() const { return entries.empty(); }
};

/// Device with a known total power smeared over one top-hat of `width`,
/// so that the integrated density equals the device power exactly.
InjectionEntry top_hat_power(double position, double total_power, double width);

/// Boundary values for the four states; exactly two must be fixed at each
/// end for the problem to be well posed.
struct BoundarySpec {
  std::optional<double> head_theta, head_v, head_s, head_w;
  std::optional<double> tail_theta, tail_v, tail_s, tail_w;
};

/// Fed head at (theta, v), open tail: s(L) = w(L) = 0.
BoundarySpec boundary_head_voltage(double theta, double v);
/// Open head: s(0) = w(0) = 0, fed tail at (theta, v).
BoundarySpec boundary_tail_voltage(double theta, double v);

struct ConductorParams {
  double g = 1.0;
  double b = 1.0;
};

struct SolveOptions {
  int cells = 200;
  double tol = 1e-10;     // boundary residual tolerance, p.u.
  int max_newton = 60;
  double v_floor = 1e-6;  // below this amplitude the trajectory counts as collapsed
};

/// Solves the two-point boundary value problem
///   dtheta/dx = -s/v^2,  dv/dx = w,
///   ds/dx = (b p - g q)/(g^2 + b^2),
///   dw/dx = s^2/v^3 - (g p + b q)/((g^2 + b^2) v)
/// by single shooting on the two free head values with a damped Newton
/// iteration; integration is fourth-order Runge-Kutta with per-cell
/// step-doubling refinement.
VoltageProfile solve_profile(const ConductorParams& params, const InjectionMap& injections,
                             const BoundarySpec& boundary, const SolveOptions& options);

VoltageProfile zero_profile(int cells);

/// Three-phase line loss density: 3 g_e (w^2 + s^2/v^2).
ArrayXd loss_density_line(const VoltageProfile& profile, double g_e);
/// Single-phase cable loss density: g_h (w^2 + s^2/v^2).
ArrayXd loss_density_cable(const VoltageProfile& profile, double g_h);

struct CoupledFlows {
  VoltageProfile line;   // gamma = line loss density
  VoltageProfile cable;  // gamma = cable loss density
  double theta2 = 0.0;   // line phase at x = L_f
  double v2 = 0.0;       // line amplitude at x = L_f
};

/// Solves line and cable under one control word. `line_map` must hold the
/// device injections only; the cable head draw is appended here when
/// Switch 1 is on. With Switch 2 on the cable is battery-fed and puts no
/// injection on the line. With both switches off the cable profile is
/// identically zero and the solver is bypassed.
CoupledFlows couple_line_and_cable(const GridParams& grid, const ControlWord& word,
                                   InjectionMap line_map, const InjectionMap& cable_map,
                                   const SolveOptions& options);

/// Piecewise-constant per-cell densities implied by a map (overlap-exact).
void resolve_densities(const InjectionMap& map, int cells, ArrayXd& p, ArrayXd& q);

}  // namespace roadheat
