#pragma once

#include "roadheat/controller.hpp"
#include "roadheat/powerflow.hpp"
#include "roadheat/scenario.hpp"

#include <complex>

namespace roadheat::oracles {

/// Discrete series-admittance ladder equivalent of the voltage-profile ODEs:
/// per-cell admittance (g - jb)/dx, constant-power node injections, solved
/// by Newton on the complex nodal voltages (block-tridiagonal 2x2 real
/// Jacobian). Independent of the shooting solver.
struct LadderResult {
  ArrayXd x;      // node positions on [0, 1]
  ArrayXd v;      // voltage magnitudes
  ArrayXd theta;  // voltage phases
  double total_loss_pu = 0.0;
  int iterations = 0;
};

LadderResult ladder_solve(const ConductorParams& params, const InjectionMap& injections,
                          bool source_at_head, std::complex<double> v_source, int cells,
                          double tol = 1e-13, int max_iter = 80);

/// Steady conduction through two Robin films in series:
/// flux = (bath_hot - bath_cold) / (1/beta_hot + D/lambda + 1/beta_cold).
struct TwoRobinSteady {
  double flux_w_per_m2 = 0.0;
  double surface_c = 0.0;  // soil temperature at the snow side (y = 0)
  double cable_side_c = 0.0;  // soil temperature at the cable side (y = D_f)
};

TwoRobinSteady two_robin_steady(double cable_surface_c, const ThermalParams& params);

/// Closed-form solution of the linear cable-surface ODE after one step of
/// constant forcing.
double exact_cable_surface_step(double delta0, double gamma_w_per_m, const ThermalParams& params,
                                double dt_s);

/// Dirichlet heat-equation series solution on [0, D] for the initial
/// condition sin(pi y / D), evaluated at (y, t).
double dirichlet_mode_solution(double y, double t_s, double depth_m, double alpha, int terms = 50);

/// Independently written exhaustive per-stage argmins (recursive enumeration,
/// reversed visiting order) mirroring the documented tie-breaks.
struct StageOracleResult {
  std::vector<int> best;
  double score = 0.0;
  bool found = false;
};

StageOracleResult exhaustive_stage_a(const PlantState& plant, const Scenario& scenario,
                                     const ExogenousSample& held);
StageOracleResult exhaustive_stage_b(const PlantState& plant, const Scenario& scenario,
                                     const ExogenousSample& held,
                                     const std::vector<int>& switch_seq);
StageOracleResult exhaustive_stage_c(const PlantState& plant, const Scenario& scenario,
                                     const ExogenousSample& held,
                                     const std::vector<int>& switch_seq,
                                     const std::vector<int>& pv_seq);

struct JointOracleResult {
  PatternVec best;
  double score = 0.0;
  int candidates = 0;
  bool found = false;
};

JointOracleResult exhaustive_joint(const PlantState& plant, const Scenario& scenario,
                                   const ExogenousSample& held);

/// Small self-contained scenario (no files): M = 50 cells, 11 depth nodes,
/// N = 2 horizon, snow on the ground. Used by the enumeration oracle and
/// the reduced acceptance checks.
Scenario reduced_scenario();

}  // namespace roadheat::oracles
