#include "roadheat/oracles.hpp"

#include "roadheat/plant.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

namespace roadheat::oracles {
namespace {

using Complex = std::complex<double>;

// Real 2x2 block of a complex-linear coefficient: a * dV.
Matrix2d linear_block(Complex a) {
  Matrix2d m;
  m << a.real(), -a.imag(), a.imag(), a.real();
  return m;
}

// Real 2x2 block of a conjugate-linear coefficient: c * conj(dV).
Matrix2d conjugate_block(Complex c) {
  Matrix2d m;
  m << c.real(), c.imag(), c.imag(), -c.real();
  return m;
}

Vector2d as_vec(Complex z) { return Vector2d(z.real(), z.imag()); }

// Block-tridiagonal Thomas solve with 2x2 blocks (in place).
void block_thomas(std::vector<Matrix2d>& lower, std::vector<Matrix2d>& diag,
                  std::vector<Matrix2d>& upper, std::vector<Vector2d>& rhs) {
  const std::size_t n = diag.size();
  for (std::size_t i = 1; i < n; ++i) {
    const Matrix2d m = lower[i] * diag[i - 1].inverse();
    diag[i] -= m * upper[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  rhs[n - 1] = diag[n - 1].inverse() * rhs[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) {
    rhs[i] = diag[i].inverse() * (rhs[i] - upper[i] * rhs[i + 1]);
  }
}

}  // namespace

LadderResult ladder_solve(const ConductorParams& params, const InjectionMap& injections,
                          bool source_at_head, Complex v_source, int cells, double tol,
                          int max_iter) {
  const int n_nodes = cells + 1;
  const double dx = 1.0 / cells;
  const Complex y_branch = Complex(params.g, -params.b) / dx;

  // node powers from the density map via half-cell control volumes
  std::vector<Complex> power(static_cast<std::size_t>(n_nodes), Complex(0.0, 0.0));
  for (const InjectionEntry& e : injections.entries) {
    const double a = std::clamp(e.position, 0.0, 1.0);
    const double b = std::clamp(e.position + e.width, 0.0, 1.0);
    if (b <= a) continue;
    for (int k = 0; k < n_nodes; ++k) {
      const double lo = std::max(a, (k - 0.5) * dx);
      const double hi = std::min(b, (k + 0.5) * dx);
      if (hi > lo) power[static_cast<std::size_t>(k)] += Complex(e.density, e.q_density) * (hi - lo);
    }
  }

  // unknown nodes in chain order, source node excluded
  const int src = source_at_head ? 0 : cells;
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(cells));
  for (int k = 0; k < n_nodes; ++k)
    if (k != src) order.push_back(k);

  std::vector<Complex> voltage(static_cast<std::size_t>(n_nodes), v_source);

  LadderResult result;
  for (int iter = 0; iter < max_iter; ++iter) {
    // current mismatch at each unknown node and its Jacobian blocks
    std::vector<Matrix2d> lower(order.size(), Matrix2d::Zero());
    std::vector<Matrix2d> diag(order.size(), Matrix2d::Zero());
    std::vector<Matrix2d> upper(order.size(), Matrix2d::Zero());
    std::vector<Vector2d> rhs(order.size(), Vector2d::Zero());

    for (std::size_t i = 0; i < order.size(); ++i) {
      const int k = order[i];
      const Complex vk = voltage[static_cast<std::size_t>(k)];
      Complex mismatch(0.0, 0.0);
      Complex a_diag(0.0, 0.0);
      for (const int nb : {k - 1, k + 1}) {
        if (nb < 0 || nb >= n_nodes) continue;
        mismatch += y_branch * (vk - voltage[static_cast<std::size_t>(nb)]);
        a_diag += y_branch;
        if (nb != src) {
          const std::size_t col = static_cast<std::size_t>(nb < src ? nb : nb - 1);
          if (col + 1 == i) lower[i] = linear_block(-y_branch);
          else if (col == i + 1) upper[i] = linear_block(-y_branch);
        }
      }
      const Complex s = power[static_cast<std::size_t>(k)];
      mismatch -= std::conj(s / vk);
      const Complex c = std::conj(s) / (std::conj(vk) * std::conj(vk));
      diag[i] = linear_block(a_diag) + conjugate_block(c);
      rhs[i] = -as_vec(mismatch);
    }

    block_thomas(lower, diag, upper, rhs);

    double step_norm = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
      voltage[static_cast<std::size_t>(order[i])] += Complex(rhs[i](0), rhs[i](1));
      step_norm = std::max(step_norm, rhs[i].cwiseAbs().maxCoeff());
    }
    result.iterations = iter + 1;
    if (step_norm <= tol) break;
    if (iter + 1 == max_iter)
      throw SolverError(SolverError::Kind::NoConvergence,
                        "ladder Newton iteration did not converge", step_norm);
  }

  result.x = linspace(0.0, 1.0, n_nodes);
  result.v = ArrayXd::Zero(n_nodes);
  result.theta = ArrayXd::Zero(n_nodes);
  for (int k = 0; k < n_nodes; ++k) {
    result.v(k) = std::abs(voltage[static_cast<std::size_t>(k)]);
    result.theta(k) = std::arg(voltage[static_cast<std::size_t>(k)]);
  }

  const double r_branch = (Complex(1.0, 0.0) / y_branch).real();
  for (int k = 0; k < cells; ++k) {
    const Complex di = (voltage[static_cast<std::size_t>(k)] -
                        voltage[static_cast<std::size_t>(k + 1)]) * y_branch;
    result.total_loss_pu += std::norm(di) * r_branch;
  }
  return result;
}

TwoRobinSteady two_robin_steady(double cable_surface_c, const ThermalParams& params) {
  const double depth_m = params.burial_depth_cm / 100.0;
  const double resistance = 1.0 / params.cable_soil_transfer_w_per_m2_k +
                            depth_m / params.soil_conductivity_w_per_m_k +
                            1.0 / params.ground_snow_transfer_w_per_m2_k;
  TwoRobinSteady out;
  out.flux_w_per_m2 = (cable_surface_c - params.snow_temperature_c) / resistance;
  out.surface_c = params.snow_temperature_c + out.flux_w_per_m2 / params.ground_snow_transfer_w_per_m2_k;
  out.cable_side_c = cable_surface_c - out.flux_w_per_m2 / params.cable_soil_transfer_w_per_m2_k;
  return out;
}

double exact_cable_surface_step(double delta0, double gamma_w_per_m, const ThermalParams& params,
                                double dt_s) {
  const double rate = params.cable_contact_w_per_m_k / params.cable_heat_capacity_j_per_cm_c;
  const double steady = (gamma_w_per_m * 1e-2 - params.radiative_cooling_w_per_cm) /
                        params.cable_contact_w_per_m_k;
  return steady + (delta0 - steady) * std::exp(-rate * dt_s);
}

double dirichlet_mode_solution(double y, double t_s, double depth_m, double alpha, int terms) {
  // initial condition sin(pi y / D) keeps only the first Fourier mode; the
  // loop is retained so other initial data can be projected if needed
  double acc = 0.0;
  for (int n = 1; n <= terms; ++n) {
    const double bn = n == 1 ? 1.0 : 0.0;
    const double kn = n * std::numbers::pi / depth_m;
    acc += bn * std::sin(kn * y) * std::exp(-alpha * kn * kn * t_s);
  }
  return acc;
}

namespace {

// Recursive pattern enumeration in reversed digit order: visits candidates
// in a different sequence than the controller's decoder on purpose.
void enumerate_rec(int slots, int base, std::vector<int>& seq,
                   const std::function<void(const std::vector<int>&)>& visit, int pos) {
  if (pos < 0) {
    visit(seq);
    return;
  }
  for (int d = base - 1; d >= 0; --d) {
    seq[static_cast<std::size_t>(pos)] = d;
    enumerate_rec(slots, base, seq, visit, pos - 1);
  }
}

void enumerate_all(int slots, int base, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> seq(static_cast<std::size_t>(slots), 0);
  enumerate_rec(slots, base, seq, visit, slots - 1);
}

int oracle_switch_rank(int sw) { return sw == 0 ? 0 : (sw == 2 ? 1 : 2); }

bool oracle_switch_less(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (oracle_switch_rank(a[i]) != oracle_switch_rank(b[i]))
      return oracle_switch_rank(a[i]) < oracle_switch_rank(b[i]);
  }
  return false;
}

}  // namespace

StageOracleResult exhaustive_stage_a(const PlantState& plant, const Scenario& sc,
                                     const ExogenousSample& held) {
  const int N = sc.ctrl.horizon_slots();
  StageOracleResult best;
  enumerate_all(N, 3, [&](const std::vector<int>& sw) {
    PatternVec pattern;
    pattern.switch_seq = sw;
    pattern.pv_seq.assign(static_cast<std::size_t>(N), 1);
    pattern.battery_seq.resize(static_cast<std::size_t>(N));
    for (int l = 0; l < N; ++l)
      pattern.battery_seq[static_cast<std::size_t>(l)] = sw[static_cast<std::size_t>(l)] == 2 ? 2 : 0;
    const Rollout r = rollout_pattern(plant, pattern, sc, held);
    if (!r.feasible) return;
    const double score = score_J(r, sc.ctrl.weights).j_total;
    if (!best.found || score < best.score ||
        (score == best.score && oracle_switch_less(sw, best.best))) {
      best.found = true;
      best.score = score;
      best.best = sw;
    }
  });
  return best;
}

StageOracleResult exhaustive_stage_b(const PlantState& plant, const Scenario& sc,
                                     const ExogenousSample& held,
                                     const std::vector<int>& switch_seq) {
  const int N = sc.ctrl.horizon_slots();
  StageOracleResult best;
  enumerate_all(N, 2, [&](const std::vector<int>& pv) {
    PatternVec pattern;
    pattern.switch_seq = switch_seq;
    pattern.pv_seq = pv;
    pattern.battery_seq.resize(static_cast<std::size_t>(N));
    for (int l = 0; l < N; ++l)
      pattern.battery_seq[static_cast<std::size_t>(l)] =
          switch_seq[static_cast<std::size_t>(l)] == 2 ? 2 : 0;
    const Rollout r = rollout_pattern(plant, pattern, sc, held);
    if (!r.feasible) return;
    const double score = score_J_pv(r, sc.ctrl.weights);
    if (!best.found || score < best.score || (score == best.score && pv < best.best)) {
      best.found = true;
      best.score = score;
      best.best = pv;
    }
  });
  return best;
}

StageOracleResult exhaustive_stage_c(const PlantState& plant, const Scenario& sc,
                                     const ExogenousSample& held,
                                     const std::vector<int>& switch_seq,
                                     const std::vector<int>& pv_seq) {
  const int N = sc.ctrl.horizon_slots();
  StageOracleResult best;
  enumerate_all(N, 3, [&](const std::vector<int>& bd) {
    for (int l = 0; l < N; ++l) {
      if ((switch_seq[static_cast<std::size_t>(l)] == 2) != (bd[static_cast<std::size_t>(l)] == 2))
        return;
    }
    PatternVec pattern;
    pattern.switch_seq = switch_seq;
    pattern.pv_seq = pv_seq;
    pattern.battery_seq = bd;
    const Rollout r = rollout_pattern(plant, pattern, sc, held);
    if (!r.feasible) return;
    const double score = score_J_battery(r, sc.ctrl.weights);
    if (!best.found || score < best.score || (score == best.score && bd < best.best)) {
      best.found = true;
      best.score = score;
      best.best = bd;
    }
  });
  return best;
}

JointOracleResult exhaustive_joint(const PlantState& plant, const Scenario& sc,
                                   const ExogenousSample& held) {
  const int N = sc.ctrl.horizon_slots();
  JointOracleResult best;
  enumerate_all(N, 3, [&](const std::vector<int>& sw) {
    enumerate_all(N, 2, [&](const std::vector<int>& pv) {
      enumerate_all(N, 3, [&](const std::vector<int>& bd) {
        for (int l = 0; l < N; ++l) {
          if ((sw[static_cast<std::size_t>(l)] == 2) != (bd[static_cast<std::size_t>(l)] == 2))
            return;
        }
        ++best.candidates;
        PatternVec pattern{sw, pv, bd};
        const Rollout r = rollout_pattern(plant, pattern, sc, held);
        if (!r.feasible) return;
        const double score = score_J(r, sc.ctrl.weights).j_total;
        if (!best.found || score < best.score) {
          best.found = true;
          best.score = score;
          best.best = pattern;
        }
      });
    });
  });
  return best;
}

Scenario reduced_scenario() {
  Scenario sc;
  sc.name = "reduced";
  sc.duration_min = 60.0;
  sc.num.grid_cells = 50;
  sc.num.depth_nodes = 11;
  sc.ctrl.t_mini_min = 10.0;
  sc.ctrl.t_pred_min = 20.0;
  sc.ctrl.battery_initial_puh = 6.0;
  sc.ctrl.battery_reserve_floor_puh = 2.0;
  sc.ctrl.battery_capacity_puh = 20.0;
  sc.ctrl.weights.loss = 1.0;
  sc.ctrl.weights.fluc = 50.0;
  sc.ctrl.weights.snow = 2e6;
  sc.ctrl.weights.cost = 30.0;
  sc.ctrl.weights.pvfluc = 1.0;
  sc.ctrl.weights.stor1 = 10.0;
  sc.ctrl.weights.batteryfluc = 1.0;
  sc.ctrl.weights.stor2 = 10.0;
  sc.thermal.initial_snow_mm = 20.0;

  auto ramp = [&](double v0, double v1) {
    TimeSeries s;
    s.t_min = linspace(0.0, sc.duration_min, 2);
    s.value = ArrayXd::Zero(2);
    s.value << v0, v1;
    return interpolate_to_grid(s, sc.num.sim_step_s, 0.0, sc.duration_min);
  };
  sc.series.residential_load = ramp(-0.8, -1.4);
  sc.series.pv_generation = ramp(0.4, 1.6);
  sc.series.solar_flux = ramp(20.0, 90.0);
  sc.series.sensible_flux = ramp(2.0, 5.0);
  sc.series.latent_flux = ramp(0.0, 0.0);
  sc.series.snowfall = ramp(0.0, 0.0);
  sc.series.air_temperature = ramp(-1.0, 1.0);
  sc.series.wind_speed = ramp(1.0, 2.0);
  validate(sc);
  return sc;
}

}  // namespace roadheat::oracles
