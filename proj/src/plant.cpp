#include "roadheat/plant.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roadheat {
namespace {

SolveOptions solve_options(const Scenario& sc) {
  SolveOptions opt;
  opt.cells = sc.num.grid_cells;
  opt.tol = sc.num.solver_tol;
  return opt;
}

// Worst-case discharge rate of a word over one slot, p.u.
double worst_discharge_rate(const ControlWord& word, const Scenario& sc) {
  if (word.battery_dest == 2) return sc.grid.cable_nominal_power_pu();
  if (word.battery_dest == 1) return sc.num.battery_line_discharge_cap_pu;
  return 0.0;
}

}  // namespace

PlantState initial_state(const Scenario& sc) {
  PlantState st;
  st.battery.energy_puh = sc.ctrl.battery_initial_puh;
  st.battery.floor_puh = sc.ctrl.battery_reserve_floor_puh;
  st.battery.capacity_puh = sc.ctrl.battery_capacity_puh;
  st.thermal = ThermalState::initial(sc.num.grid_cells + 1, sc.thermal, sc.num.depth_nodes);
  return st;
}

bool word_feasible_for_slot(const ControlWord& word, const BatteryState& battery,
                            const Scenario& sc) {
  const double drain = worst_discharge_rate(word, sc) * sc.ctrl.t_mini_min / 60.0;
  return drain <= 0.0 || battery.energy_puh - drain >= battery.floor_puh - 1e-12;
}

std::vector<ControlWord> feasible_words(const BatteryState& battery, const Scenario& sc) {
  std::vector<ControlWord> words;
  for (int sw = 0; sw < 3; ++sw) {
    for (int pv = 0; pv < 2; ++pv) {
      for (int bd = 0; bd < 3; ++bd) {
        ControlWord w{sw, pv == 1, bd};
        if (!w.coupling_ok()) continue;
        if (!word_feasible_for_slot(w, battery, sc)) continue;
        words.push_back(w);
      }
    }
  }
  return words;
}

InjectionPair build_injections(const ControlWord& word, const ExogenousSample& now,
                               const BatteryState& battery, const Scenario& sc) {
  if (!word.coupling_ok()) throw std::invalid_argument("control word violates cable-feed coupling");
  (void)battery;

  InjectionPair maps;
  const double L = sc.grid.line_length_m;
  const double cell = 1.0 / sc.num.grid_cells;

  if (now.load_pu != 0.0)
    maps.line.entries.push_back(top_hat_power(sc.grid.load_position_m / L, now.load_pu, cell));
  if (word.pv_to_line && now.pv_pu != 0.0)
    maps.line.entries.push_back(top_hat_power(sc.grid.pv_position_m / L, now.pv_pu, cell));
  if (word.battery_dest == 1) {
    const double discharge =
        std::min(std::abs(now.load_pu), sc.num.battery_line_discharge_cap_pu);
    if (discharge > 0.0)
      maps.line.entries.push_back(
          top_hat_power(sc.grid.battery_position_m / L, discharge, cell));
  }

  // cable terminal load per the active switch pattern
  if (word.switch_index == 1)
    maps.cable.entries.push_back(InjectionEntry{1.0 - cell, sc.grid.cable_load_power_pu, 0.0, cell});
  else if (word.switch_index == 2)
    maps.cable.entries.push_back(InjectionEntry{0.0, sc.grid.cable_load_power_pu, 0.0, cell});

  return maps;
}

void step_battery(BatteryState& battery, const ControlWord& word, double pv_power_pu,
                  double discharge_pu, double dt_h, BatteryLedger* ledger) {
  const double charge = word.pv_to_line ? 0.0 : pv_power_pu;
  const double discharge = word.battery_dest != 0 ? discharge_pu : 0.0;

  const double unclipped = battery.energy_puh + (charge - discharge) * dt_h;
  const double clipped = std::clamp(unclipped, battery.floor_puh, battery.capacity_puh);
  if (ledger) {
    ledger->charged_puh += charge * dt_h;
    ledger->discharged_puh += discharge * dt_h;
    if (clipped != unclipped) {
      ledger->clip_adjust_puh += clipped - unclipped;
      ++ledger->clip_events;
    }
  }
  battery.energy_puh = clipped;
}

StepRecord advance(PlantState& st, const ControlWord& word, const ExogenousSample& now,
                   const Scenario& sc, StepOutputs* outputs) {
  if (!word.coupling_ok())
    throw std::invalid_argument("control word violates the cable-feed coupling constraint");

  const double dt_s = sc.num.sim_step_s;
  const double dt_min = dt_s / 60.0;
  const double dt_h = dt_s / 3600.0;
  const double w_base = sc.grid.base_apparent_power_va;
  const double L = sc.grid.line_length_m;

  StepRecord rec;
  rec.t_min = st.t_min;
  rec.switch_index = word.switch_index;
  rec.pv_to_line = word.pv_to_line ? 1 : 0;
  rec.battery_dest = word.battery_dest;
  rec.battery_puh_start = st.battery.energy_puh;

  const InjectionPair maps = build_injections(word, now, st.battery, sc);
  CoupledFlows flows = couple_line_and_cable(sc.grid, word, maps.line, maps.cable, solve_options(sc));

  // ledgers sampled at the start-of-step instant
  const double loss_pu =
      trapezoid(flows.line.x, flows.line.gamma) + trapezoid(flows.cable.x, flows.cable.gamma);
  rec.loss_Wmin_inc = loss_pu * w_base * dt_min;
  st.loss_Wmin += rec.loss_Wmin_inc;

  rec.vdev_pu = (flows.line.v - 1.0).abs().maxCoeff();
  rec.vdev_V = rec.vdev_pu * sc.grid.ref_amplitude_v;
  st.slot_vdev_pu = std::max(st.slot_vdev_pu, rec.vdev_pu);

  rec.snow_m2min_inc = trapezoid(flows.line.x, st.thermal.snow / 1000.0) * L * dt_min;
  st.snow_m2min += rec.snow_m2min_inc;

  const double nominal = sc.grid.cable_nominal_power_pu();
  rec.mcost_pumin_inc = word.switch_index == 1 ? nominal * dt_min : 0.0;
  st.mcost_pumin += rec.mcost_pumin_inc;
  rec.purchased_puh_inc = word.switch_index == 1 ? nominal * dt_h : 0.0;
  st.purchased_puh += rec.purchased_puh_inc;

  // smoothing-term integrands use the pre-step battery level
  const double guarded = std::max(st.battery.energy_puh, sc.ctrl.zeta_guard_puh);
  rec.zeta1_min_inc = word.pv_to_line ? 0.0 : dt_min / guarded;
  rec.zeta2_min_inc = word.battery_dest != 0 ? dt_min / guarded : 0.0;

  // thermal chain: melt fluxes and snow from the time-t state, then the
  // cable surface, then the soil columns against the updated surface
  const MeltFluxes fluxes = melt_fluxes(st.thermal, now, sc.thermal);
  step_snow(st.thermal, fluxes, now.f_snow_mm_min, sc.thermal, dt_min);
  const ArrayXd gamma_h_w_per_m = flows.cable.gamma * (w_base / L);
  step_cable_surface(st.thermal, gamma_h_w_per_m, sc.thermal, dt_s);
  step_soil_columns(st.thermal, sc.thermal, dt_s);

  const double discharge_rate =
      word.battery_dest == 2
          ? nominal
          : std::min(std::abs(now.load_pu), sc.num.battery_line_discharge_cap_pu);
  step_battery(st.battery, word, now.pv_pu, discharge_rate, dt_h, &st.ledger);
  rec.battery_puh_end = st.battery.energy_puh;
  rec.snow_mean_mm = st.thermal.snow.mean();

  st.t_min += dt_min;
  if (outputs) outputs->flows = std::move(flows);
  return rec;
}

}  // namespace roadheat
