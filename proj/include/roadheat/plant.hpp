#pragma once

#include "roadheat/controlword.hpp"
#include "roadheat/powerflow.hpp"
#include "roadheat/scenario.hpp"
#include "roadheat/thermal.hpp"
#include "roadheat/types.hpp"

#include <vector>

namespace roadheat {

struct BatteryState {
  double energy_puh = 10.0;
  double floor_puh = 2.0;
  double capacity_puh = 20.0;

  bool in_bounds() const { return energy_puh >= floor_puh && energy_puh <= capacity_puh; }
};

/// Charge/discharge bookkeeping; clips are logged, not errors.
struct BatteryLedger {
  double charged_puh = 0.0;
  double discharged_puh = 0.0;
  double clip_adjust_puh = 0.0;  // signed energy added (+) or removed (-) by clipping
  long clip_events = 0;
};

struct PlantState {
  double t_min = 0.0;
  BatteryState battery;
  ThermalState thermal;
  double purchased_puh = 0.0;
  double loss_Wmin = 0.0;
  double snow_m2min = 0.0;
  double mcost_pumin = 0.0;
  double slot_vdev_pu = 0.0;  // running max within the current slot
  BatteryLedger ledger;
};

PlantState initial_state(const Scenario& scenario);

/// Per-step ledger increments recorded by advance().
struct StepRecord {
  double t_min = 0.0;  // time at the start of the step
  int switch_index = 0;
  int pv_to_line = 1;
  int battery_dest = 0;
  double loss_Wmin_inc = 0.0;
  double vdev_pu = 0.0;  // max over x of |v - v1| at this instant, p.u.
  double vdev_V = 0.0;
  double snow_m2min_inc = 0.0;
  double mcost_pumin_inc = 0.0;
  double purchased_puh_inc = 0.0;
  double battery_puh_start = 0.0;
  double battery_puh_end = 0.0;
  double zeta1_min_inc = 0.0;
  double zeta2_min_inc = 0.0;
  double snow_mean_mm = 0.0;  // spatial mean depth after the step
};

/// Full profiles of one step, for CSV dumps.
struct StepOutputs {
  CoupledFlows flows;
};

/// Whether the word's worst-case discharge over one slot keeps the battery
/// at or above its reserve floor.
bool word_feasible_for_slot(const ControlWord& word, const BatteryState& battery,
                            const Scenario& scenario);

/// All control words satisfying the sum-to-one and cable-feed coupling
/// constraints whose worst-case one-slot discharge keeps the battery at or
/// above its reserve floor.
std::vector<ControlWord> feasible_words(const BatteryState& battery, const Scenario& scenario);

struct InjectionPair {
  InjectionMap line;
  InjectionMap cable;
};

/// Assembles the device injections for one instant: residential load at
/// 25 m, PV at 50 m when routed to the line, battery at 75 m when
/// discharging to the line, and the switch-dependent cable load.
InjectionPair build_injections(const ControlWord& word, const ExogenousSample& now,
                               const BatteryState& battery, const Scenario& scenario);

/// Lossless energy ledger: charge by the full PV power when it is routed to
/// the battery; `discharge_pu` is the rate drawn while battery_dest is 1 or
/// 2 (line-discharge magnitude or nominal cable feed). The result is clipped
/// to [floor, capacity].
void step_battery(BatteryState& battery, const ControlWord& word, double pv_power_pu,
                  double discharge_pu, double dt_h, BatteryLedger* ledger);

/// Advances the coupled system one simulation step under `word`, using the
/// exogenous sample for this instant. Throws std::invalid_argument on a
/// coupling-violating word.
StepRecord advance(PlantState& state, const ControlWord& word, const ExogenousSample& now,
                   const Scenario& scenario, StepOutputs* outputs = nullptr);

}  // namespace roadheat
