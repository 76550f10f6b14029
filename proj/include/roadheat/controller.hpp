#pragma once

#include "roadheat/plant.hpp"
#include "roadheat/scenario.hpp"

#include <optional>
#include <string>
#include <vector>

namespace roadheat {

/// Candidate input sequences over the horizon (one value per slot).
struct PatternVec {
  std::vector<int> switch_seq;   // values in {0,1,2}
  std::vector<int> pv_seq;       // values in {0,1}
  std::vector<int> battery_seq;  // values in {0,1,2}
};

struct ScoreBreakdown {
  double j_total = 0.0;
  double p_loss = 0.0;   // W.min
  double v_fluc = 0.0;   // V
  double s_snow = 0.0;   // m^2.min
  double m_cost = 0.0;   // p.u..min
  double j_pv = 0.0;
  double v_pvfluc = 0.0;
  double b_stor1 = 0.0;
  double j_battery = 0.0;
  double v_batteryfluc = 0.0;
  double b_stor2 = 0.0;
};

/// Simulated horizon: steps grouped into slots of steps_per_slot records.
/// A rollout becomes infeasible when some slot's word would breach the
/// battery reserve; such candidates are excluded from the argmin.
struct Rollout {
  std::vector<StepRecord> steps;
  int steps_per_slot = 0;
  bool feasible = true;
  int infeasible_slot = -1;
};

/// Simulates `pattern` from a copy of `plant` with all exogenous series held
/// constant at `held` (hold-constant prediction).
Rollout rollout_pattern(PlantState plant, const PatternVec& pattern, const Scenario& scenario,
                        const ExogenousSample& held);

ScoreBreakdown score_J(const Rollout& rollout, const Weights& weights);
double score_J_pv(const Rollout& rollout, const Weights& weights, ScoreBreakdown* breakdown = nullptr);
double score_J_battery(const Rollout& rollout, const Weights& weights,
                       ScoreBreakdown* breakdown = nullptr);

struct CandidateLog {
  int k = 0;
  char stage = 'A';  // A, B, C, or J (joint)
  std::string pattern;
  double score = 0.0;
  ScoreBreakdown breakdown;
  bool feasible = true;
};

struct PlanOptions {
  int threads = 1;
  bool joint = false;
  bool log_candidates = false;
};

struct PlanResult {
  ControlWord word;  // first-slot entries of the optimal patterns
  PatternVec pattern;
  double stage_a_score = 0.0;
  double stage_b_score = 0.0;
  double stage_c_score = 0.0;
  double cascade_J = 0.0;  // J of the final triple's rollout
  int rollouts = 0;
  bool fallback = false;  // every candidate infeasible; all-off word applied
  std::optional<double> joint_J;
  std::optional<PatternVec> joint_pattern;
  std::vector<CandidateLog> log;
};

/// One receding-horizon planning step: stage A picks the switch pattern by
/// J, stage B the PV pattern by J_pv, stage C the battery pattern by
/// J_battery; only the first slot of the result is applied.
PlanResult plan_step(int k, const PlantState& plant, const Scenario& scenario,
                     const PlanOptions& options);

struct SlotLog {
  int k = 0;
  ControlWord word;
  double plan_seconds = 0.0;
  double slot_vdev_pu = 0.0;
  double slot_vdev_V = 0.0;
  bool fallback = false;
};

struct RunReport {
  double purchased_puh = 0.0;
  double v_fluc_total_V = 0.0;
  double final_snow_total_mm_m = 0.0;
  double battery_final_puh = 0.0;
  double battery_min_puh = 0.0;
  double wall_time_per_plan_step_s = 0.0;
};

struct RunResult {
  std::vector<StepRecord> trajectory;
  std::vector<SlotLog> slots;
  std::vector<CandidateLog> candidates;
  PlantState final_state;
  RunReport report;
};

/// Alternates plan_step and plant advance over `duration_min` (a multiple of
/// T_mini); closed-loop steps use the true interpolated series.
RunResult run_closed_loop(const Scenario& scenario, double duration_min,
                          const PlanOptions& options);

}  // namespace roadheat
