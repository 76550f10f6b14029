#include "roadheat/controller.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

namespace roadheat {
namespace {

constexpr double kInfeasible = std::numeric_limits<double>::infinity();

// Switch-stage tie preference: Off, then battery-fed, then purchased.
int switch_rank(int sw) {
  switch (sw) {
    case 0: return 0;
    case 2: return 1;
    default: return 2;
  }
}

bool switch_seq_less(const std::vector<int>& a, const std::vector<int>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int ra = switch_rank(a[i]);
    const int rb = switch_rank(b[i]);
    if (ra != rb) return ra < rb;
  }
  return false;
}

std::vector<int> decode_pattern(long code, int base, int slots) {
  std::vector<int> seq(static_cast<std::size_t>(slots));
  for (int l = 0; l < slots; ++l) {
    seq[static_cast<std::size_t>(l)] = static_cast<int>(code % base);
    code /= base;
  }
  return seq;
}

long int_pow(int base, int exp) {
  long r = 1;
  for (int i = 0; i < exp; ++i) r *= base;
  return r;
}

std::string pattern_string(const std::vector<int>& seq) {
  std::ostringstream out;
  for (std::size_t i = 0; i < seq.size(); ++i) {
    if (i) out << '-';
    out << seq[i];
  }
  return out.str();
}

ControlWord word_at(const PatternVec& pattern, int slot) {
  const std::size_t l = static_cast<std::size_t>(slot);
  return ControlWord{pattern.switch_seq[l], pattern.pv_seq[l] == 1, pattern.battery_seq[l]};
}

double slot_max(const Rollout& rollout, int slot,
                double (*get)(const StepRecord&)) {
  double m = 0.0;
  const int begin = slot * rollout.steps_per_slot;
  const int end = begin + rollout.steps_per_slot;
  for (int i = begin; i < end && i < static_cast<int>(rollout.steps.size()); ++i)
    m = std::max(m, get(rollout.steps[static_cast<std::size_t>(i)]));
  return m;
}

double sum_slot_peaks(const Rollout& rollout, double (*get)(const StepRecord&)) {
  const int slots =
      rollout.steps_per_slot > 0 ? static_cast<int>(rollout.steps.size()) / rollout.steps_per_slot : 0;
  double acc = 0.0;
  for (int l = 0; l < slots; ++l) acc += slot_max(rollout, l, get);
  return acc;
}

double get_vdev_V(const StepRecord& r) { return r.vdev_V; }

// Runs candidates [0, n) over `threads` workers; results are written by
// index, so the reduction order is schedule-independent. The first worker
// exception is rethrown on the calling thread.
template <typename Fn>
void parallel_for(long n, int threads, Fn&& fn) {
  const int workers = static_cast<int>(std::max<long>(1, std::min<long>(threads, n)));
  if (workers == 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  std::atomic<long> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      try {
        for (long i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

struct Candidate {
  std::vector<int> seq;
  double score = kInfeasible;
  bool feasible = false;
  ScoreBreakdown breakdown;
  Rollout rollout;
};

}  // namespace

Rollout rollout_pattern(PlantState plant, const PatternVec& pattern, const Scenario& sc,
                        const ExogenousSample& held) {
  Rollout out;
  out.steps_per_slot = sc.steps_per_slot();
  const int slots = static_cast<int>(pattern.switch_seq.size());
  out.steps.reserve(static_cast<std::size_t>(slots * out.steps_per_slot));
  for (int l = 0; l < slots; ++l) {
    const ControlWord word = word_at(pattern, l);
    if (!word_feasible_for_slot(word, plant.battery, sc)) {
      out.feasible = false;
      out.infeasible_slot = l;
      return out;
    }
    for (int step = 0; step < out.steps_per_slot; ++step) {
      try {
        out.steps.push_back(advance(plant, word, held, sc));
      } catch (const SolverError&) {
        // a candidate that cannot be solved (voltage collapse under this
        // pattern) is excluded from the argmin rather than aborting planning
        out.feasible = false;
        out.infeasible_slot = l;
        return out;
      }
    }
  }
  return out;
}

ScoreBreakdown score_J(const Rollout& rollout, const Weights& weights) {
  ScoreBreakdown b;
  for (const StepRecord& r : rollout.steps) {
    b.p_loss += r.loss_Wmin_inc;
    b.s_snow += r.snow_m2min_inc;
    b.m_cost += r.mcost_pumin_inc;
  }
  b.v_fluc = sum_slot_peaks(rollout, get_vdev_V);
  b.j_total = weights.loss * b.p_loss + weights.fluc * b.v_fluc + weights.snow * b.s_snow +
              weights.cost * b.m_cost;
  return b;
}

double score_J_pv(const Rollout& rollout, const Weights& weights, ScoreBreakdown* breakdown) {
  double b1 = 0.0;
  for (const StepRecord& r : rollout.steps) b1 += r.zeta1_min_inc;
  const double v = sum_slot_peaks(rollout, get_vdev_V);
  const double j = weights.pvfluc * v - weights.stor1 * b1;
  if (breakdown) {
    breakdown->v_pvfluc = v;
    breakdown->b_stor1 = b1;
    breakdown->j_pv = j;
  }
  return j;
}

double score_J_battery(const Rollout& rollout, const Weights& weights, ScoreBreakdown* breakdown) {
  double b2 = 0.0;
  for (const StepRecord& r : rollout.steps) b2 += r.zeta2_min_inc;
  const double v = sum_slot_peaks(rollout, get_vdev_V);
  const double j = weights.batteryfluc * v + weights.stor2 * b2;
  if (breakdown) {
    breakdown->v_batteryfluc = v;
    breakdown->b_stor2 = b2;
    breakdown->j_battery = j;
  }
  return j;
}

PlanResult plan_step(int k, const PlantState& plant, const Scenario& sc,
                     const PlanOptions& options) {
  const int N = sc.ctrl.horizon_slots();
  const ExogenousSample held = sc.at(plant.t_min);
  const Weights& weights = sc.ctrl.weights;

  PlanResult result;

  auto log_candidate = [&](char stage, const std::vector<int>& seq, const Candidate& c) {
    if (!options.log_candidates) return;
    CandidateLog entry;
    entry.k = k;
    entry.stage = stage;
    entry.pattern = pattern_string(seq);
    entry.score = c.score;
    entry.breakdown = c.breakdown;
    entry.feasible = c.feasible;
    result.log.push_back(std::move(entry));
  };

  // Stage A: switch patterns scored by J under the default policy
  // (PV to the line, battery routing forced by the coupling).
  const long n_sw = int_pow(3, N);
  std::vector<Candidate> stage_a(static_cast<std::size_t>(n_sw));
  parallel_for(n_sw, options.threads, [&](long code) {
    Candidate& c = stage_a[static_cast<std::size_t>(code)];
    c.seq = decode_pattern(code, 3, N);
    PatternVec pattern;
    pattern.switch_seq = c.seq;
    pattern.pv_seq.assign(static_cast<std::size_t>(N), 1);
    pattern.battery_seq.resize(static_cast<std::size_t>(N));
    for (int l = 0; l < N; ++l)
      pattern.battery_seq[static_cast<std::size_t>(l)] =
          c.seq[static_cast<std::size_t>(l)] == 2 ? 2 : 0;
    const Rollout rollout = rollout_pattern(plant, pattern, sc, held);
    c.feasible = rollout.feasible;
    if (rollout.feasible) {
      c.breakdown = score_J(rollout, weights);
      c.score = c.breakdown.j_total;
    }
  });
  result.rollouts += static_cast<int>(n_sw);

  const Candidate* best_a = nullptr;
  for (const Candidate& c : stage_a) {
    log_candidate('A', c.seq, c);
    if (!c.feasible) continue;
    if (!best_a || c.score < best_a->score ||
        (c.score == best_a->score && switch_seq_less(c.seq, best_a->seq)))
      best_a = &c;
  }

  if (!best_a) {
    std::cerr << "warning: every stage-A candidate infeasible at slot " << k
              << "; applying the all-off word\n";
    result.fallback = true;
    result.word = ControlWord{0, true, 0};
    result.pattern.switch_seq.assign(static_cast<std::size_t>(N), 0);
    result.pattern.pv_seq.assign(static_cast<std::size_t>(N), 1);
    result.pattern.battery_seq.assign(static_cast<std::size_t>(N), 0);
    return result;
  }
  result.pattern.switch_seq = best_a->seq;
  result.stage_a_score = best_a->score;

  // Stage B: PV patterns scored by J_pv with the stage-A switches fixed.
  const long n_pv = int_pow(2, N);
  std::vector<Candidate> stage_b(static_cast<std::size_t>(n_pv));
  parallel_for(n_pv, options.threads, [&](long code) {
    Candidate& c = stage_b[static_cast<std::size_t>(code)];
    c.seq = decode_pattern(code, 2, N);
    PatternVec pattern;
    pattern.switch_seq = result.pattern.switch_seq;
    pattern.pv_seq = c.seq;
    pattern.battery_seq.resize(static_cast<std::size_t>(N));
    for (int l = 0; l < N; ++l)
      pattern.battery_seq[static_cast<std::size_t>(l)] =
          pattern.switch_seq[static_cast<std::size_t>(l)] == 2 ? 2 : 0;
    const Rollout rollout = rollout_pattern(plant, pattern, sc, held);
    c.feasible = rollout.feasible;
    if (rollout.feasible) {
      c.breakdown = score_J(rollout, weights);
      c.score = score_J_pv(rollout, weights, &c.breakdown);
    }
  });
  result.rollouts += static_cast<int>(n_pv);

  const Candidate* best_b = nullptr;
  for (const Candidate& c : stage_b) {
    log_candidate('B', c.seq, c);
    if (!c.feasible) continue;
    if (!best_b || c.score < best_b->score ||
        (c.score == best_b->score && c.seq < best_b->seq))
      best_b = &c;
  }
  result.pattern.pv_seq = best_b ? best_b->seq : std::vector<int>(static_cast<std::size_t>(N), 1);
  if (best_b) result.stage_b_score = best_b->score;

  // Stage C: battery patterns scored by J_battery, coupling-feasible only.
  const long n_bat = int_pow(3, N);
  std::vector<Candidate> stage_c(static_cast<std::size_t>(n_bat));
  parallel_for(n_bat, options.threads, [&](long code) {
    Candidate& c = stage_c[static_cast<std::size_t>(code)];
    std::vector<int> seq = decode_pattern(code, 3, N);
    for (int l = 0; l < N; ++l) {
      const bool sw2 = result.pattern.switch_seq[static_cast<std::size_t>(l)] == 2;
      if (sw2 != (seq[static_cast<std::size_t>(l)] == 2)) return;  // coupling-invalid
    }
    c.seq = std::move(seq);
    PatternVec pattern;
    pattern.switch_seq = result.pattern.switch_seq;
    pattern.pv_seq = result.pattern.pv_seq;
    pattern.battery_seq = c.seq;
    Rollout rollout = rollout_pattern(plant, pattern, sc, held);
    c.feasible = rollout.feasible;
    if (rollout.feasible) {
      c.breakdown = score_J(rollout, weights);
      score_J_pv(rollout, weights, &c.breakdown);
      c.score = score_J_battery(rollout, weights, &c.breakdown);
      c.rollout = std::move(rollout);
    }
  });
  result.rollouts += static_cast<int>(n_bat);

  const Candidate* best_c = nullptr;
  for (const Candidate& c : stage_c) {
    if (c.seq.empty()) continue;  // coupling-invalid, never simulated
    log_candidate('C', c.seq, c);
    if (!c.feasible) continue;
    if (!best_c || c.score < best_c->score ||
        (c.score == best_c->score && c.seq < best_c->seq))
      best_c = &c;
  }
  if (best_c) {
    result.pattern.battery_seq = best_c->seq;
    result.stage_c_score = best_c->score;
    result.cascade_J = best_c->breakdown.j_total;
  } else {
    result.pattern.battery_seq.resize(static_cast<std::size_t>(N));
    for (int l = 0; l < N; ++l)
      result.pattern.battery_seq[static_cast<std::size_t>(l)] =
          result.pattern.switch_seq[static_cast<std::size_t>(l)] == 2 ? 2 : 0;
    result.cascade_J = result.stage_a_score;
  }

  result.word = word_at(result.pattern, 0);

  if (options.joint) {
    if (N > 3) throw ConfigError("joint enumeration is limited to horizons of three slots");
    const long n_joint = int_pow(18, N);
    std::vector<Candidate> joint(static_cast<std::size_t>(n_joint));
    parallel_for(n_joint, options.threads, [&](long code) {
      Candidate& c = joint[static_cast<std::size_t>(code)];
      const std::vector<int> digits = decode_pattern(code, 18, N);
      PatternVec pattern;
      pattern.switch_seq.resize(static_cast<std::size_t>(N));
      pattern.pv_seq.resize(static_cast<std::size_t>(N));
      pattern.battery_seq.resize(static_cast<std::size_t>(N));
      for (int l = 0; l < N; ++l) {
        const int d = digits[static_cast<std::size_t>(l)];
        const int sw = d % 3;
        const int pv = (d / 3) % 2;
        const int bd = d / 6;
        if ((sw == 2) != (bd == 2)) return;  // coupling-invalid
        pattern.switch_seq[static_cast<std::size_t>(l)] = sw;
        pattern.pv_seq[static_cast<std::size_t>(l)] = pv;
        pattern.battery_seq[static_cast<std::size_t>(l)] = bd;
      }
      c.seq.reserve(static_cast<std::size_t>(3 * N));
      c.seq.insert(c.seq.end(), pattern.switch_seq.begin(), pattern.switch_seq.end());
      c.seq.insert(c.seq.end(), pattern.pv_seq.begin(), pattern.pv_seq.end());
      c.seq.insert(c.seq.end(), pattern.battery_seq.begin(), pattern.battery_seq.end());
      const Rollout rollout = rollout_pattern(plant, pattern, sc, held);
      c.feasible = rollout.feasible;
      if (rollout.feasible) {
        c.breakdown = score_J(rollout, weights);
        c.score = c.breakdown.j_total;
      }
    });

    const Candidate* best_j = nullptr;
    for (const Candidate& c : joint) {
      if (c.seq.empty()) continue;
      log_candidate('J', c.seq, c);
      if (!c.feasible) continue;
      if (!best_j || c.score < best_j->score ||
          (c.score == best_j->score && c.seq < best_j->seq))
        best_j = &c;
    }
    if (best_j) {
      result.joint_J = best_j->score;
      PatternVec jp;
      const auto& s = best_j->seq;
      jp.switch_seq.assign(s.begin(), s.begin() + N);
      jp.pv_seq.assign(s.begin() + N, s.begin() + 2 * N);
      jp.battery_seq.assign(s.begin() + 2 * N, s.end());
      result.joint_pattern = std::move(jp);
    }
  }

  return result;
}

RunResult run_closed_loop(const Scenario& sc, double duration_min, const PlanOptions& options) {
  const double slots_real = duration_min / sc.ctrl.t_mini_min;
  if (std::abs(slots_real - std::round(slots_real)) > 1e-9)
    throw ConfigError("duration must be a multiple of t_mini_min");
  const int slots = static_cast<int>(std::lround(slots_real));
  const int steps_per_slot = sc.steps_per_slot();

  RunResult run;
  PlantState plant = initial_state(sc);
  double battery_min = plant.battery.energy_puh;
  double plan_seconds_total = 0.0;

  for (int k = 0; k < slots; ++k) {
    const auto t0 = std::chrono::steady_clock::now();
    PlanResult plan = plan_step(k, plant, sc, options);
    const auto t1 = std::chrono::steady_clock::now();
    const double plan_s = std::chrono::duration<double>(t1 - t0).count();
    plan_seconds_total += plan_s;
    for (auto& entry : plan.log) run.candidates.push_back(std::move(entry));

    plant.slot_vdev_pu = 0.0;
    for (int step = 0; step < steps_per_slot; ++step) {
      const ExogenousSample now = sc.at(plant.t_min);
      run.trajectory.push_back(advance(plant, plan.word, now, sc));
    }
    battery_min = std::min(battery_min, plant.battery.energy_puh);

    SlotLog slot;
    slot.k = k;
    slot.word = plan.word;
    slot.plan_seconds = plan_s;
    slot.slot_vdev_pu = plant.slot_vdev_pu;
    slot.slot_vdev_V = plant.slot_vdev_pu * sc.grid.ref_amplitude_v;
    slot.fallback = plan.fallback;
    run.slots.push_back(slot);
  }

  if (slots > 0) {
    run.report.purchased_puh = plant.purchased_puh;
    for (const SlotLog& s : run.slots) run.report.v_fluc_total_V += s.slot_vdev_V;
    run.report.final_snow_total_mm_m =
        trapezoid(linspace(0.0, 1.0, plant.thermal.snow.size()), plant.thermal.snow) *
        sc.grid.line_length_m;
    run.report.battery_final_puh = plant.battery.energy_puh;
    run.report.battery_min_puh = battery_min;
    run.report.wall_time_per_plan_step_s = plan_seconds_total / slots;
  }
  run.final_state = std::move(plant);
  return run;
}

}  // namespace roadheat
