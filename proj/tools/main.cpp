#include "roadheat/controller.hpp"
#include "roadheat/oracles.hpp"
#include "roadheat/plant.hpp"
#include "roadheat/report.hpp"
#include "roadheat/scenario.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <thread>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitOracleMismatch = 3;

int default_threads() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void disable_battery(roadheat::Scenario& sc) {
  sc.ctrl.battery_capacity_puh = sc.ctrl.battery_reserve_floor_puh + 1e-9;
  sc.ctrl.battery_initial_puh = sc.ctrl.battery_reserve_floor_puh;
}

int cmd_run(const std::string& config, double duration, bool no_battery, bool joint, int threads,
            const std::string& out_dir, bool log_candidates, bool dump_profiles) {
  roadheat::Scenario sc = roadheat::load_scenario(config);
  if (no_battery) disable_battery(sc);
  if (duration < 0.0) duration = sc.duration_min;

  roadheat::PlanOptions options;
  options.threads = threads;
  options.joint = joint;
  options.log_candidates = log_candidates;

  const roadheat::RunResult run = roadheat::run_closed_loop(sc, duration, options);

  std::filesystem::create_directories(out_dir);
  const std::filesystem::path out(out_dir);
  roadheat::write_trajectory_csv((out / "trajectory.csv").string(), run);
  roadheat::write_thermal_csv((out / "thermal_final.csv").string(), run.final_state.thermal,
                              sc.grid);
  if (log_candidates)
    roadheat::write_planning_log_csv((out / "planning_log.csv").string(), run.candidates);
  if (dump_profiles && duration > 0.0) {
    // final-instant profiles under the last applied word
    roadheat::PlantState state = run.final_state;
    const roadheat::ControlWord word = run.slots.empty() ? roadheat::ControlWord{}
                                                         : run.slots.back().word;
    roadheat::StepOutputs outputs;
    const double t_last = state.t_min - sc.num.sim_step_s / 60.0;
    roadheat::PlantState probe = state;
    probe.t_min = t_last;
    roadheat::advance(probe, word, sc.at(t_last), sc, &outputs);
    roadheat::write_profile_csv((out / "line_profile_final.csv").string(), outputs.flows.line,
                                sc.grid);
    roadheat::write_profile_csv((out / "cable_profile_final.csv").string(), outputs.flows.cable,
                                sc.grid);
  }

  roadheat::print_report(std::cout, run.report, sc.name + (no_battery ? " (no battery)" : ""));
  return kExitOk;
}

int cmd_compare(const std::string& config_a, const std::string& config_b, double duration,
                int threads, const std::string& out_dir) {
  const roadheat::Scenario sa = roadheat::load_scenario(config_a);
  const roadheat::Scenario sb = roadheat::load_scenario(config_b);
  const double dur_a = duration < 0.0 ? sa.duration_min : duration;
  const double dur_b = duration < 0.0 ? sb.duration_min : duration;

  roadheat::PlanOptions options;
  options.threads = threads;

  const roadheat::RunResult ra = roadheat::run_closed_loop(sa, dur_a, options);
  const roadheat::RunResult rb = roadheat::run_closed_loop(sb, dur_b, options);
  const roadheat::CompareResult cmp = roadheat::compare_runs(ra, rb);

  std::filesystem::create_directories(out_dir);
  roadheat::write_compare_csv((std::filesystem::path(out_dir) / "compare.csv").string(), cmp);
  roadheat::print_compare(std::cout, cmp, sa.name, sb.name);
  return kExitOk;
}

int oracle_ladder(int cells, int ladder_cells) {
  using namespace roadheat;
  const GridParams grid;
  SolveOptions opt;
  opt.cells = cells;
  const double cell = 1.0 / cells;

  struct Case {
    std::string name;
    ConductorParams params;
    InjectionMap map;
    bool source_at_head;
  };
  std::vector<Case> cases;
  {
    ConductorParams line{grid.line_conductance_pu, grid.line_susceptance_pu};
    ConductorParams cable{grid.cable_conductance_pu, grid.cable_susceptance_pu};
    InjectionMap m1;
    m1.entries.push_back(top_hat_power(0.25, -0.9, cell));
    cases.push_back({"line load only", line, m1, true});
    InjectionMap m2 = m1;
    m2.entries.push_back(top_hat_power(0.50, 1.5, cell));
    cases.push_back({"line load+pv", line, m2, true});
    InjectionMap m3 = m2;
    m3.entries.push_back(top_hat_power(0.75, 1.0, cell));
    m3.entries.push_back(InjectionEntry{0.0, grid.cable_load_power_pu, 0.0, cell});
    cases.push_back({"line all devices + cable draw", line, m3, true});
    InjectionMap m4;
    m4.entries.push_back(InjectionEntry{1.0 - cell, grid.cable_load_power_pu, 0.0, cell});
    cases.push_back({"cable switch 1", cable, m4, true});
    InjectionMap m5;
    m5.entries.push_back(InjectionEntry{0.0, grid.cable_load_power_pu, 0.0, cell});
    cases.push_back({"cable switch 2", cable, m5, false});
  }

  bool ok = true;
  for (const Case& c : cases) {
    const BoundarySpec boundary = c.source_at_head ? boundary_head_voltage(0.0, 1.0)
                                                   : boundary_tail_voltage(0.0, 1.0);
    const auto t0 = std::chrono::steady_clock::now();
    const VoltageProfile prof = solve_profile(c.params, c.map, boundary, opt);
    const auto t1 = std::chrono::steady_clock::now();
    const auto ladder = oracles::ladder_solve(c.params, c.map, c.source_at_head, {1.0, 0.0},
                                              ladder_cells);
    const int stride = ladder_cells / cells;
    double max_rel = 0.0;
    for (int i = 0; i <= cells; ++i)
      max_rel = std::max(max_rel, std::abs(prof.v(i) - ladder.v(i * stride)));
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const bool pass = max_rel <= 1e-4;
    ok = ok && pass;
    std::printf("%-32s max|dv| %.3e  solve %.2f ms  %s\n", c.name.c_str(), max_rel, ms,
                pass ? "PASS" : "FAIL");
  }
  return ok ? kExitOk : kExitOracleMismatch;
}

int oracle_heat() {
  using namespace roadheat;
  ThermalParams params;
  bool ok = true;

  // steady two-Robin column against the series-resistance formula
  {
    const double cable_surface = 12.0;
    ThermalState st = ThermalState::initial(1, params, 41);
    st.surf_diff(0) = cable_surface;  // bath = surf_diff + soil bottom; soil starts at 0
    double err = 0.0;
    for (int i = 0; i < 40000; ++i) {
      const double bath = cable_surface;  // keep the cable-side bath pinned
      st.surf_diff(0) = bath - st.soil(st.soil.rows() - 1, 0);
      step_soil_column(st, 0, params, 5.0);
    }
    const auto steady = oracles::two_robin_steady(cable_surface, params);
    err = std::max(std::abs(st.soil(0, 0) - steady.surface_c),
                   std::abs(st.soil(st.soil.rows() - 1, 0) - steady.cable_side_c));
    const bool pass = err <= 1e-6;
    ok = ok && pass;
    std::printf("two-Robin steady profile        L_inf %.3e  %s\n", err, pass ? "PASS" : "FAIL");
  }

  // one exponential step of the cable-surface equation
  {
    ThermalState st = ThermalState::initial(1, params, 5);
    st.surf_diff(0) = 0.0;
    ArrayXd gamma = ArrayXd::Constant(1, 1000.0);
    step_cable_surface(st, gamma, params, 30.0);
    const double exact = oracles::exact_cable_surface_step(0.0, 1000.0, params, 30.0);
    const double err = std::abs(st.surf_diff(0) - exact);
    const bool pass = err <= 1e-10;
    ok = ok && pass;
    std::printf("cable-surface exponential step  err %.3e  %s\n", err, pass ? "PASS" : "FAIL");
  }
  return ok ? kExitOk : kExitOracleMismatch;
}

int oracle_enumeration(int horizon) {
  using namespace roadheat;
  Scenario sc = oracles::reduced_scenario();
  sc.ctrl.t_pred_min = sc.ctrl.t_mini_min * horizon;
  validate(sc);

  const PlantState plant = initial_state(sc);
  PlanOptions options;
  options.threads = 1;
  const PlanResult plan = plan_step(0, plant, sc, options);
  const ExogenousSample held = sc.at(plant.t_min);

  const auto a = oracles::exhaustive_stage_a(plant, sc, held);
  const auto b = oracles::exhaustive_stage_b(plant, sc, held, plan.pattern.switch_seq);
  const auto c = oracles::exhaustive_stage_c(plant, sc, held, plan.pattern.switch_seq,
                                             plan.pattern.pv_seq);

  const bool pass_a = a.found && a.best == plan.pattern.switch_seq && a.score == plan.stage_a_score;
  const bool pass_b = b.found && b.best == plan.pattern.pv_seq && b.score == plan.stage_b_score;
  const bool pass_c = c.found && c.best == plan.pattern.battery_seq && c.score == plan.stage_c_score;
  std::printf("stage A argmin vs exhaustive    %s\n", pass_a ? "PASS" : "FAIL");
  std::printf("stage B argmin vs exhaustive    %s\n", pass_b ? "PASS" : "FAIL");
  std::printf("stage C argmin vs exhaustive    %s\n", pass_c ? "PASS" : "FAIL");
  return (pass_a && pass_b && pass_c) ? kExitOk : kExitOracleMismatch;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"road-heating distribution system simulator and predictive switching controller"};
  app.require_subcommand(1);

  std::string config;
  std::string config_b;
  double duration = -1.0;
  bool no_battery = false;
  bool joint = false;
  int threads = default_threads();
  std::string out_dir = "out";
  bool log_candidates = false;
  bool dump_profiles = false;

  CLI::App* run = app.add_subcommand("run", "closed-loop run of one scenario");
  run->add_option("config", config, "scenario config JSON")->required();
  run->add_option("--duration", duration, "simulated minutes (default: scenario duration)");
  run->add_flag("--no-battery", no_battery, "disable the battery (capacity = reserve floor)");
  run->add_flag("--joint", joint, "also enumerate the joint 18^N pattern set (N <= 3)");
  run->add_option("--threads", threads, "worker threads for candidate rollouts");
  run->add_option("--out", out_dir, "output directory for CSV artifacts");
  run->add_flag("--log-candidates", log_candidates, "write planning_log.csv");
  run->add_flag("--dump-profiles", dump_profiles, "write final-instant voltage profiles");

  CLI::App* oracle = app.add_subcommand("oracle", "run a brute-force oracle check");
  std::string which;
  int cells = 200;
  int ladder_cells = 10000;
  int horizon = 2;
  oracle->add_option("name", which, "ladder | heat | enumeration")->required();
  oracle->add_option("--cells", cells, "spatial cells for the ODE solve");
  oracle->add_option("--ladder-cells", ladder_cells, "cells for the ladder oracle");
  oracle->add_option("--horizon", horizon, "slots for the enumeration oracle");

  CLI::App* compare = app.add_subcommand("compare", "side-by-side run of two scenario configs");
  compare->add_option("config_a", config, "first scenario config")->required();
  compare->add_option("config_b", config_b, "second scenario config")->required();
  compare->add_option("--duration", duration, "simulated minutes");
  compare->add_option("--threads", threads, "worker threads");
  compare->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (run->parsed())
      return cmd_run(config, duration, no_battery, joint, threads, out_dir, log_candidates,
                     dump_profiles);
    if (compare->parsed()) return cmd_compare(config, config_b, duration, threads, out_dir);
    if (oracle->parsed()) {
      if (which == "ladder") return oracle_ladder(cells, ladder_cells);
      if (which == "heat") return oracle_heat();
      if (which == "enumeration") return oracle_enumeration(horizon);
      std::cerr << "unknown oracle `" << which << "` (expected ladder, heat, or enumeration)\n";
      return kExitUsage;
    }
  } catch (const roadheat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const roadheat::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitUsage;
}
