#pragma once

#include "roadheat/controller.hpp"
#include "roadheat/plant.hpp"

#include <iosfwd>
#include <string>

namespace roadheat {

/// `t_min,switch_index,pv_dest,battery_dest,battery_puh,purchased_puh,max_vdev_pu,total_snow_mm`
/// one row per simulation step; total_snow_mm is the spatial mean depth.
void write_trajectory_csv(const std::string& path, const RunResult& result);

/// `x_m,surf_C,soil_top_C,soil_bottom_C,snow_mm` for one instant.
void write_thermal_csv(const std::string& path, const ThermalState& state, const GridParams& grid);

/// `x_m,theta_rad,v_pu,s_pu,w_pu,gamma_pu` for one instant.
void write_profile_csv(const std::string& path, const VoltageProfile& profile,
                       const GridParams& grid);

/// `k,stage,pattern,J,P_loss,V_fluc,S_snow,M_cost` one row per candidate.
void write_planning_log_csv(const std::string& path, const std::vector<CandidateLog>& log);

void print_report(std::ostream& out, const RunReport& report, const std::string& name);

struct CompareRow {
  int k = 0;
  double vdev_a_V = 0.0;
  double vdev_b_V = 0.0;
  double diff_V = 0.0;  // signed, a - b
};

struct CompareResult {
  RunReport report_a;
  RunReport report_b;
  std::vector<CompareRow> rows;
};

CompareResult compare_runs(const RunResult& a, const RunResult& b);

/// `k,vdev_a_V,vdev_b_V,diff_V` per slot (the signed per-slot deviation difference).
void write_compare_csv(const std::string& path, const CompareResult& cmp);

void print_compare(std::ostream& out, const CompareResult& cmp, const std::string& name_a,
                   const std::string& name_b);

}  // namespace roadheat
