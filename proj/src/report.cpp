#include "roadheat/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace roadheat {
namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::binary);  // LF line endings on every platform
  if (!out) throw ConfigError("cannot write file: " + path);
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

void write_trajectory_csv(const std::string& path, const RunResult& result) {
  std::ofstream out = open_csv(path);
  out << "t_min,switch_index,pv_dest,battery_dest,battery_puh,purchased_puh,max_vdev_pu,total_snow_mm\n";
  double purchased = 0.0;
  double slot_vdev = 0.0;
  std::size_t in_slot = 0;
  const std::size_t steps_per_slot =
      result.slots.empty() ? result.trajectory.size()
                           : result.trajectory.size() / result.slots.size();
  for (const StepRecord& r : result.trajectory) {
    if (in_slot == 0) slot_vdev = 0.0;
    purchased += r.purchased_puh_inc;
    slot_vdev = std::max(slot_vdev, r.vdev_pu);
    out << num(r.t_min) << ',' << r.switch_index << ',' << r.pv_to_line << ',' << r.battery_dest
        << ',' << num(r.battery_puh_end) << ',' << num(purchased) << ',' << num(slot_vdev) << ','
        << num(r.snow_mean_mm) << '\n';
    in_slot = (in_slot + 1) % std::max<std::size_t>(steps_per_slot, 1);
  }
}

void write_thermal_csv(const std::string& path, const ThermalState& state,
                       const GridParams& grid) {
  std::ofstream out = open_csv(path);
  out << "x_m,surf_C,soil_top_C,soil_bottom_C,snow_mm\n";
  const Index nx = state.snow.size();
  const ArrayXd surf = state.surface_temperature();
  for (Index i = 0; i < nx; ++i) {
    const double x_m = grid.line_length_m * static_cast<double>(i) / static_cast<double>(nx - 1);
    out << num(x_m) << ',' << num(surf(i)) << ',' << num(state.soil(0, i)) << ','
        << num(state.soil(state.soil.rows() - 1, i)) << ',' << num(state.snow(i)) << '\n';
  }
}

void write_profile_csv(const std::string& path, const VoltageProfile& profile,
                       const GridParams& grid) {
  std::ofstream out = open_csv(path);
  out << "x_m,theta_rad,v_pu,s_pu,w_pu,gamma_pu\n";
  for (Index i = 0; i < profile.x.size(); ++i) {
    out << num(profile.x(i) * grid.line_length_m) << ',' << num(profile.theta(i)) << ','
        << num(profile.v(i)) << ',' << num(profile.s(i)) << ',' << num(profile.w(i)) << ','
        << num(profile.gamma(i)) << '\n';
  }
}

void write_planning_log_csv(const std::string& path, const std::vector<CandidateLog>& log) {
  std::ofstream out = open_csv(path);
  out << "k,stage,pattern,J,P_loss,V_fluc,S_snow,M_cost\n";
  for (const CandidateLog& c : log) {
    out << c.k << ',' << c.stage << ',' << c.pattern << ','
        << (c.feasible ? num(c.score) : "inf") << ',' << num(c.breakdown.p_loss) << ','
        << num(c.breakdown.v_fluc) << ',' << num(c.breakdown.s_snow) << ','
        << num(c.breakdown.m_cost) << '\n';
  }
}

void print_report(std::ostream& out, const RunReport& report, const std::string& name) {
  out << "run report (" << name << ")\n"
      << "  purchased energy        " << num(report.purchased_puh) << " p.u.h\n"
      << "  voltage fluctuation sum " << num(report.v_fluc_total_V) << " V\n"
      << "  final snow integral     " << num(report.final_snow_total_mm_m) << " mm.m\n"
      << "  battery final / min     " << num(report.battery_final_puh) << " / "
      << num(report.battery_min_puh) << " p.u.h\n"
      << "  wall time per plan step " << num(report.wall_time_per_plan_step_s) << " s\n";
}

CompareResult compare_runs(const RunResult& a, const RunResult& b) {
  CompareResult cmp;
  cmp.report_a = a.report;
  cmp.report_b = b.report;
  const std::size_t n = std::min(a.slots.size(), b.slots.size());
  cmp.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CompareRow row;
    row.k = a.slots[i].k;
    row.vdev_a_V = a.slots[i].slot_vdev_V;
    row.vdev_b_V = b.slots[i].slot_vdev_V;
    row.diff_V = row.vdev_a_V - row.vdev_b_V;
    cmp.rows.push_back(row);
  }
  return cmp;
}

void write_compare_csv(const std::string& path, const CompareResult& cmp) {
  std::ofstream out = open_csv(path);
  out << "k,vdev_a_V,vdev_b_V,diff_V\n";
  for (const CompareRow& row : cmp.rows) {
    out << row.k << ',' << num(row.vdev_a_V) << ',' << num(row.vdev_b_V) << ','
        << num(row.diff_V) << '\n';
  }
}

void print_compare(std::ostream& out, const CompareResult& cmp, const std::string& name_a,
                   const std::string& name_b) {
  out << "comparison: " << name_a << " vs " << name_b << '\n';
  out << "  purchased energy [p.u.h]   " << num(cmp.report_a.purchased_puh) << " vs "
      << num(cmp.report_b.purchased_puh) << '\n';
  out << "  voltage fluctuation [V]    " << num(cmp.report_a.v_fluc_total_V) << " vs "
      << num(cmp.report_b.v_fluc_total_V) << '\n';
  out << "  final snow [mm.m]          " << num(cmp.report_a.final_snow_total_mm_m) << " vs "
      << num(cmp.report_b.final_snow_total_mm_m) << '\n';
  out << "  per-slot deviation difference (signed, a-b) [V]:\n";
  for (const CompareRow& row : cmp.rows) {
    out << "    k=" << row.k << "  " << num(row.diff_V) << '\n';
  }
}

}  // namespace roadheat
