#include "roadheat/scenario.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>

namespace roadheat {
namespace {

using nlohmann::json;

double get_num(const json& obj, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number()) throw ConfigError(std::string("config key `") + key + "` must be a number");
  return obj[key].get<double>();
}

int get_int(const json& obj, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number_integer()) throw ConfigError(std::string("config key `") + key + "` must be an integer");
  return obj[key].get<int>();
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : obj.items()) {
    if (!known.count(item.key()))
      throw ConfigError("unknown config key `" + item.key() + "` in " + where);
  }
}

GridParams parse_grid(const json& obj) {
  GridParams g;
  reject_unknown(obj, {"base_apparent_power_va", "line_length_m", "ref_phase_rad",
                       "ref_amplitude_v", "cable_ref_amplitude_v", "transformer_ratio",
                       "base_conductance_m_per_ohm", "base_susceptance_m_per_ohm",
                       "line_conductance_pu", "line_susceptance_pu", "cable_conductance_pu",
                       "cable_susceptance_pu", "cable_load_power_pu", "load_position_m",
                       "pv_position_m", "battery_position_m"},
                 "grid");
  g.base_apparent_power_va = get_num(obj, "base_apparent_power_va", g.base_apparent_power_va);
  g.line_length_m = get_num(obj, "line_length_m", g.line_length_m);
  g.ref_phase_rad = get_num(obj, "ref_phase_rad", g.ref_phase_rad);
  g.ref_amplitude_v = get_num(obj, "ref_amplitude_v", g.ref_amplitude_v);
  g.cable_ref_amplitude_v = get_num(obj, "cable_ref_amplitude_v", g.cable_ref_amplitude_v);
  g.transformer_ratio = get_num(obj, "transformer_ratio", g.transformer_ratio);
  g.base_conductance = get_num(obj, "base_conductance_m_per_ohm", g.base_conductance);
  g.base_susceptance = get_num(obj, "base_susceptance_m_per_ohm", g.base_susceptance);
  g.line_conductance_pu = get_num(obj, "line_conductance_pu", g.line_conductance_pu);
  g.line_susceptance_pu = get_num(obj, "line_susceptance_pu", g.line_susceptance_pu);
  g.cable_conductance_pu = get_num(obj, "cable_conductance_pu", g.cable_conductance_pu);
  g.cable_susceptance_pu = get_num(obj, "cable_susceptance_pu", g.cable_susceptance_pu);
  g.cable_load_power_pu = get_num(obj, "cable_load_power_pu", g.cable_load_power_pu);
  g.load_position_m = get_num(obj, "load_position_m", g.load_position_m);
  g.pv_position_m = get_num(obj, "pv_position_m", g.pv_position_m);
  g.battery_position_m = get_num(obj, "battery_position_m", g.battery_position_m);
  return g;
}

ThermalParams parse_thermal(const json& obj) {
  ThermalParams t;
  reject_unknown(obj, {"radiative_cooling_w_per_cm", "cable_contact_w_per_m_k",
                       "cable_heat_capacity_j_per_cm_c", "soil_conductivity_w_per_m_k",
                       "cable_soil_transfer_w_per_m2_k", "burial_depth_cm",
                       "soil_diffusivity_m2_per_s", "ground_snow_transfer_w_per_m2_k",
                       "snow_temperature_c", "snow_density_g_per_cm3", "melt_unit_conversion",
                       "initial_snow_mm", "initial_soil_c"},
                 "thermal");
  t.radiative_cooling_w_per_cm = get_num(obj, "radiative_cooling_w_per_cm", t.radiative_cooling_w_per_cm);
  t.cable_contact_w_per_m_k = get_num(obj, "cable_contact_w_per_m_k", t.cable_contact_w_per_m_k);
  t.cable_heat_capacity_j_per_cm_c = get_num(obj, "cable_heat_capacity_j_per_cm_c", t.cable_heat_capacity_j_per_cm_c);
  t.soil_conductivity_w_per_m_k = get_num(obj, "soil_conductivity_w_per_m_k", t.soil_conductivity_w_per_m_k);
  t.cable_soil_transfer_w_per_m2_k = get_num(obj, "cable_soil_transfer_w_per_m2_k", t.cable_soil_transfer_w_per_m2_k);
  t.burial_depth_cm = get_num(obj, "burial_depth_cm", t.burial_depth_cm);
  t.soil_diffusivity_m2_per_s = get_num(obj, "soil_diffusivity_m2_per_s", t.soil_diffusivity_m2_per_s);
  t.ground_snow_transfer_w_per_m2_k = get_num(obj, "ground_snow_transfer_w_per_m2_k", t.ground_snow_transfer_w_per_m2_k);
  t.snow_temperature_c = get_num(obj, "snow_temperature_c", t.snow_temperature_c);
  t.snow_density_g_per_cm3 = get_num(obj, "snow_density_g_per_cm3", t.snow_density_g_per_cm3);
  t.melt_unit_conversion = get_num(obj, "melt_unit_conversion", t.melt_unit_conversion);
  t.initial_snow_mm = get_num(obj, "initial_snow_mm", t.initial_snow_mm);
  t.initial_soil_c = get_num(obj, "initial_soil_c", t.initial_soil_c);
  return t;
}

ControllerParams parse_controller(const json& obj) {
  ControllerParams c;
  reject_unknown(obj, {"t_mini_min", "t_pred_min", "weights", "battery_initial_puh",
                       "battery_reserve_floor_puh", "battery_capacity_puh", "zeta_guard_puh"},
                 "controller");
  c.t_mini_min = get_num(obj, "t_mini_min", c.t_mini_min);
  c.t_pred_min = get_num(obj, "t_pred_min", c.t_pred_min);
  if (obj.contains("weights")) {
    const json& w = obj["weights"];
    reject_unknown(w, {"loss", "fluc", "snow", "cost", "pvfluc", "stor1", "batteryfluc", "stor2"},
                   "controller.weights");
    c.weights.loss = get_num(w, "loss", c.weights.loss);
    c.weights.fluc = get_num(w, "fluc", c.weights.fluc);
    c.weights.snow = get_num(w, "snow", c.weights.snow);
    c.weights.cost = get_num(w, "cost", c.weights.cost);
    c.weights.pvfluc = get_num(w, "pvfluc", c.weights.pvfluc);
    c.weights.stor1 = get_num(w, "stor1", c.weights.stor1);
    c.weights.batteryfluc = get_num(w, "batteryfluc", c.weights.batteryfluc);
    c.weights.stor2 = get_num(w, "stor2", c.weights.stor2);
  }
  c.battery_initial_puh = get_num(obj, "battery_initial_puh", c.battery_initial_puh);
  c.battery_reserve_floor_puh = get_num(obj, "battery_reserve_floor_puh", c.battery_reserve_floor_puh);
  c.battery_capacity_puh = get_num(obj, "battery_capacity_puh", c.battery_capacity_puh);
  c.zeta_guard_puh = get_num(obj, "zeta_guard_puh", c.zeta_guard_puh);
  return c;
}

NumericsParams parse_numerics(const json& obj) {
  NumericsParams n;
  reject_unknown(obj, {"grid_cells", "depth_nodes", "sim_step_s", "solver_tol",
                       "battery_line_discharge_cap_pu"},
                 "numerics");
  n.grid_cells = get_int(obj, "grid_cells", n.grid_cells);
  n.depth_nodes = get_int(obj, "depth_nodes", n.depth_nodes);
  n.sim_step_s = get_num(obj, "sim_step_s", n.sim_step_s);
  n.solver_tol = get_num(obj, "solver_tol", n.solver_tol);
  n.battery_line_discharge_cap_pu = get_num(obj, "battery_line_discharge_cap_pu", n.battery_line_discharge_cap_pu);
  return n;
}

TimeSeries load_configured_series(const json& series_obj, const char* key, SeriesKind kind,
                                  const std::filesystem::path& base_dir, double step_s,
                                  double duration_min, bool required) {
  if (!series_obj.contains(key)) {
    if (required) throw ConfigError(std::string("series `") + key + "` is required");
    return TimeSeries{};
  }
  const json& entry = series_obj[key];
  reject_unknown(entry, {"file", "scale"}, std::string("series.") + key);
  if (!entry.contains("file")) throw ConfigError(std::string("series `") + key + "` needs a `file`");
  const std::filesystem::path file = base_dir / entry["file"].get<std::string>();
  TimeSeries raw = load_series_file(file.string(), kind);
  raw = rescale(std::move(raw), get_num(entry, "scale", 1.0));
  return interpolate_to_grid(raw, step_s, 0.0, duration_min);
}

}  // namespace

ExogenousSample Scenario::at(double t_min) const {
  ExogenousSample s;
  s.load_pu = sample_series(series.residential_load, t_min);
  s.pv_pu = sample_series(series.pv_generation, t_min);
  s.phi_r = sample_series(series.solar_flux, t_min);
  s.phi_s = sample_series(series.sensible_flux, t_min);
  s.phi_l = sample_series(series.latent_flux, t_min);
  s.f_snow_mm_min = sample_series(series.snowfall, t_min);
  s.t_air_c = sample_series(series.air_temperature, t_min);
  s.wind_ms = sample_series(series.wind_speed, t_min);
  return s;
}

Scenario load_scenario(const std::string& config_path) {
  std::ifstream in(config_path);
  if (!in) throw ConfigError("cannot open scenario config: " + config_path);
  json root;
  try {
    root = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(config_path + ": " + e.what());
  }

  reject_unknown(root, {"name", "duration_min", "grid", "thermal", "controller", "numerics",
                        "series", "bulk_flux"},
                 "config root");

  Scenario sc;
  sc.name = root.contains("name") ? root["name"].get<std::string>()
                                  : std::filesystem::path(config_path).parent_path().filename().string();
  sc.duration_min = get_num(root, "duration_min", sc.duration_min);
  if (root.contains("grid")) sc.grid = parse_grid(root["grid"]);
  if (root.contains("thermal")) sc.thermal = parse_thermal(root["thermal"]);
  if (root.contains("controller")) sc.ctrl = parse_controller(root["controller"]);
  if (root.contains("numerics")) sc.num = parse_numerics(root["numerics"]);
  if (root.contains("bulk_flux")) {
    const json& b = root["bulk_flux"];
    reject_unknown(b, {"sensible_coeff_ws_per_m3_k", "latent_coeff_ws_per_m3"}, "bulk_flux");
    sc.bulk.sensible_coeff = get_num(b, "sensible_coeff_ws_per_m3_k", sc.bulk.sensible_coeff);
    sc.bulk.latent_coeff = get_num(b, "latent_coeff_ws_per_m3", sc.bulk.latent_coeff);
  }

  if (!root.contains("series")) throw ConfigError("config needs a `series` section");
  const json& so = root["series"];
  reject_unknown(so, {"residential_load", "pv_generation", "solar_flux", "sensible_flux",
                      "latent_flux", "snowfall", "air_temperature", "wind_speed"},
                 "series");
  const std::filesystem::path base_dir = std::filesystem::path(config_path).parent_path();
  const double step = sc.num.sim_step_s;
  const double dur = sc.duration_min;
  sc.series.residential_load = load_configured_series(so, "residential_load",
                                                      SeriesKind::ResidentialLoad, base_dir, step, dur, true);
  sc.series.pv_generation = load_configured_series(so, "pv_generation", SeriesKind::PvGeneration,
                                                   base_dir, step, dur, true);
  sc.series.solar_flux = load_configured_series(so, "solar_flux", SeriesKind::SolarFlux,
                                                base_dir, step, dur, true);
  sc.series.snowfall = load_configured_series(so, "snowfall", SeriesKind::Snowfall,
                                              base_dir, step, dur, true);
  sc.series.air_temperature = load_configured_series(so, "air_temperature",
                                                     SeriesKind::AirTemperature, base_dir, step, dur, true);
  sc.series.wind_speed = load_configured_series(so, "wind_speed", SeriesKind::WindSpeed,
                                                base_dir, step, dur, true);
  sc.series.sensible_flux = load_configured_series(so, "sensible_flux", SeriesKind::SensibleFlux,
                                                   base_dir, step, dur, false);
  sc.series.latent_flux = load_configured_series(so, "latent_flux", SeriesKind::LatentFlux,
                                                 base_dir, step, dur, false);

  // bulk-transfer fallback keeps weather CSVs sufficient on their own
  if (sc.series.sensible_flux.size() == 0) {
    TimeSeries phi_s;
    phi_s.t_min = sc.series.wind_speed.t_min;
    phi_s.value = sc.bulk.sensible_coeff * sc.series.wind_speed.value *
                  (sc.series.air_temperature.value - sc.thermal.snow_temperature_c);
    sc.series.sensible_flux = std::move(phi_s);
  }
  if (sc.series.latent_flux.size() == 0) {
    TimeSeries phi_l;
    phi_l.t_min = sc.series.wind_speed.t_min;
    phi_l.value = sc.bulk.latent_coeff * sc.series.wind_speed.value;
    sc.series.latent_flux = std::move(phi_l);
  }

  validate(sc);
  return sc;
}

void validate(const Scenario& sc) {
  const GridParams& g = sc.grid;
  if (!(g.line_length_m > 0)) throw ConfigError("line_length_m must be positive");
  if (!(g.transformer_ratio > 0)) throw ConfigError("transformer_ratio must be positive");
  if (!(g.line_conductance_pu > 0 && g.line_susceptance_pu > 0 && g.cable_conductance_pu > 0 &&
        g.cable_susceptance_pu > 0))
    throw ConfigError("conductances and susceptances must be positive");
  if (g.cable_load_power_pu > 0) throw ConfigError("cable_load_power_pu must be <= 0");

  const ThermalParams& t = sc.thermal;
  if (!(t.cable_contact_w_per_m_k > 0 && t.cable_heat_capacity_j_per_cm_c > 0 &&
        t.soil_conductivity_w_per_m_k > 0 && t.cable_soil_transfer_w_per_m2_k > 0 &&
        t.soil_diffusivity_m2_per_s > 0 && t.ground_snow_transfer_w_per_m2_k > 0 &&
        t.snow_density_g_per_cm3 > 0 && t.melt_unit_conversion > 0))
    throw ConfigError("thermal transfer/capacity parameters must be positive");
  if (!(t.burial_depth_cm > 0)) throw ConfigError("burial_depth_cm must be positive");
  if (t.initial_snow_mm < 0) throw ConfigError("initial_snow_mm must be non-negative");

  const ControllerParams& c = sc.ctrl;
  if (!(c.t_mini_min > 0) || !(c.t_pred_min > 0))
    throw ConfigError("t_mini_min and t_pred_min must be positive");
  const double ratio = c.t_pred_min / c.t_mini_min;
  if (std::abs(ratio - std::round(ratio)) > 1e-9)
    throw ConfigError("t_pred_min must be a multiple of t_mini_min");
  if (c.horizon_slots() < 1) throw ConfigError("horizon must span at least one slot");
  const Weights& w = c.weights;
  if (w.loss < 0 || w.fluc < 0 || w.snow < 0 || w.cost < 0 || w.pvfluc < 0 || w.stor1 < 0 ||
      w.batteryfluc < 0 || w.stor2 < 0)
    throw ConfigError("weights must be non-negative");
  if (!(c.battery_reserve_floor_puh >= 0 && c.battery_reserve_floor_puh < c.battery_capacity_puh))
    throw ConfigError("battery floor must satisfy 0 <= floor < capacity");
  if (!(c.battery_initial_puh >= c.battery_reserve_floor_puh &&
        c.battery_initial_puh <= c.battery_capacity_puh))
    throw ConfigError("battery_initial_puh must lie in [floor, capacity]");
  if (!(c.zeta_guard_puh > 0)) throw ConfigError("zeta_guard_puh must be positive");

  const NumericsParams& n = sc.num;
  if (n.grid_cells < 2) throw ConfigError("grid_cells must be at least 2");
  if (n.depth_nodes < 3) throw ConfigError("depth_nodes must be at least 3");
  if (!(n.sim_step_s > 0)) throw ConfigError("sim_step_s must be positive");
  const double steps = c.t_mini_min * 60.0 / n.sim_step_s;
  if (std::abs(steps - std::round(steps)) > 1e-9)
    throw ConfigError("sim_step_s must divide t_mini_min evenly");

  if (sc.series.residential_load.size() < 2)
    throw ConfigError("residential load series missing or too short");
}

}  // namespace roadheat
