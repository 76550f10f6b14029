#pragma once

#include "roadheat/types.hpp"

#include <iosfwd>
#include <string>

namespace roadheat {

/// Sampled scalar series; times in minutes from scenario start, strictly increasing.
struct TimeSeries {
  ArrayXd t_min;
  ArrayXd value;

  Index size() const { return t_min.size(); }
};

enum class SeriesKind {
  Generic,
  ResidentialLoad,  // p.u., non-positive
  PvGeneration,     // p.u., non-negative
  SolarFlux,        // W/m^2
  SensibleFlux,     // W/m^2
  LatentFlux,       // W/m^2
  Snowfall,         // mm/min, non-negative
  AirTemperature,   // degC
  WindSpeed,        // m/s
};

/// Parses a `time,value` CSV. Times are minutes (float) or ISO-8601 stamps,
/// in which case minutes are counted from the first row. An optional header
/// line is skipped. Rows must be strictly increasing in time.
TimeSeries load_series(std::istream& in, SeriesKind kind = SeriesKind::Generic);
TimeSeries load_series_file(const std::string& path, SeriesKind kind = SeriesKind::Generic);

TimeSeries rescale(TimeSeries series, double factor);

/// Piecewise-linear resample onto the uniform grid t0, t0+step, ..., t1.
/// The window must lie inside the series support.
TimeSeries interpolate_to_grid(const TimeSeries& series, double step_s, double t0_min,
                               double t1_min);

/// Hold-constant forecast: the value at t_now repeated over [t_now, t_now+horizon).
TimeSeries predict(const TimeSeries& uniform, double t_now_min, double horizon_min);

/// Linear interpolation on a uniform series.
double sample_series(const TimeSeries& uniform, double t_min);

}  // namespace roadheat
