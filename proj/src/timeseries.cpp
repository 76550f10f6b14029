#include "roadheat/timeseries.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>
#include <vector>

namespace roadheat {
namespace {

constexpr double kTimeTol = 1e-9;

std::string trim(const std::string& in) {
  std::size_t a = 0;
  std::size_t b = in.size();
  while (a < b && std::isspace(static_cast<unsigned char>(in[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(in[b - 1]))) --b;
  return in.substr(a, b - a);
}

bool parse_double(const std::string& text, double& out) {
  const std::string t = trim(text);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size() && std::isfinite(out);
}

// Days since 1970-01-01 for a civil date (Hinnant's algorithm).
long long civil_days(int y, int m, int d) {
  y -= m <= 2;
  const long long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return era * 146097LL + static_cast<long long>(doe) - 719468LL;
}

// "YYYY-MM-DD[T ]HH:MM[:SS]" -> minutes since the Unix epoch.
bool parse_iso8601_minutes(const std::string& text, double& minutes) {
  const std::string t = trim(text);
  int y = 0, mo = 0, d = 0, hh = 0, mm = 0;
  double ss = 0.0;
  char sep = 0;
  int consumed = 0;
  int n = std::sscanf(t.c_str(), "%d-%d-%d%c%d:%d%n", &y, &mo, &d, &sep, &hh, &mm, &consumed);
  if (n < 6 || (sep != 'T' && sep != ' ')) return false;
  if (static_cast<std::size_t>(consumed) < t.size()) {
    if (t[static_cast<std::size_t>(consumed)] != ':') return false;
    if (!parse_double(t.substr(static_cast<std::size_t>(consumed) + 1), ss)) return false;
  }
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || hh > 23 || mm > 59 || ss < 0.0 || ss >= 60.0)
    return false;
  minutes = static_cast<double>(civil_days(y, mo, d)) * 1440.0 + hh * 60.0 + mm + ss / 60.0;
  return true;
}

const char* kind_name(SeriesKind kind) {
  switch (kind) {
    case SeriesKind::ResidentialLoad: return "residential load";
    case SeriesKind::PvGeneration: return "pv generation";
    case SeriesKind::Snowfall: return "snowfall";
    default: return "series";
  }
}

void check_sign(SeriesKind kind, const ArrayXd& values) {
  const double lo = values.minCoeff();
  const double hi = values.maxCoeff();
  if (kind == SeriesKind::ResidentialLoad && hi > kTimeTol)
    throw ConfigError(std::string(kind_name(kind)) + " must be non-positive");
  if ((kind == SeriesKind::PvGeneration || kind == SeriesKind::Snowfall) && lo < -kTimeTol)
    throw ConfigError(std::string(kind_name(kind)) + " must be non-negative");
}

}  // namespace

TimeSeries load_series(std::istream& in, SeriesKind kind) {
  std::vector<double> times;
  std::vector<double> values;
  std::string line;
  long line_no = 0;
  bool iso_mode = false;
  double iso_origin = 0.0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;

    const std::size_t comma = stripped.find(',');
    if (comma == std::string::npos) throw ParseError("expected `time,value`", line_no);
    const std::string time_field = stripped.substr(0, comma);
    const std::string value_field = stripped.substr(comma + 1);
    if (value_field.find(',') != std::string::npos)
      throw ParseError("expected exactly two columns", line_no);

    double t = 0.0;
    double v = 0.0;
    const bool t_numeric = parse_double(time_field, t);
    const bool t_iso = !t_numeric && parse_iso8601_minutes(time_field, t);
    if (!t_numeric && !t_iso) {
      // allow a single header line such as `time,value`
      if (times.empty() && !iso_mode && !parse_double(value_field, v)) continue;
      throw ParseError("unparseable time field `" + trim(time_field) + "`", line_no);
    }
    if (!parse_double(value_field, v))
      throw ParseError("unparseable value field `" + trim(value_field) + "`", line_no);

    if (t_iso) {
      if (times.empty()) {
        iso_mode = true;
        iso_origin = t;
      } else if (!iso_mode) {
        throw ParseError("mixed ISO-8601 and numeric times", line_no);
      }
      t -= iso_origin;
    } else if (iso_mode) {
      throw ParseError("mixed ISO-8601 and numeric times", line_no);
    }

    if (!times.empty() && t <= times.back() + kTimeTol)
      throw ParseError("timestamps must be strictly increasing", line_no);
    times.push_back(t);
    values.push_back(v);
  }

  if (times.empty()) throw ConfigError("series has no data rows");

  TimeSeries series;
  series.t_min = Eigen::Map<ArrayXd>(times.data(), static_cast<Index>(times.size()));
  series.value = Eigen::Map<ArrayXd>(values.data(), static_cast<Index>(values.size()));
  check_sign(kind, series.value);
  return series;
}

TimeSeries load_series_file(const std::string& path, SeriesKind kind) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open series file: " + path);
  try {
    return load_series(in, kind);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

TimeSeries rescale(TimeSeries series, double factor) {
  if (!std::isfinite(factor)) throw ConfigError("rescale factor must be finite");
  series.value *= factor;
  return series;
}

TimeSeries interpolate_to_grid(const TimeSeries& series, double step_s, double t0_min,
                               double t1_min) {
  if (series.size() < 2) throw ConfigError("interpolation needs at least two samples");
  if (step_s <= 0.0) throw ConfigError("interpolation step must be positive");
  if (t0_min < series.t_min(0) - kTimeTol || t1_min > series.t_min(series.size() - 1) + kTimeTol)
    throw ConfigError("requested window lies outside the series support (no extrapolation)");

  const double step_min = step_s / 60.0;
  const Index n = static_cast<Index>(std::llround((t1_min - t0_min) / step_min)) + 1;
  TimeSeries out;
  out.t_min = linspace(t0_min, t0_min + step_min * static_cast<double>(n - 1), n);
  out.value = ArrayXd::Zero(n);

  Index seg = 0;
  for (Index i = 0; i < n; ++i) {
    const double t = out.t_min(i);
    while (seg + 2 < series.size() && series.t_min(seg + 1) < t) ++seg;
    const double ta = series.t_min(seg);
    const double tb = series.t_min(seg + 1);
    const double u = std::clamp((t - ta) / (tb - ta), 0.0, 1.0);
    out.value(i) = series.value(seg) + u * (series.value(seg + 1) - series.value(seg));
  }
  // endpoints of the support are reproduced exactly
  if (std::abs(out.t_min(0) - series.t_min(0)) <= kTimeTol) out.value(0) = series.value(0);
  if (std::abs(out.t_min(n - 1) - series.t_min(series.size() - 1)) <= kTimeTol)
    out.value(n - 1) = series.value(series.size() - 1);
  return out;
}

TimeSeries predict(const TimeSeries& uniform, double t_now_min, double horizon_min) {
  TimeSeries out;
  if (uniform.size() < 2) throw ConfigError("predict needs a uniform series");
  const double step = uniform.t_min(1) - uniform.t_min(0);
  const Index n = static_cast<Index>(std::floor(horizon_min / step + kTimeTol));
  const double held = sample_series(uniform, t_now_min);
  out.t_min = ArrayXd::Zero(n);
  out.value = ArrayXd::Constant(n, held);
  for (Index i = 0; i < n; ++i) out.t_min(i) = t_now_min + step * static_cast<double>(i);
  return out;
}

double sample_series(const TimeSeries& uniform, double t_min) {
  const Index n = uniform.size();
  if (n == 1) return uniform.value(0);
  const double step = uniform.t_min(1) - uniform.t_min(0);
  const double pos = (t_min - uniform.t_min(0)) / step;
  if (pos < -kTimeTol || pos > static_cast<double>(n - 1) + kTimeTol)
    throw ConfigError("sample time outside the series window");
  const Index i = std::min(static_cast<Index>(std::max(pos, 0.0)), n - 2);
  const double u = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
  return uniform.value(i) + u * (uniform.value(i + 1) - uniform.value(i));
}

}  // namespace roadheat
