#include "roadheat/powerflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

namespace roadheat {
namespace {

// State layout: y = (theta, v, s, w).
Vector4d ode_rhs(const Vector4d& y, double p, double q, double g, double b) {
  const double v = y(1);
  const double s = y(2);
  const double w = y(3);
  const double denom = g * g + b * b;
  Vector4d f;
  f(0) = -s / (v * v);
  f(1) = w;
  f(2) = (b * p - g * q) / denom;
  f(3) = s * s / (v * v * v) - (g * p + b * q) / (denom * v);
  return f;
}

// RK4 with n equal substeps across one cell of constant injection density.
// Returns false when the amplitude drops through the collapse floor.
bool rk4_cell(Vector4d& y, double p, double q, double g, double b, double dx, int n,
              double v_floor) {
  const double h = dx / n;
  for (int i = 0; i < n; ++i) {
    if (y(1) <= v_floor) return false;
    const Vector4d k1 = ode_rhs(y, p, q, g, b);
    Vector4d y2 = y + 0.5 * h * k1;
    if (y2(1) <= v_floor) return false;
    const Vector4d k2 = ode_rhs(y2, p, q, g, b);
    Vector4d y3 = y + 0.5 * h * k2;
    if (y3(1) <= v_floor) return false;
    const Vector4d k3 = ode_rhs(y3, p, q, g, b);
    Vector4d y4 = y + h * k3;
    if (y4(1) <= v_floor) return false;
    const Vector4d k4 = ode_rhs(y4, p, q, g, b);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y(1) > v_floor;
}

// Step-doubling refinement: accept once two successive halvings agree.
bool integrate_cell(Vector4d& y, double p, double q, double g, double b, double dx,
                    double v_floor) {
  constexpr double kIntTol = 1e-13;
  Vector4d coarse = y;
  if (!rk4_cell(coarse, p, q, g, b, dx, 1, v_floor)) return false;
  for (int n = 2; n <= 64; n *= 2) {
    Vector4d fine = y;
    if (!rk4_cell(fine, p, q, g, b, dx, n, v_floor)) return false;
    if ((fine - coarse).cwiseAbs().maxCoeff() <= kIntTol * (1.0 + fine.norm())) {
      y = fine;
      return true;
    }
    coarse = fine;
  }
  y = coarse;
  return true;
}

struct EndSpec {
  std::array<std::optional<double>, 4> comp;  // theta, v, s, w
  int fixed_count() const {
    int c = 0;
    for (const auto& v : comp) c += v.has_value() ? 1 : 0;
    return c;
  }
};

EndSpec head_of(const BoundarySpec& b) {
  return EndSpec{{b.head_theta, b.head_v, b.head_s, b.head_w}};
}
EndSpec tail_of(const BoundarySpec& b) {
  return EndSpec{{b.tail_theta, b.tail_v, b.tail_s, b.tail_w}};
}

}  // namespace

InjectionEntry top_hat_power(double position, double total_power, double width) {
  return InjectionEntry{position, total_power / width, 0.0, width};
}

BoundarySpec boundary_head_voltage(double theta, double v) {
  BoundarySpec b;
  b.head_theta = theta;
  b.head_v = v;
  b.tail_s = 0.0;
  b.tail_w = 0.0;
  return b;
}

BoundarySpec boundary_tail_voltage(double theta, double v) {
  BoundarySpec b;
  b.head_s = 0.0;
  b.head_w = 0.0;
  b.tail_theta = theta;
  b.tail_v = v;
  return b;
}

void resolve_densities(const InjectionMap& map, int cells, ArrayXd& p, ArrayXd& q) {
  const double dx = 1.0 / cells;
  p = ArrayXd::Zero(cells);
  q = ArrayXd::Zero(cells);
  for (const InjectionEntry& e : map.entries) {
    const double a = std::clamp(e.position, 0.0, 1.0);
    const double b = std::clamp(e.position + e.width, 0.0, 1.0);
    if (b <= a) continue;
    const int j0 = std::clamp(static_cast<int>(std::floor(a / dx)), 0, cells - 1);
    const int j1 = std::clamp(static_cast<int>(std::ceil(b / dx)), 1, cells);
    for (int j = j0; j < j1; ++j) {
      const double lo = std::max(a, j * dx);
      const double hi = std::min(b, (j + 1) * dx);
      if (hi <= lo) continue;
      const double frac = (hi - lo) / dx;
      p(j) += e.density * frac;
      q(j) += e.q_density * frac;
    }
  }
}

VoltageProfile zero_profile(int cells) {
  VoltageProfile prof;
  prof.x = linspace(0.0, 1.0, cells + 1);
  prof.theta = ArrayXd::Zero(cells + 1);
  prof.v = ArrayXd::Zero(cells + 1);
  prof.s = ArrayXd::Zero(cells + 1);
  prof.w = ArrayXd::Zero(cells + 1);
  prof.gamma = ArrayXd::Zero(cells + 1);
  return prof;
}

VoltageProfile solve_profile(const ConductorParams& params, const InjectionMap& injections,
                             const BoundarySpec& boundary, const SolveOptions& options) {
  const int M = options.cells;
  const EndSpec head = head_of(boundary);
  const EndSpec tail = tail_of(boundary);
  if (head.fixed_count() != 2 || tail.fixed_count() != 2)
    throw ConfigError("boundary must fix exactly two values at each end");

  ArrayXd p_cell, q_cell;
  resolve_densities(injections, M, p_cell, q_cell);

  std::array<int, 2> free_idx{};
  {
    int n = 0;
    for (int i = 0; i < 4; ++i)
      if (!head.comp[static_cast<std::size_t>(i)]) free_idx[static_cast<std::size_t>(n++)] = i;
  }
  std::array<int, 2> target_idx{};
  Vector2d target_val;
  {
    int n = 0;
    for (int i = 0; i < 4; ++i) {
      if (tail.comp[static_cast<std::size_t>(i)]) {
        target_idx[static_cast<std::size_t>(n)] = i;
        target_val(n) = *tail.comp[static_cast<std::size_t>(i)];
        ++n;
      }
    }
  }

  const double dx = 1.0 / M;
  MatrixXd nodes(4, M + 1);

  // Shoot from the head; returns false when the trajectory collapses.
  auto shoot = [&](const Vector2d& u, Vector2d& residual, bool record) -> bool {
    Vector4d y;
    for (int i = 0; i < 4; ++i) {
      const auto& fixed = head.comp[static_cast<std::size_t>(i)];
      y(i) = fixed ? *fixed : 0.0;
    }
    y(free_idx[0]) = u(0);
    y(free_idx[1]) = u(1);
    if (record) nodes.col(0) = y;
    for (int j = 0; j < M; ++j) {
      if (!integrate_cell(y, p_cell(j), q_cell(j), params.g, params.b, dx, options.v_floor))
        return false;
      if (record) nodes.col(j + 1) = y;
    }
    residual(0) = y(target_idx[0]) - target_val(0);
    residual(1) = y(target_idx[1]) - target_val(1);
    return true;
  };

  // Flat-profile initial guess: free voltage values start from the fixed
  // tail values, free flow values from zero.
  Vector2d u;
  for (int n = 0; n < 2; ++n) {
    const int idx = free_idx[static_cast<std::size_t>(n)];
    double guess = 0.0;
    if (tail.comp[static_cast<std::size_t>(idx)]) guess = *tail.comp[static_cast<std::size_t>(idx)];
    else if (idx == 1) guess = 1.0;
    u(n) = guess;
  }

  Vector2d r;
  if (!shoot(u, r, false))
    throw SolverError(SolverError::Kind::VoltageCollapse,
                      "voltage collapse along the initial shooting trajectory");

  bool collapsed_trial = false;
  for (int iter = 0; iter < options.max_newton; ++iter) {
    const double rnorm = r.cwiseAbs().maxCoeff();
    if (rnorm <= options.tol) {
      Vector2d final_r;
      shoot(u, final_r, true);
      VoltageProfile prof;
      prof.x = linspace(0.0, 1.0, M + 1);
      prof.theta = nodes.row(0).transpose().array();
      prof.v = nodes.row(1).transpose().array();
      prof.s = nodes.row(2).transpose().array();
      prof.w = nodes.row(3).transpose().array();
      prof.gamma = ArrayXd::Zero(M + 1);
      return prof;
    }

    // forward-difference Jacobian
    Matrix2d J;
    bool fd_ok = true;
    for (int n = 0; n < 2; ++n) {
      const double h = 1e-7 * std::max(1.0, std::abs(u(n)));
      Vector2d up = u;
      up(n) += h;
      Vector2d rp;
      if (!shoot(up, rp, false)) {
        up(n) = u(n) - h;
        if (!shoot(up, rp, false)) {
          fd_ok = false;
          collapsed_trial = true;
          break;
        }
        J.col(n) = (r - rp) / h;
      } else {
        J.col(n) = (rp - r) / h;
      }
    }
    if (!fd_ok) break;

    const Vector2d step = J.fullPivLu().solve(-r);
    if (!step.allFinite())
      throw SolverError(SolverError::Kind::SingularSystem,
                        "singular shooting Jacobian", r.cwiseAbs().maxCoeff());

    // damped update with bisection backtracking
    double lambda = 1.0;
    bool accepted = false;
    for (int back = 0; back < 12; ++back) {
      const Vector2d u_try = u + lambda * step;
      Vector2d r_try;
      if (shoot(u_try, r_try, false) && r_try.cwiseAbs().maxCoeff() < rnorm) {
        u = u_try;
        r = r_try;
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    if (!accepted) break;
  }

  std::ostringstream msg;
  msg << "shooting did not converge; residual " << r.cwiseAbs().maxCoeff();
  throw SolverError(collapsed_trial ? SolverError::Kind::VoltageCollapse
                                    : SolverError::Kind::NoConvergence,
                    msg.str(), r.cwiseAbs().maxCoeff());
}

ArrayXd loss_density_line(const VoltageProfile& profile, double g_e) {
  if ((profile.v <= 0.0).any())
    throw SolverError(SolverError::Kind::VoltageCollapse,
                      "loss density needs an energized profile (v > 0)");
  return 3.0 * g_e * (profile.w.square() + profile.s.square() / profile.v.square());
}

ArrayXd loss_density_cable(const VoltageProfile& profile, double g_h) {
  if ((profile.v <= 0.0).any())
    throw SolverError(SolverError::Kind::VoltageCollapse,
                      "loss density needs an energized profile (v > 0)");
  return g_h * (profile.w.square() + profile.s.square() / profile.v.square());
}

CoupledFlows couple_line_and_cable(const GridParams& grid, const ControlWord& word,
                                   InjectionMap line_map, const InjectionMap& cable_map,
                                   const SolveOptions& options) {
  const double cell = 1.0 / options.cells;
  if (word.switch_index == 1) {
    // The terminal load mirrors onto the line head through the lossless
    // transformer; purchased power accrues in the plant ledger.
    line_map.entries.push_back(InjectionEntry{0.0, grid.cable_load_power_pu, 0.0, cell});
  }

  CoupledFlows out;
  const ConductorParams line_params{grid.line_conductance_pu, grid.line_susceptance_pu};
  out.line = solve_profile(line_params, line_map,
                           boundary_head_voltage(grid.ref_phase_rad, 1.0), options);
  out.line.gamma = loss_density_line(out.line, grid.line_conductance_pu);
  out.theta2 = out.line.theta(out.line.theta.size() - 1);
  out.v2 = out.line.v(out.line.v.size() - 1);

  const ConductorParams cable_params{grid.cable_conductance_pu, grid.cable_susceptance_pu};
  switch (word.switch_index) {
    case 0:
      out.cable = zero_profile(options.cells);
      break;
    case 1:
      out.cable = solve_profile(cable_params, cable_map,
                                boundary_head_voltage(grid.ref_phase_rad, 1.0), options);
      out.cable.gamma = loss_density_cable(out.cable, grid.cable_conductance_pu);
      break;
    case 2:
      out.cable = solve_profile(cable_params, cable_map,
                                boundary_tail_voltage(grid.ref_phase_rad, 1.0), options);
      out.cable.gamma = loss_density_cable(out.cable, grid.cable_conductance_pu);
      break;
    default:
      throw std::invalid_argument("switch index must be 0, 1, or 2");
  }
  return out;
}

}  // namespace roadheat
