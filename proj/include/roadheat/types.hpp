#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace roadheat {

using Eigen::ArrayXd;
using Eigen::Index;
using Eigen::Matrix2d;
using Eigen::MatrixXd;
using Eigen::Vector2d;
using Eigen::Vector4d;

/// Scenario or input data is malformed or inconsistent.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Text input rejected; carries the 1-based line number.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, long line)
      : ConfigError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Numerical failure inside a solver.
class SolverError : public std::runtime_error {
 public:
  enum class Kind { NoConvergence, VoltageCollapse, SingularSystem };

  SolverError(Kind kind, const std::string& what, double residual = 0.0)
      : std::runtime_error(what), kind_(kind), residual_(residual) {}

  Kind kind() const { return kind_; }
  double residual() const { return residual_; }

 private:
  Kind kind_;
  double residual_;
};

ArrayXd linspace(double a, double b, Index n);

/// Trapezoidal quadrature of samples y over abscissae x.
double trapezoid(const ArrayXd& x, const ArrayXd& y);

}  // namespace roadheat
