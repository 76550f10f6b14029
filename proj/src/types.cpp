#include "roadheat/types.hpp"

namespace roadheat {

ArrayXd linspace(double a, double b, Index n) {
  return ArrayXd::LinSpaced(n, a, b);
}

double trapezoid(const ArrayXd& x, const ArrayXd& y) {
  double acc = 0.0;
  for (Index i = 0; i + 1 < x.size(); ++i) {
    acc += 0.5 * (y(i) + y(i + 1)) * (x(i + 1) - x(i));
  }
  return acc;
}

}  // namespace roadheat
