#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace qiml {

// Central-difference gradient, the validation oracle for every analytic
// gradient in the project (parameter-shift, surrogate backward pass).
template <typename F>
std::vector<double> finite_diff_gradient(F&& f, std::vector<double> x,
                                         double h) {
  if (!(h > 0.0)) throw std::invalid_argument("finite_diff_gradient: h <= 0");
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    x[i] = xi + h;
    const double fp = f(x);
    x[i] = xi - h;
    const double fm = f(x);
    x[i] = xi;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw std::runtime_error(
          "finite_diff_gradient: non-finite evaluation at coordinate " +
          std::to_string(i));
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

}  // namespace qiml
