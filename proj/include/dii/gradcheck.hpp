#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "dii/core_math.hpp"
#include "dii/types.hpp"

namespace dii {

struct GradientCheck {
  std::vector<double> analytic;
  std::vector<double> numeric;
  std::vector<double> relative_error;  // 0 where both components vanish
  double lambda = 0.0;
  double max_relative_error = 0.0;
};

/// Compares the analytic gradient against central differences of the DII at
/// fixed lambda (the adaptive value at `w`), step rel_step * |w^a|.
/// Components with w^a = 0 are differenced with an absolute step.
inline GradientCheck check_gradient(const DataMatrix& data, const WeightVector& w,
                                    const RankMatrix& ranks_b, double rel_step = 1e-6) {
  GradientCheck out;
  const auto ev = evaluate_dii(data, w, ranks_b, std::nullopt);
  out.lambda = ev.lambda;
  out.analytic = dii_gradient(data, w, ev.distances, ev.coefficients, ranks_b);
  out.numeric.resize(w.size());
  out.relative_error.resize(w.size());
  for (std::size_t a = 0; a < w.size(); ++a) {
    const double h = w[a] > 0.0 ? rel_step * w[a] : rel_step;
    std::vector<double> plus = w.vector(), minus = w.vector();
    plus[a] += h;
    minus[a] = std::abs(minus[a] - h);
    // At w^a = 0 the DII is even in w^a, so the central difference is 0.
    const double f_plus = evaluate_dii(data, WeightVector(plus), ranks_b, out.lambda).dii;
    const double f_minus = evaluate_dii(data, WeightVector(minus), ranks_b, out.lambda).dii;
    out.numeric[a] = w[a] > 0.0 ? (f_plus - f_minus) / (2.0 * h) : 0.0;
    const double scale = std::max(std::abs(out.analytic[a]), std::abs(out.numeric[a]));
    out.relative_error[a] = scale > 0.0 ? std::abs(out.analytic[a] - out.numeric[a]) / scale : 0.0;
    out.max_relative_error = std::max(out.max_relative_error, out.relative_error[a]);
  }
  return out;
}

}  // namespace dii
