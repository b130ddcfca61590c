#pragma once

// Numerical kernels of the differentiable information imbalance: weighted
// distances, neighbor ranks, softmax coefficients, the classic and smoothed
// imbalance, its analytic gradient and the adaptive softmax scale.
//
// All matrices are rectangular N_rows x N: a fixed set of anchor rows against
// every point. With N_rows == N this is the plain square formulation; fewer
// anchors give the linear-cost estimator, and every prefactor becomes
// 2 / (N_rows * N).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "dii/error.hpp"
#include "dii/log.hpp"
#include "dii/parallel.hpp"
#include "dii/types.hpp"

namespace dii {

namespace detail {

inline void check_row_ids(std::span<const std::size_t> row_ids, std::size_t n_points) {
  if (row_ids.empty()) throw InputError("row selection is empty");
  std::vector<bool> seen(n_points, false);
  for (auto i : row_ids) {
    if (i >= n_points) throw InputError("row index " + std::to_string(i) + " out of range");
    if (seen[i]) throw InputError("row index " + std::to_string(i) + " selected twice");
    seen[i] = true;
  }
}

inline bool same_rows(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  return a == b;
}

template <typename A, typename B>
void check_compatible(const A& a, const B& b, const char* what) {
  if (a.n_rows() != b.n_rows() || a.n_points() != b.n_points() || !same_rows(a.row_ids, b.row_ids))
    throw InputError(std::string{what} + ": shape or row selection mismatch");
}

inline double prefactor(std::size_t n_rows, std::size_t n_points) {
  return 2.0 / (static_cast<double>(n_rows) * static_cast<double>(n_points));
}

}  // namespace detail

/// d[r][j] = || w (.) (X_{row_ids[r]} - X_j) || for every anchor row r and point j.
inline DistanceMatrix compute_weighted_distances(const DataMatrix& data, const WeightVector& w,
                                                 std::span<const std::size_t> row_ids,
                                                 std::size_t jobs = 1) {
  const std::size_t n = data.n_points();
  if (w.size() != data.n_features())
    throw InputError("weight vector has " + std::to_string(w.size()) + " components, data has " +
                     std::to_string(data.n_features()) + " features");
  detail::check_row_ids(row_ids, n);
  const auto active = w.support();
  if (active.empty()) throw NumericalError("degenerate metric: all weights are zero");

  // Feature-major scaled copy so the inner loop runs contiguously over points.
  Matrix<double> scaled(active.size(), n);
  for (std::size_t k = 0; k < active.size(); ++k) {
    const double wk = w[active[k]];
    for (std::size_t j = 0; j < n; ++j) scaled(k, j) = wk * data(j, active[k]);
  }

  DistanceMatrix out{Matrix<double>(row_ids.size(), n, 0.0), {row_ids.begin(), row_ids.end()}};
  parallel_for(row_ids.size(), jobs, [&](std::size_t r) {
    auto drow = out.d.row(r);
    const std::size_t p = row_ids[r];
    for (std::size_t k = 0; k < active.size(); ++k) {
      const double y = scaled(k, p);
      const double* col = scaled.row(k).data();
      for (std::size_t j = 0; j < n; ++j) {
        const double diff = y - col[j];
        drow[j] += diff * diff;
      }
    }
    for (auto& v : drow) v = std::sqrt(v);
    drow[p] = 0.0;
  });
  return out;
}

/// Same as above over all rows.
inline DistanceMatrix compute_weighted_distances(const DataMatrix& data, const WeightVector& w,
                                                 std::size_t jobs = 1) {
  return compute_weighted_distances(data, w, all_rows(data.n_points()), jobs);
}

/// Ascending-distance ranks excluding self. Equal distances are ordered by
/// ascending point index.
inline RankMatrix compute_ranks(const DistanceMatrix& dist, std::size_t jobs = 1) {
  const std::size_t n = dist.n_points();
  if (n < 2) throw InputError("ranks need at least 2 points");
  RankMatrix out{Matrix<std::int32_t>(dist.n_rows(), n, 0), dist.row_ids};
  parallel_for(dist.n_rows(), jobs, [&](std::size_t r) {
    const std::size_t self = dist.row_ids[r];
    auto drow = dist.d.row(r);
    std::vector<std::size_t> order;
    order.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j)
      if (j != self) order.push_back(j);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return drow[a] < drow[b] || (drow[a] == drow[b] && a < b);
    });
    auto rrow = out.r.row(r);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      rrow[order[pos]] = static_cast<std::int32_t>(pos + 1);
  });
  return out;
}

/// Ranks of the plain (unweighted) Euclidean metric of a ground-truth space.
inline RankMatrix ground_truth_ranks(const DataMatrix& ground_truth,
                                     std::span<const std::size_t> row_ids, std::size_t jobs = 1) {
  const auto ones = WeightVector::constant(ground_truth.n_features(), 1.0);
  return compute_ranks(compute_weighted_distances(ground_truth, ones, row_ids, jobs), jobs);
}

inline RankMatrix ground_truth_ranks(const DataMatrix& ground_truth, std::size_t jobs = 1) {
  return ground_truth_ranks(ground_truth, all_rows(ground_truth.n_points()), jobs);
}

/// Classic information imbalance from two rank matrices: mean B-rank of each
/// anchor's A-space nearest neighbor, times 2/N.
inline double classic_imbalance(const RankMatrix& ranks_a, const RankMatrix& ranks_b) {
  detail::check_compatible(ranks_a, ranks_b, "classic_imbalance");
  double total = 0.0;
  for (std::size_t r = 0; r < ranks_a.n_rows(); ++r) {
    auto ra = ranks_a.r.row(r);
    auto rb = ranks_b.r.row(r);
    for (std::size_t j = 0; j < ranks_a.n_points(); ++j)
      if (ra[j] == 1) total += rb[j];
  }
  return detail::prefactor(ranks_a.n_rows(), ranks_a.n_points()) * total;
}

/// Classic information imbalance straight from A-space distances. When several
/// neighbors tie for the smallest distance their B-ranks are averaged.
inline double classic_imbalance(const DistanceMatrix& dist_a, const RankMatrix& ranks_b) {
  detail::check_compatible(dist_a, ranks_b, "classic_imbalance");
  double total = 0.0;
  for (std::size_t r = 0; r < dist_a.n_rows(); ++r) {
    const std::size_t self = dist_a.row_ids[r];
    auto drow = dist_a.d.row(r);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < drow.size(); ++j)
      if (j != self) dmin = std::min(dmin, drow[j]);
    double sum = 0.0;
    std::size_t ties = 0;
    for (std::size_t j = 0; j < drow.size(); ++j) {
      if (j != self && drow[j] == dmin) {
        sum += ranks_b.r(r, j);
        ++ties;
      }
    }
    total += sum / static_cast<double>(ties);
  }
  return detail::prefactor(dist_a.n_rows(), dist_a.n_points()) * total;
}

/// c[r][j] = exp(-d/lambda) normalized over j != self. Each row is shifted by
/// its smallest non-self distance first, which leaves the ratios unchanged and
/// keeps the largest term at exp(0) for any lambda.
inline SoftmaxCoefficients softmax_coefficients(const DistanceMatrix& dist, double lambda,
                                                std::size_t jobs = 1) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw InputError("softmax scale lambda must be positive and finite");
  const std::size_t n = dist.n_points();
  SoftmaxCoefficients out{Matrix<double>(dist.n_rows(), n, 0.0), dist.row_ids, lambda};
  const double inv_lambda = 1.0 / lambda;
  parallel_for(dist.n_rows(), jobs, [&](std::size_t r) {
    const std::size_t self = dist.row_ids[r];
    auto drow = dist.d.row(r);
    auto crow = out.c.row(r);
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j)
      if (j != self) dmin = std::min(dmin, drow[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) continue;
      crow[j] = std::exp(-(drow[j] - dmin) * inv_lambda);
      z += crow[j];
    }
    const double inv_z = 1.0 / z;
    for (auto& v : crow) v *= inv_z;
    crow[self] = 0.0;
  });
  return out;
}

/// Softmax scale from the gap between second and first neighbor distances:
/// the average of the smallest gap and the mean gap over anchor rows.
///
/// Throws NumericalError("degenerate neighborhoods") if every gap is zero. A
/// positive scale below 1e-12 times the mean pairwise distance is clamped to
/// that floor with a warning.
inline double adaptive_lambda(const DistanceMatrix& dist) {
  const std::size_t n = dist.n_points();
  if (n < 3) throw InputError("adaptive lambda needs at least 3 points");
  double gap_min = std::numeric_limits<double>::infinity();
  double gap_sum = 0.0;
  double dist_sum = 0.0;
  for (std::size_t r = 0; r < dist.n_rows(); ++r) {
    const std::size_t self = dist.row_ids[r];
    auto drow = dist.d.row(r);
    double first = std::numeric_limits<double>::infinity();
    double second = std::numeric_limits<double>::infinity();
    double row_sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self) continue;
      const double v = drow[j];
      row_sum += v;
      if (v < first) {
        second = first;
        first = v;
      } else if (v < second) {
        second = v;
      }
    }
    const double gap = second - first;
    gap_min = std::min(gap_min, gap);
    gap_sum += gap;
    dist_sum += row_sum;
  }
  const double rows = static_cast<double>(dist.n_rows());
  const double gap_mean = gap_sum / rows;
  if (gap_mean == 0.0) throw NumericalError("degenerate neighborhoods: all first/second neighbor gaps are zero");
  const double lambda = 0.5 * (gap_min + gap_mean);
  const double floor = 1e-12 * dist_sum / (rows * static_cast<double>(n - 1));
  if (lambda < floor) {
    std::ostringstream msg;
    msg << "adaptive lambda " << lambda << " below floor, clamped to " << floor;
    log::warn(msg.str());
    return floor;
  }
  return lambda;
}

/// DII = 2/(N_rows N) * sum_{r, j != self} c[r][j] * rB[r][j].
inline double dii_value(const SoftmaxCoefficients& coeffs, const RankMatrix& ranks_b) {
  detail::check_compatible(coeffs, ranks_b, "dii_value");
  double total = 0.0;
  for (std::size_t r = 0; r < coeffs.n_rows(); ++r) {
    auto crow = coeffs.c.row(r);
    auto rrow = ranks_b.r.row(r);
    double row_sum = 0.0;
    for (std::size_t j = 0; j < crow.size(); ++j) row_sum += crow[j] * rrow[j];
    total += row_sum;
  }
  return detail::prefactor(coeffs.n_rows(), coeffs.n_points()) * total;
}

/// Analytic dDII/dw at fixed lambda (the lambda stored in `coeffs`).
///
/// Uses the per-row rearrangement
///   sum_j c_ij r_ij (-q_ij + sum_m c_im q_im) = sum_j c_ij (R_i - r_ij) q_ij,
/// with R_i = sum_j c_ij r_ij and q_ij = (X_i^a - X_j^a)^2 / d_ij, so each
/// row costs one pass over its neighbors. Pairs at zero distance contribute 0.
inline std::vector<double> dii_gradient(const DataMatrix& data, const WeightVector& w,
                                        const DistanceMatrix& dist,
                                        const SoftmaxCoefficients& coeffs,
                                        const RankMatrix& ranks_b, std::size_t jobs = 1) {
  detail::check_compatible(dist, coeffs, "dii_gradient");
  detail::check_compatible(coeffs, ranks_b, "dii_gradient");
  if (w.size() != data.n_features() || dist.n_points() != data.n_points())
    throw InputError("dii_gradient: data, weights and distances disagree in shape");
  if (!(coeffs.lambda > 0.0)) throw InputError("dii_gradient: lambda must be positive");
  const auto active = w.support();
  if (active.empty()) throw NumericalError("degenerate metric: all weights are zero");

  const std::size_t n = data.n_points();
  const std::size_t da = active.size();
  Matrix<double> compact(n, da);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t k = 0; k < da; ++k) compact(j, k) = data(j, active[k]);

  Matrix<double> partial(coeffs.n_rows(), da, 0.0);
  parallel_for(coeffs.n_rows(), jobs, [&](std::size_t r) {
    const std::size_t self = coeffs.row_ids[r];
    auto crow = coeffs.c.row(r);
    auto rrow = ranks_b.r.row(r);
    auto drow = dist.d.row(r);
    double expected_rank = 0.0;
    for (std::size_t j = 0; j < n; ++j) expected_rank += crow[j] * rrow[j];
    const double* xi = compact.row(self).data();
    double* acc = partial.row(r).data();
    for (std::size_t j = 0; j < n; ++j) {
      if (j == self || crow[j] == 0.0 || drow[j] == 0.0) continue;
      const double coef = crow[j] * (expected_rank - rrow[j]) / drow[j];
      const double* xj = compact.row(j).data();
      for (std::size_t k = 0; k < da; ++k) {
        const double diff = xi[k] - xj[k];
        acc[k] += coef * diff * diff;
      }
    }
  });

  std::vector<double> grad(data.n_features(), 0.0);
  const double scale = detail::prefactor(coeffs.n_rows(), n) / coeffs.lambda;
  for (std::size_t k = 0; k < da; ++k) {
    double sum = 0.0;
    for (std::size_t r = 0; r < coeffs.n_rows(); ++r) sum += partial(r, k);
    grad[active[k]] = scale * w[active[k]] * sum;
  }
  return grad;
}

/// One forward pass: distances, lambda (adaptive when `lambda` is empty),
/// coefficients and the DII value. The intermediates are kept so a gradient
/// can reuse them.
struct DiiEvaluation {
  double dii = 0.0;
  double lambda = 0.0;
  DistanceMatrix distances;
  SoftmaxCoefficients coefficients;
};

inline DiiEvaluation evaluate_dii(const DataMatrix& data, const WeightVector& w,
                                  const RankMatrix& ranks_b, std::optional<double> lambda,
                                  std::size_t jobs = 1) {
  if (ranks_b.n_points() != data.n_points())
    throw InputError("ground-truth ranks cover " + std::to_string(ranks_b.n_points()) +
                     " points, data has " + std::to_string(data.n_points()));
  DiiEvaluation ev;
  ev.distances = compute_weighted_distances(data, w, ranks_b.row_ids, jobs);
  ev.lambda = lambda ? *lambda : adaptive_lambda(ev.distances);
  ev.coefficients = softmax_coefficients(ev.distances, ev.lambda, jobs);
  ev.dii = dii_value(ev.coefficients, ranks_b);
  return ev;
}

}  // namespace dii
