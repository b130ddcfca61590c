#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dii/core_math.hpp"
#include "dii/error.hpp"
#include "dii/log.hpp"
#include "dii/types.hpp"

namespace dii {

enum class Schedule { constant, cosine, exponential, best_of_both };

inline std::string_view to_string(Schedule s) {
  switch (s) {
    case Schedule::constant: return "const";
    case Schedule::cosine: return "cosine";
    case Schedule::exponential: return "exp";
    case Schedule::best_of_both: return "both";
  }
  return "?";
}

inline Schedule parse_schedule(std::string_view s) {
  if (s == "const" || s == "constant") return Schedule::constant;
  if (s == "cosine" || s == "cos") return Schedule::cosine;
  if (s == "exp" || s == "exponential") return Schedule::exponential;
  if (s == "both" || s == "best") return Schedule::best_of_both;
  throw InputError("unknown learning-rate schedule '" + std::string{s} + "'");
}

struct OptimizerConfig {
  std::size_t n_epochs = 100;
  std::optional<double> eta0;      // empty: probe a few candidates
  Schedule schedule = Schedule::cosine;
  double l1_penalty = 0.0;
  std::optional<double> lambda0;   // empty: adaptive, refreshed every epoch
  std::optional<WeightVector> initial_weights;  // empty: inverse std
  std::uint64_t seed = 0;
  std::size_t jobs = 1;

  void validate() const {
    if (n_epochs < 1) throw InputError("n_epochs must be at least 1");
    if (eta0 && !(*eta0 > 0.0 && std::isfinite(*eta0))) throw InputError("eta0 must be positive");
    if (!(l1_penalty >= 0.0 && std::isfinite(l1_penalty))) throw InputError("L1 penalty must be nonnegative");
    if (lambda0 && !(*lambda0 > 0.0 && std::isfinite(*lambda0))) throw InputError("lambda must be positive");
  }
};

/// Candidates tried when eta0 is not given, each for `auto_eta_probe_epochs`.
inline constexpr double auto_eta_candidates[] = {100.0, 10.0, 1.0, 0.1};
inline constexpr std::size_t auto_eta_probe_epochs = 5;

struct EpochRecord {
  std::size_t epoch = 0;
  double dii = 0.0;
  WeightVector weights;
  double learning_rate = 0.0;  // step that produced these weights; 0 at epoch 0
  double lambda = 0.0;
};

struct OptimizationTrace {
  std::vector<EpochRecord> records;  // n_epochs + 1 entries, epoch 0 first
  WeightVector final_weights;
  std::size_t best_epoch = 0;      // argmin DII over all epochs
  std::size_t selected_epoch = 0;  // argmin DII over epochs sharing the final support
  Schedule schedule = Schedule::cosine;
  double eta0 = 0.0;
  double l1_penalty = 0.0;

  const EpochRecord& best() const { return records.at(best_epoch); }
  const EpochRecord& selected() const { return records.at(selected_epoch); }
  double min_dii() const { return best().dii; }
};

/// w^a = 1 / population std of feature a. Constant features get weight 0.
inline WeightVector initial_weights(const DataMatrix& data) {
  const std::size_t n = data.n_points();
  std::vector<double> w(data.n_features(), 0.0);
  for (std::size_t a = 0; a < data.n_features(); ++a) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) mean += data(i, a);
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = data(i, a) - mean;
      var += c * c;
    }
    const double sd = std::sqrt(var / static_cast<double>(n));
    if (sd > 0.0) {
      w[a] = 1.0 / sd;
    } else {
      log::warn("feature " + std::to_string(a) + " is constant; its initial weight is set to 0");
    }
  }
  return WeightVector(std::move(w));
}

/// Learning rate at epoch k. Cosine: 0.5 eta0 (1 + cos(pi k / n_epochs));
/// exponential: eta0 2^(-k/10), halving every 10 epochs.
inline double learning_rate(std::size_t k, double eta0, std::size_t n_epochs, Schedule schedule) {
  switch (schedule) {
    case Schedule::cosine:
      return 0.5 * eta0 *
             (1.0 + std::cos(std::numbers::pi * static_cast<double>(k) / static_cast<double>(n_epochs)));
    case Schedule::exponential:
      return eta0 * std::exp2(-static_cast<double>(k) / 10.0);
    case Schedule::constant:
    case Schedule::best_of_both:
      return eta0;
  }
  return eta0;
}

/// Two-step L1 update applied after the gradient step ("GD clipping"):
/// positive components shrink by eta*p, negative ones by eta*p toward zero and
/// are reflected; any component whose shrink would cross zero becomes exactly
/// 0. With p = 0 this reduces to taking magnitudes.
inline WeightVector l1_clip_step(std::span<const double> w_half, double eta, double p) {
  const double shrink = eta * p;
  std::vector<double> out(w_half.size(), 0.0);
  for (std::size_t a = 0; a < w_half.size(); ++a) {
    const double v = w_half[a];
    if (v > 0.0) {
      out[a] = std::max(0.0, v - shrink);
    } else if (v < 0.0) {
      out[a] = std::abs(std::min(0.0, v + shrink));
    }
  }
  return WeightVector(std::move(out));
}

namespace detail {

inline std::size_t select_epoch(const std::vector<EpochRecord>& records) {
  const auto final_support = records.back().weights.support();
  std::size_t best = records.size() - 1;
  for (std::size_t k = 0; k < records.size(); ++k) {
    if (records[k].weights.support() != final_support) continue;
    if (records[k].dii < records[best].dii || (records[k].dii == records[best].dii && k < best)) best = k;
  }
  return best;
}

inline OptimizationTrace run_schedule(const DataMatrix& data, const RankMatrix& ranks_b,
                                      const OptimizerConfig& cfg, const WeightVector& w0,
                                      double eta0, Schedule schedule, std::size_t n_epochs) {
  OptimizationTrace trace;
  trace.schedule = schedule;
  trace.eta0 = eta0;
  trace.l1_penalty = cfg.l1_penalty;
  trace.records.reserve(n_epochs + 1);

  WeightVector w = w0;
  auto ev = evaluate_dii(data, w, ranks_b, cfg.lambda0, cfg.jobs);
  trace.records.push_back({0, ev.dii, w, 0.0, ev.lambda});

  for (std::size_t t = 0; t < n_epochs; ++t) {
    const double eta = learning_rate(t, eta0, cfg.n_epochs, schedule);
    const auto grad = dii_gradient(data, w, ev.distances, ev.coefficients, ranks_b, cfg.jobs);
    std::vector<double> half(w.size());
    for (std::size_t a = 0; a < w.size(); ++a) half[a] = w[a] - eta * grad[a];
    w = l1_clip_step(half, eta, cfg.l1_penalty);
    if (w.all_zero())
      throw NumericalError("over-regularized: every weight reached zero at epoch " + std::to_string(t + 1));
    ev = evaluate_dii(data, w, ranks_b, cfg.lambda0, cfg.jobs);
    trace.records.push_back({t + 1, ev.dii, w, eta, ev.lambda});
  }

  trace.final_weights = w;
  trace.best_epoch = 0;
  for (std::size_t k = 1; k < trace.records.size(); ++k)
    if (trace.records[k].dii < trace.records[trace.best_epoch].dii) trace.best_epoch = k;
  trace.selected_epoch = select_epoch(trace.records);
  return trace;
}

inline OptimizationTrace run_any_schedule(const DataMatrix& data, const RankMatrix& ranks_b,
                                          const OptimizerConfig& cfg, const WeightVector& w0,
                                          double eta0, std::size_t n_epochs) {
  if (cfg.schedule != Schedule::best_of_both)
    return run_schedule(data, ranks_b, cfg, w0, eta0, cfg.schedule, n_epochs);
  auto cosine = run_schedule(data, ranks_b, cfg, w0, eta0, Schedule::cosine, n_epochs);
  auto expo = run_schedule(data, ranks_b, cfg, w0, eta0, Schedule::exponential, n_epochs);
  return expo.selected().dii < cosine.selected().dii ? std::move(expo) : std::move(cosine);
}

inline double probe_eta0(const DataMatrix& data, const RankMatrix& ranks_b,
                         const OptimizerConfig& cfg, const WeightVector& w0) {
  double best_eta = auto_eta_candidates[0];
  double best_dii = std::numeric_limits<double>::infinity();
  const std::size_t probe = std::min(auto_eta_probe_epochs, cfg.n_epochs);
  for (double eta : auto_eta_candidates) {
    double d = std::numeric_limits<double>::infinity();
    try {
      d = run_any_schedule(data, ranks_b, cfg, w0, eta, probe).selected().dii;
    } catch (const NumericalError&) {
    }
    if (d < best_dii) {
      best_dii = d;
      best_eta = eta;
    }
  }
  log::info("auto eta0 = " + std::to_string(best_eta));
  return best_eta;
}

}  // namespace detail

/// Gradient descent on the DII with optional L1 clipping.
///
/// Epoch 0 evaluates the starting weights; each following epoch takes one
/// gradient step at the current lambda, applies the clip, and re-evaluates.
/// The rank matrix fixes the anchor rows for the whole run. With
/// Schedule::best_of_both, cosine and exponential runs are both made and the
/// one whose selected epoch has lower DII is returned.
inline OptimizationTrace optimize_dii(const DataMatrix& data_a, const RankMatrix& ranks_b,
                                      const OptimizerConfig& cfg) {
  cfg.validate();
  if (ranks_b.n_points() != data_a.n_points())
    throw InputError("ground-truth ranks and input data disagree in point count");
  WeightVector w0 = cfg.initial_weights ? *cfg.initial_weights : initial_weights(data_a);
  if (w0.size() != data_a.n_features())
    throw InputError("initial weights have the wrong length");
  if (w0.all_zero()) throw NumericalError("degenerate metric: all initial weights are zero");
  const double eta0 = cfg.eta0 ? *cfg.eta0 : detail::probe_eta0(data_a, ranks_b, cfg, w0);
  return detail::run_any_schedule(data_a, ranks_b, cfg, w0, eta0, cfg.n_epochs);
}

/// Single forward DII with fixed weights; lambda empty means adaptive on this
/// data's own distances.
inline double evaluate_dii_fixed(const DataMatrix& data_a, const RankMatrix& ranks_b,
                                 const WeightVector& w, std::optional<double> lambda = std::nullopt,
                                 std::size_t jobs = 1) {
  return evaluate_dii(data_a, w, ranks_b, lambda, jobs).dii;
}

}  // namespace dii
