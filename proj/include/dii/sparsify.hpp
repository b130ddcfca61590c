#pragma once

// Sparse-subset search on top of the optimizer: L1 strength grids, backward
// greedy elimination, exhaustive subset enumeration, anchor-row subsampling
// and block cross-validation.

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dii/core_math.hpp"
#include "dii/error.hpp"
#include "dii/log.hpp"
#include "dii/optimizer.hpp"
#include "dii/parallel.hpp"
#include "dii/rng.hpp"
#include "dii/types.hpp"

namespace dii {

struct PathEntry {
  double control = 0.0;  // L1 strength for lasso, cardinality for greedy/exhaustive
  WeightVector weights;
  double dii = std::numeric_limits<double>::quiet_NaN();  // NaN when over-regularized
  std::size_t n_nonzero = 0;
  bool over_regularized = false;
};

struct SparsityPath {
  std::vector<PathEntry> entries;
  /// cardinality -> index of the lowest-DII entry with that many nonzero weights
  std::map<std::size_t, std::size_t> best_by_cardinality;

  void add(double control, const WeightVector& w, double dii) {
    entries.push_back({control, w, dii, w.n_nonzero(), false});
  }

  void add_over_regularized(double control, std::size_t n_features) {
    entries.push_back({control, WeightVector::constant(n_features, 0.0),
                       std::numeric_limits<double>::quiet_NaN(), 0, true});
  }

  /// Ties keep the earliest entry.
  void rebuild_bests() {
    best_by_cardinality.clear();
    for (std::size_t e = 0; e < entries.size(); ++e) {
      const auto& entry = entries[e];
      if (entry.over_regularized) continue;
      auto [it, inserted] = best_by_cardinality.try_emplace(entry.n_nonzero, e);
      if (!inserted && entry.dii < entries[it->second].dii) it->second = e;
    }
  }

  const PathEntry& best_for(std::size_t cardinality) const {
    const auto it = best_by_cardinality.find(cardinality);
    if (it == best_by_cardinality.end())
      throw InputError("no solution with " + std::to_string(cardinality) + " nonzero weights");
    return entries[it->second];
  }
};

/// 24 strengths log-spaced over [1e-6, 1e-1].
inline std::vector<double> default_l1_grid() {
  std::vector<double> grid(24);
  for (std::size_t k = 0; k < grid.size(); ++k)
    grid[k] = std::pow(10.0, -6.0 + 5.0 * static_cast<double>(k) / static_cast<double>(grid.size() - 1));
  return grid;
}

/// One optimization per L1 strength. Over-regularized runs are kept as
/// flagged entries and excluded from the per-cardinality bests. With
/// jobs > 1 the runs go in parallel, each single-threaded inside.
inline SparsityPath lasso_search(const DataMatrix& data_a, const RankMatrix& ranks_b,
                                 const OptimizerConfig& cfg, std::span<const double> p_grid,
                                 std::size_t jobs = 1) {
  if (p_grid.empty()) throw InputError("lasso search needs at least one L1 strength");
  for (double p : p_grid)
    if (!(p >= 0.0 && std::isfinite(p))) throw InputError("L1 strengths must be nonnegative");
  cfg.validate();

  std::vector<std::optional<OptimizationTrace>> runs(p_grid.size());
  parallel_for(p_grid.size(), jobs, [&](std::size_t k) {
    OptimizerConfig run_cfg = cfg;
    run_cfg.l1_penalty = p_grid[k];
    if (jobs > 1) run_cfg.jobs = 1;
    try {
      runs[k] = optimize_dii(data_a, ranks_b, run_cfg);
    } catch (const NumericalError& e) {
      if (std::string_view{e.what()}.find("over-regularized") == std::string_view::npos) throw;
      log::info("L1 strength " + std::to_string(p_grid[k]) + ": " + e.what());
    }
  });

  SparsityPath path;
  for (std::size_t k = 0; k < p_grid.size(); ++k) {
    if (runs[k]) {
      path.add(p_grid[k], runs[k]->selected().weights, runs[k]->selected().dii);
    } else {
      path.add_over_regularized(p_grid[k], data_a.n_features());
    }
  }
  path.rebuild_bests();
  return path;
}

/// Backward greedy elimination: optimize with all features, zero the smallest
/// optimized weight (lowest index on ties), re-optimize from the remaining
/// weights, repeat down to one feature. Runs without L1, so each entry has
/// exactly the cardinality it is recorded under.
inline SparsityPath greedy_backward(const DataMatrix& data_a, const RankMatrix& ranks_b,
                                    const OptimizerConfig& cfg) {
  OptimizerConfig run_cfg = cfg;
  run_cfg.l1_penalty = 0.0;
  run_cfg.validate();
  WeightVector w0 = cfg.initial_weights ? *cfg.initial_weights : initial_weights(data_a);
  if (w0.size() != data_a.n_features()) throw InputError("initial weights have the wrong length");

  SparsityPath path;
  for (std::size_t remaining = w0.n_nonzero(); remaining >= 1; --remaining) {
    run_cfg.initial_weights = w0;
    const auto trace = optimize_dii(data_a, ranks_b, run_cfg);
    const auto& best = trace.selected();
    path.add(static_cast<double>(remaining), best.weights, best.dii);
    if (remaining == 1) break;

    std::size_t smallest = best.weights.size();
    for (std::size_t a = 0; a < best.weights.size(); ++a) {
      if (best.weights[a] <= 0.0) continue;
      if (smallest == best.weights.size() || best.weights[a] < best.weights[smallest]) smallest = a;
    }
    w0 = best.weights.with_zero(smallest);
  }
  path.rebuild_bests();
  return path;
}

inline constexpr std::size_t default_exhaustive_limit = 10;

/// Optimizes every nonempty feature subset (weights outside the subset fixed
/// at 0). Entries are ordered by subset bitmask, bit a = feature a.
inline SparsityPath exhaustive_search(const DataMatrix& data_a, const RankMatrix& ranks_b,
                                      const OptimizerConfig& cfg,
                                      std::size_t max_features = default_exhaustive_limit,
                                      std::size_t jobs = 1) {
  const std::size_t d = data_a.n_features();
  if (d > max_features)
    throw InputError("exhaustive search over " + std::to_string(d) + " features exceeds the limit of " +
                     std::to_string(max_features) + " (2^D - 1 optimizations)");
  if (d >= 63) throw InputError("exhaustive search: too many features");
  cfg.validate();
  const WeightVector base = cfg.initial_weights ? *cfg.initial_weights : initial_weights(data_a);

  const std::size_t n_subsets = (std::size_t{1} << d) - 1;
  std::vector<std::optional<OptimizationTrace>> runs(n_subsets);
  parallel_for(n_subsets, jobs, [&](std::size_t k) {
    const std::size_t mask = k + 1;
    std::vector<double> w(d, 0.0);
    for (std::size_t a = 0; a < d; ++a)
      if (mask >> a & 1U) w[a] = base[a];
    WeightVector w0(std::move(w));
    if (w0.all_zero()) return;  // subset of constant features only
    OptimizerConfig run_cfg = cfg;
    run_cfg.initial_weights = w0;
    if (jobs > 1) run_cfg.jobs = 1;
    try {
      runs[k] = optimize_dii(data_a, ranks_b, run_cfg);
    } catch (const NumericalError& e) {
      log::info("subset " + std::to_string(mask) + ": " + e.what());
    }
  });

  SparsityPath path;
  for (std::size_t k = 0; k < n_subsets; ++k) {
    const auto card = static_cast<double>(std::popcount(k + 1));
    if (runs[k]) {
      path.add(card, runs[k]->selected().weights, runs[k]->selected().dii);
    } else {
      path.add_over_regularized(card, d);
    }
  }
  path.rebuild_bests();
  return path;
}

// ---------------------------------------------------------------------------
// Anchor-row subsampling

struct RowMode {
  enum class Kind { all, fraction, fixed };
  Kind kind = Kind::all;
  double fraction = 1.0;
  std::size_t count = 0;

  static RowMode all() { return {}; }
  static RowMode of_fraction(double f) { return {Kind::fraction, f, 0}; }
  static RowMode of_count(std::size_t m) { return {Kind::fixed, 1.0, m}; }

  /// "all", "frac:<f>" or "fixed:<m>".
  static RowMode parse(std::string_view s) {
    if (s == "all") return all();
    auto number = [&](std::string_view prefix, auto& out) {
      auto v = s.substr(prefix.size());
      auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
      if (v.empty() || ec != std::errc{} || ptr != v.data() + v.size())
        throw InputError("bad row mode '" + std::string{s} + "'");
    };
    if (s.starts_with("frac:")) {
      double f = 0.0;
      number("frac:", f);
      return of_fraction(f);
    }
    if (s.starts_with("fixed:")) {
      std::size_t m = 0;
      number("fixed:", m);
      return of_count(m);
    }
    throw InputError("bad row mode '" + std::string{s} + "' (expected all, frac:<f> or fixed:<m>)");
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::all: return "all";
      case Kind::fraction: return "frac:" + std::to_string(fraction);
      case Kind::fixed: return "fixed:" + std::to_string(count);
    }
    return "all";
  }
};

/// Anchor rows, drawn once up front and kept for the whole optimization.
/// Fraction f gives ceil(f N) rows, fixed m gives min(m, N). Returned sorted.
inline std::vector<std::size_t> subsample_rows(std::size_t n_points, const RowMode& mode,
                                               std::uint64_t seed) {
  std::size_t n_rows = n_points;
  switch (mode.kind) {
    case RowMode::Kind::all:
      return all_rows(n_points);
    case RowMode::Kind::fraction:
      if (!(mode.fraction > 0.0 && mode.fraction <= 1.0))
        throw InputError("row fraction must lie in (0, 1]");
      n_rows = static_cast<std::size_t>(std::ceil(mode.fraction * static_cast<double>(n_points)));
      break;
    case RowMode::Kind::fixed:
      n_rows = std::min(mode.count, n_points);
      break;
  }
  if (n_rows < 2) throw InputError("row subsampling leaves fewer than 2 anchor rows");
  if (n_rows == n_points) return all_rows(n_points);
  Rng rng(seed, Stream::row_subsample);
  return rng.sample_without_replacement(n_points, n_rows);
}

// ---------------------------------------------------------------------------
// Block cross-validation

/// Contiguous equal-length blocks over [0, n_blocks * block_length), each
/// thinned to every `stride`-th point. Trailing points that do not fill a
/// block are dropped.
struct BlockSplit {
  std::size_t n_blocks = 0;
  std::size_t stride = 1;
  std::size_t block_length = 0;
  std::vector<std::vector<std::size_t>> blocks;  // strided point indices per block

  static BlockSplit make(std::size_t n_points, std::size_t n_blocks, std::size_t stride = 1) {
    if (n_blocks < 1) throw InputError("need at least one block");
    if (stride < 1) throw InputError("stride must be at least 1");
    BlockSplit s{n_blocks, stride, n_points / n_blocks, {}};
    if (s.block_length == 0) throw InputError("more blocks than points");
    for (std::size_t b = 0; b < n_blocks; ++b) {
      std::vector<std::size_t> ids;
      for (std::size_t k = 0; k < s.block_length; k += stride) ids.push_back(b * s.block_length + k);
      s.blocks.push_back(std::move(ids));
    }
    return s;
  }
};

struct BlockResult {
  std::size_t block = 0;
  double train_dii = 0.0;
  WeightVector weights;
  std::vector<double> validation_dii;  // one per other block, in block order
};

struct CrossValidationSummary {
  std::vector<BlockResult> blocks;
  double train_mean = 0.0, train_std = 0.0;
  double validation_mean = 0.0, validation_std = 0.0;
};

namespace detail {

inline void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  sd = v.size() > 1 ? std::sqrt(var / static_cast<double>(v.size() - 1)) : 0.0;
}

}  // namespace detail

/// Trains on each block in turn and scores the learned weights, unchanged, on
/// every other block. Each validation evaluation uses the adaptive lambda of
/// its own block.
inline CrossValidationSummary block_cross_validate(const DataMatrix& data_a,
                                                   const DataMatrix& ground_truth,
                                                   const BlockSplit& split,
                                                   const OptimizerConfig& cfg,
                                                   std::size_t jobs = 1) {
  if (data_a.n_points() != ground_truth.n_points())
    throw InputError("input and ground-truth data disagree in point count");
  if (split.n_blocks < 2) throw InputError("cross-validation needs at least 2 blocks: validation set empty");
  if (split.block_length * split.n_blocks > data_a.n_points())
    throw InputError("block split does not fit the data");
  for (const auto& ids : split.blocks)
    if (ids.size() < 3) throw InputError("block too small: fewer than 3 points after striding");

  std::vector<DataMatrix> a_blocks, b_blocks;
  std::vector<RankMatrix> rank_blocks;
  for (const auto& ids : split.blocks) {
    a_blocks.push_back(data_a.select_rows(ids));
    b_blocks.push_back(ground_truth.select_rows(ids));
    rank_blocks.push_back(ground_truth_ranks(b_blocks.back(), cfg.jobs));
  }

  CrossValidationSummary out;
  out.blocks.resize(split.n_blocks);
  parallel_for(split.n_blocks, jobs, [&](std::size_t b) {
    OptimizerConfig run_cfg = cfg;
    if (jobs > 1) run_cfg.jobs = 1;
    const auto trace = optimize_dii(a_blocks[b], rank_blocks[b], run_cfg);
    BlockResult res{b, trace.selected().dii, trace.selected().weights, {}};
    for (std::size_t v = 0; v < split.n_blocks; ++v) {
      if (v == b) continue;
      res.validation_dii.push_back(
          evaluate_dii_fixed(a_blocks[v], rank_blocks[v], res.weights, std::nullopt, run_cfg.jobs));
    }
    out.blocks[b] = std::move(res);
  });

  std::vector<double> train, validation;
  for (const auto& r : out.blocks) {
    train.push_back(r.train_dii);
    validation.insert(validation.end(), r.validation_dii.begin(), r.validation_dii.end());
  }
  detail::mean_std(train, out.train_mean, out.train_std);
  detail::mean_std(validation, out.validation_mean, out.validation_std);
  return out;
}

}  // namespace dii
