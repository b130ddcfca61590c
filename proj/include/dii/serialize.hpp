#pragma once

// File formats: per-epoch JSON lines for traces, CSV/JSON for sparsity
// paths and weights, and the JSON sidecar that travels with a dataset CSV.
// Numbers are written in shortest round-trip form so equal runs give equal
// bytes.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dii/dataio.hpp"
#include "dii/error.hpp"
#include "dii/optimizer.hpp"
#include "dii/sparsify.hpp"
#include "dii/types.hpp"

namespace dii::io {

using json = nlohmann::json;

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, ptr};
}

/// NaN is not valid JSON; it becomes null.
inline json number_or_null(double v) { return std::isnan(v) ? json(nullptr) : json(v); }

// ---------------------------------------------------------------------------
// Optimization trace

inline json to_json(const EpochRecord& r) {
  return {{"epoch", r.epoch},
          {"dii", r.dii},
          {"learning_rate", r.learning_rate},
          {"lambda", r.lambda},
          {"n_nonzero", r.weights.n_nonzero()},
          {"weights", r.weights.vector()}};
}

/// One JSON object per line, epoch 0 first.
inline void write_trace_jsonl(std::ostream& out, const OptimizationTrace& trace) {
  for (const auto& r : trace.records) out << to_json(r).dump() << '\n';
}

inline std::vector<EpochRecord> read_trace_jsonl(std::istream& in) {
  std::vector<EpochRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    out.push_back({j.at("epoch").get<std::size_t>(), j.at("dii").get<double>(),
                   WeightVector(j.at("weights").get<std::vector<double>>()),
                   j.at("learning_rate").get<double>(), j.at("lambda").get<double>()});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weights

/// feature,best,final
inline void write_weights_csv(std::ostream& out, const std::vector<std::string>& names,
                              const WeightVector& best, const WeightVector& final_weights) {
  out << "feature,best,final\n";
  for (std::size_t a = 0; a < names.size(); ++a)
    out << names[a] << ',' << format_number(best[a]) << ',' << format_number(final_weights[a]) << '\n';
}

/// Reads the `column` column ("best" by default) of a weights CSV, or a
/// single-column file of plain numbers.
inline WeightVector read_weights_csv(const std::string& path, const std::string& column = "best") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open weights file '" + path + "'");
  const auto table = parse_csv(in);
  const auto& names = table.feature_names;
  std::size_t col = names.size();
  for (std::size_t c = 0; c < names.size(); ++c)
    if (names[c] == column) col = c;
  if (col == names.size()) {
    if (names.size() != 1) throw InputError("weights file '" + path + "' has no column '" + column + "'");
    col = 0;
  }
  return WeightVector(table.features.column(col));
}

/// parse_csv would reject the text feature column, so weights files with a
/// `feature` name column are read here.
inline WeightVector read_named_weights_csv(const std::string& path, const std::string& column = "best") {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open weights file '" + path + "'");
  std::vector<std::string> header, fields;
  std::size_t line = 1;
  if (!detail::read_csv_record(in, header, line)) throw InputError("weights file '" + path + "' is empty");
  std::size_t col = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (detail::trim(header[c]) == column) col = c;
  if (col == header.size()) throw InputError("weights file '" + path + "' has no column '" + column + "'");
  std::vector<double> w;
  std::size_t row = 0;
  while (detail::read_csv_record(in, fields, line)) {
    if (fields.size() == 1 && detail::trim(fields[0]).empty()) continue;
    ++row;
    if (fields.size() != header.size()) throw InputError("weights file '" + path + "': ragged row " + std::to_string(row));
    w.push_back(detail::parse_cell(fields[col], row, column));
  }
  return WeightVector(std::move(w));
}

// ---------------------------------------------------------------------------
// Sparsity path

/// control,n_nonzero,dii,<one column per feature>
inline void write_path_csv(std::ostream& out, const SparsityPath& path,
                           const std::vector<std::string>& names) {
  out << "control,n_nonzero,dii";
  for (const auto& n : names) out << ',' << n;
  out << '\n';
  for (const auto& e : path.entries) {
    out << format_number(e.control) << ',' << e.n_nonzero << ',' << format_number(e.dii);
    for (double v : e.weights.values()) out << ',' << format_number(v);
    out << '\n';
  }
}

/// n_nonzero,dii: the lowest DII reached at each cardinality, ascending.
inline void write_cardinality_csv(std::ostream& out, const SparsityPath& path) {
  out << "n_nonzero,dii\n";
  for (const auto& [card, idx] : path.best_by_cardinality)
    out << card << ',' << format_number(path.entries[idx].dii) << '\n';
}

inline json to_json(const SparsityPath& path, const std::vector<std::string>& names) {
  json entries = json::array();
  for (const auto& e : path.entries) {
    entries.push_back({{"control", e.control},
                       {"n_nonzero", e.n_nonzero},
                       {"dii", number_or_null(e.dii)},
                       {"over_regularized", e.over_regularized},
                       {"weights", e.weights.vector()}});
  }
  json best = json::object();
  for (const auto& [card, idx] : path.best_by_cardinality) best[std::to_string(card)] = idx;
  return {{"features", names}, {"entries", entries}, {"best_by_cardinality", best}};
}

// ---------------------------------------------------------------------------
// Dataset sidecar

inline json sidecar_json(const DatasetBundle& b, const std::string& generator = {}) {
  json j{{"feature_columns", b.feature_names}, {"ground_truth_columns", b.ground_truth_names}};
  if (b.gt_weights) j["gt_weights"] = b.gt_weights->vector();
  if (b.seed) j["seed"] = *b.seed;
  if (!generator.empty()) j["generator"] = generator;
  return j;
}

struct Sidecar {
  std::vector<std::string> feature_columns;
  std::vector<std::string> ground_truth_columns;
  std::optional<WeightVector> gt_weights;
  std::optional<std::uint64_t> seed;
};

inline Sidecar read_sidecar(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open metadata file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw InputError("metadata file '" + path + "' is not valid JSON: " + e.what());
  }
  Sidecar s;
  s.feature_columns = j.value("feature_columns", std::vector<std::string>{});
  s.ground_truth_columns = j.value("ground_truth_columns", std::vector<std::string>{});
  if (j.contains("gt_weights")) s.gt_weights = WeightVector(j["gt_weights"].get<std::vector<double>>());
  if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
  return s;
}

}  // namespace dii::io
