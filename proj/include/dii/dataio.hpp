#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dii/error.hpp"
#include "dii/log.hpp"
#include "dii/rng.hpp"
#include "dii/types.hpp"

namespace dii {

/// Input space A, ground truth B (absent: use A itself), labels and, for the
/// synthetic benchmarks, the known target weights.
struct DatasetBundle {
  DataMatrix features;
  std::optional<DataMatrix> ground_truth;
  std::vector<std::string> feature_names;
  std::vector<std::string> ground_truth_names;
  std::optional<WeightVector> gt_weights;
  std::optional<std::uint64_t> seed;
};

// ---------------------------------------------------------------------------
// CSV

struct ColumnRoles {
  std::vector<std::string> ground_truth;  // listed columns go to B
  std::vector<std::string> ignore;        // dropped from both spaces
};

namespace detail {

/// One logical CSV record; handles quoting, embedded commas/quotes/newlines.
inline bool read_csv_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line) {
  fields.clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char ch;
  while (in.get(ch)) {
    any = true;
    if (in_quotes) {
      if (ch == '"') {
        if (in.peek() == '"') {
          in.get(ch);
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        if (ch == '\n') ++line;
        field.push_back(ch);
      }
      continue;
    }
    if (ch == '"') {
      in_quotes = true;
    } else if (ch == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (ch == '\r') {
      if (in.peek() == '\n') in.get(ch);
      ++line;
      break;
    } else if (ch == '\n') {
      ++line;
      break;
    } else {
      field.push_back(ch);
    }
  }
  if (in_quotes) throw InputError("csv: unterminated quoted field near line " + std::to_string(line));
  if (!any) return false;
  fields.push_back(std::move(field));
  return true;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline double parse_cell(std::string_view cell, std::size_t row, const std::string& column) {
  cell = trim(cell);
  if (!cell.empty() && cell.front() == '+') cell.remove_prefix(1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || ec != std::errc{} || ptr != cell.data() + cell.size())
    throw InputError("csv: non-numeric cell '" + std::string{cell} + "' at row " + std::to_string(row) +
                     ", column '" + column + "'");
  if (!std::isfinite(v))
    throw InputError("csv: non-finite value '" + std::string{cell} + "' at row " + std::to_string(row) +
                     ", column '" + column + "'");
  return v;
}

}  // namespace detail

/// Reads a header-first numeric CSV. Rows are numbered from 1 (first data
/// row) in error messages. Columns not named in `roles` are features.
inline DatasetBundle parse_csv(std::istream& in, const ColumnRoles& roles = {}) {
  std::size_t line = 1;
  std::vector<std::string> header;
  if (!detail::read_csv_record(in, header, line)) throw InputError("csv: empty input, header required");
  for (auto& h : header) h = std::string{detail::trim(h)};
  {
    std::set<std::string> seen;
    for (const auto& h : header) {
      if (h.empty()) throw InputError("csv: empty column name in header");
      if (!seen.insert(h).second) throw InputError("csv: duplicate column name '" + h + "'");
    }
    for (const auto* list : {&roles.ground_truth, &roles.ignore})
      for (const auto& name : *list)
        if (!seen.count(name)) throw InputError("csv: no column named '" + name + "'");
  }
  enum class Role { feature, ground_truth, ignore };
  std::vector<Role> role(header.size(), Role::feature);
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (std::find(roles.ground_truth.begin(), roles.ground_truth.end(), header[c]) != roles.ground_truth.end())
      role[c] = Role::ground_truth;
    if (std::find(roles.ignore.begin(), roles.ignore.end(), header[c]) != roles.ignore.end())
      role[c] = Role::ignore;
  }

  DatasetBundle out;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (role[c] == Role::feature) out.feature_names.push_back(header[c]);
    if (role[c] == Role::ground_truth) out.ground_truth_names.push_back(header[c]);
  }
  if (out.feature_names.empty()) throw InputError("csv: no feature columns left after role assignment");

  std::vector<double> a_values, b_values;
  std::vector<std::string> fields;
  std::size_t n = 0;
  while (detail::read_csv_record(in, fields, line)) {
    if (fields.size() == 1 && detail::trim(fields[0]).empty()) continue;  // blank line
    ++n;
    if (fields.size() != header.size())
      throw InputError("csv: row " + std::to_string(n) + " has " + std::to_string(fields.size()) +
                       " fields, header has " + std::to_string(header.size()));
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (role[c] == Role::ignore) continue;
      const double v = detail::parse_cell(fields[c], n, header[c]);
      (role[c] == Role::feature ? a_values : b_values).push_back(v);
    }
  }
  out.features = DataMatrix{n, out.feature_names.size(), std::move(a_values)};
  if (!out.ground_truth_names.empty())
    out.ground_truth = DataMatrix{n, out.ground_truth_names.size(), std::move(b_values)};
  return out;
}

inline DatasetBundle load_csv(const std::string& path, const ColumnRoles& roles = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path + "'");
  return parse_csv(in, roles);
}

/// Writes a header plus rows with round-trip precision.
inline void write_csv(std::ostream& out, const std::vector<std::string>& names,
                      const std::vector<const DataMatrix*>& blocks) {
  for (std::size_t c = 0; c < names.size(); ++c) out << (c ? "," : "") << names[c];
  out << '\n';
  const std::size_t n = blocks.front()->n_points();
  char buf[32];
  for (std::size_t i = 0; i < n; ++i) {
    bool first = true;
    for (const auto* b : blocks) {
      for (double v : b->row(i)) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << (first ? "" : ",");
        out.write(buf, ptr - buf);
        first = false;
      }
    }
    out << '\n';
  }
}

// ---------------------------------------------------------------------------
// Synthetic benchmarks

inline const std::vector<double>& default_gaussian_gt_weights() {
  static const std::vector<double> w{5.0, 2.0, 1.0, 1.0, 0.5, 1e-4, 1e-4, 1e-4, 1e-4, 1e-4};
  return w;
}

/// n points of d i.i.d. standard normals; ground truth is w_gt (.) X.
inline DatasetBundle gen_gaussian_benchmark(std::size_t n = 1500, std::size_t d = 10,
                                            std::optional<WeightVector> gt_weights = std::nullopt,
                                            std::uint64_t seed = 0) {
  if (!gt_weights) {
    if (d != default_gaussian_gt_weights().size())
      throw InputError("default ground-truth weights are defined for d = 10 only");
    gt_weights = WeightVector(default_gaussian_gt_weights());
  }
  if (gt_weights->size() != d) throw InputError("gt_weights length must equal d");
  Rng rng(seed, Stream::dataset);
  std::vector<double> x(n * d), b(n * d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < d; ++a) {
      x[i * d + a] = rng.normal();
      b[i * d + a] = (*gt_weights)[a] * x[i * d + a];
    }
  }
  DatasetBundle out{DataMatrix{n, d, std::move(x)}, DataMatrix{n, d, std::move(b)}, {}, {}, gt_weights, seed};
  for (std::size_t a = 0; a < d; ++a) {
    out.feature_names.push_back("x" + std::to_string(a + 1));
    out.ground_truth_names.push_back("gt" + std::to_string(a + 1));
  }
  return out;
}

/// A monomial as the sorted multiset of base-variable indices (0-based), e.g.
/// x1*x5*x6 -> {0, 4, 5}, (x2)^2 -> {1, 1}.
using Monomial = std::vector<std::size_t>;

/// All monomials of degree 1..max_degree in `base_d` variables, graded
/// lexicographic with x1 > x2 > ...: by degree, then lexicographically on the
/// sorted index tuple.
inline std::vector<Monomial> enumerate_monomials(std::size_t base_d, std::size_t max_degree) {
  std::vector<Monomial> out;
  for (std::size_t deg = 1; deg <= max_degree; ++deg) {
    Monomial m(deg, 0);
    while (true) {
      out.push_back(m);
      // next nondecreasing tuple
      std::size_t pos = deg;
      while (pos > 0 && m[pos - 1] == base_d - 1) --pos;
      if (pos == 0) break;
      const std::size_t v = m[pos - 1] + 1;
      for (std::size_t q = pos - 1; q < deg; ++q) m[q] = v;
    }
  }
  return out;
}

/// x1*x5*x6, x2^2, x8*x10^2. Variable names are 1-based.
inline std::string monomial_name(const Monomial& m) {
  std::string s;
  for (std::size_t i = 0; i < m.size();) {
    std::size_t j = i;
    while (j < m.size() && m[j] == m[i]) ++j;
    if (!s.empty()) s += '*';
    s += "x" + std::to_string(m[i] + 1);
    if (j - i > 1) s += "^" + std::to_string(j - i);
    i = j;
  }
  return s;
}

inline Monomial parse_monomial(std::string_view name) {
  Monomial m;
  while (!name.empty()) {
    const auto star = name.find('*');
    auto factor = name.substr(0, star);
    name = star == std::string_view::npos ? std::string_view{} : name.substr(star + 1);
    if (factor.size() < 2 || factor.front() != 'x') throw InputError("bad monomial factor '" + std::string{factor} + "'");
    factor.remove_prefix(1);
    const auto caret = factor.find('^');
    std::size_t var = 0, power = 1;
    auto base = factor.substr(0, caret);
    auto r1 = std::from_chars(base.data(), base.data() + base.size(), var);
    if (r1.ec != std::errc{} || r1.ptr != base.data() + base.size() || var == 0)
      throw InputError("bad monomial variable in '" + std::string{factor} + "'");
    if (caret != std::string_view::npos) {
      auto exp = factor.substr(caret + 1);
      auto r2 = std::from_chars(exp.data(), exp.data() + exp.size(), power);
      if (r2.ec != std::errc{} || r2.ptr != exp.data() + exp.size() || power == 0)
        throw InputError("bad monomial exponent in '" + std::string{factor} + "'");
    }
    m.insert(m.end(), power, var - 1);
  }
  if (m.empty()) throw InputError("empty monomial name");
  std::sort(m.begin(), m.end());
  return m;
}

/// Ground-truth monomials and weights of the 285-feature benchmark.
inline const std::vector<std::pair<std::string, double>>& default_monomial_ground_truth() {
  static const std::vector<std::pair<std::string, double>> gt{
      {"x5", 10.0}, {"x1*x5*x6", 7.0}, {"x3", 6.0}, {"x2^2", 5.0},   {"x6", 5.0},
      {"x10", 4.0}, {"x1*x2", 3.0},    {"x8*x10^2", 2.0}, {"x8", 1.0}, {"x5*x8", 1.0}};
  return gt;
}

/// Features are every monomial of degree 1..order of `base_d` standard
/// normals (285 for 10 variables, order 3). The ground truth is the listed
/// support monomials scaled by their weights.
inline DatasetBundle gen_monomial_benchmark(
    std::size_t n = 1500, std::size_t base_d = 10, std::size_t order = 3,
    std::vector<std::pair<std::string, double>> gt_support = default_monomial_ground_truth(),
    std::uint64_t seed = 0) {
  const auto monomials = enumerate_monomials(base_d, order);
  std::map<Monomial, std::size_t> index;
  for (std::size_t k = 0; k < monomials.size(); ++k) index[monomials[k]] = k;

  std::vector<std::size_t> support;
  std::vector<double> gt(monomials.size(), 0.0);
  for (const auto& [name, weight] : gt_support) {
    const auto it = index.find(parse_monomial(name));
    if (it == index.end()) throw InputError("ground-truth monomial '" + name + "' is outside the feature set");
    support.push_back(it->second);
    gt[it->second] = weight;
  }

  Rng rng(seed, Stream::dataset);
  const std::size_t d = monomials.size();
  std::vector<double> base(base_d), x(n * d), b(n * support.size());
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& v : base) v = rng.normal();
    for (std::size_t k = 0; k < d; ++k) {
      double prod = 1.0;
      for (auto v : monomials[k]) prod *= base[v];
      x[i * d + k] = prod;
    }
    for (std::size_t s = 0; s < support.size(); ++s) b[i * support.size() + s] = gt[support[s]] * x[i * d + support[s]];
  }

  DatasetBundle out{DataMatrix{n, d, std::move(x)}, DataMatrix{n, support.size(), std::move(b)},
                    {}, {}, WeightVector(std::move(gt)), seed};
  for (const auto& m : monomials) out.feature_names.push_back(monomial_name(m));
  for (const auto& [name, weight] : gt_support) out.ground_truth_names.push_back("gt_" + monomial_name(parse_monomial(name)));
  return out;
}

// ---------------------------------------------------------------------------
// Metrics and transforms

inline double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InputError("cosine_similarity: length mismatch");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    dot += a[k] * b[k];
    na += a[k] * a[k];
    nb += b[k] * b[k];
  }
  if (na == 0.0 || nb == 0.0) throw InputError("cosine_similarity: zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

inline double cosine_similarity(const WeightVector& a, const WeightVector& b) {
  return cosine_similarity(a.values(), b.values());
}

struct Standardized {
  DataMatrix data;
  std::vector<double> mean;
  std::vector<double> std;
};

/// Zero mean, unit population std per feature; constant features become 0.
inline Standardized standardize(const DataMatrix& data) {
  const std::size_t n = data.n_points(), d = data.n_features();
  std::vector<double> mean(d, 0.0), sd(d, 0.0);
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t i = 0; i < n; ++i) mean[a] += data(i, a);
    mean[a] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) sd[a] += (data(i, a) - mean[a]) * (data(i, a) - mean[a]);
    sd[a] = std::sqrt(sd[a] / static_cast<double>(n));
    if (sd[a] == 0.0) log::warn("feature " + std::to_string(a) + " is constant; standardized to 0");
  }
  std::vector<double> out(n * d);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a < d; ++a)
      out[i * d + a] = sd[a] > 0.0 ? (data(i, a) - mean[a]) / sd[a] : 0.0;
  return {DataMatrix{n, d, std::move(out)}, std::move(mean), std::move(sd)};
}

}  // namespace dii
