// dii: command-line front end for differentiable-information-imbalance
// feature weighting and selection.
//
//   dii generate   --benchmark gaussian --out data/
//   dii optimize   --data data/dataset.csv --meta data/dataset.json --out run/
//   dii lasso | greedy | exhaustive | eval | crossval | gradcheck
//
// Exit codes: 0 ok, 1 check failure, 2 usage/input error, 3 numerical abort.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "dii/core_math.hpp"
#include "dii/dataio.hpp"
#include "dii/error.hpp"
#include "dii/gradcheck.hpp"
#include "dii/log.hpp"
#include "dii/optimizer.hpp"
#include "dii/rng.hpp"
#include "dii/serialize.hpp"
#include "dii/sparsify.hpp"
#include "dii/version.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

enum ExitCode : int { ok = 0, check_failed = 1, usage_error = 2, numerical_abort = 3 };

struct Options {
  // data
  std::string data;
  std::string gt_cols;
  std::string gt_data;
  std::string ignore_cols;
  std::string meta;
  // optimizer
  std::size_t epochs = 100;
  std::string eta0 = "auto";
  std::string schedule = "cosine";
  double l1 = 0.0;
  std::string lambda = "adaptive";
  std::string rows = "all";
  std::string init_weights;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string out;
  // lasso
  std::string grid;
  // exhaustive
  std::size_t max_features = dii::default_exhaustive_limit;
  // eval
  std::string weights;
  std::string weights_column = "best";
  // crossval
  std::size_t blocks = 4;
  std::size_t stride = 1;
  // generate
  std::string benchmark = "gaussian";
  std::size_t points = 1500;
  // gradcheck
  std::size_t check_points = 100;
  std::size_t check_features = 8;
  std::size_t check_instances = 1;
  bool constant_feature = false;
  bool mutate_sign = false;
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<double> parse_grid(const std::string& s) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw dii::InputError("bad L1 grid value '" + item + "'");
    }
  }
  return out;
}

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

/// Writes manifest.json first, result files after, and the manifest again at
/// the end with timings and the output list. All wall-clock data lives here.
class Run {
 public:
  Run(std::string command, const Options& opt, json config) : command_{std::move(command)}, out_{opt.out} {
    manifest_ = {{"tool", "dii"},
                 {"version", dii::version},
                 {"command", command_},
                 {"seed", opt.seed},
                 {"config", std::move(config)},
                 {"inputs", json::object()},
                 {"outputs", json::array()},
                 {"timings_s", json::object()},
                 {"status", "running"}};
    for (const auto* path : {&opt.data, &opt.gt_data, &opt.meta, &opt.init_weights, &opt.weights})
      if (!path->empty() && fs::exists(*path))
        manifest_["inputs"][*path] = {{"fnv1a64", fnv1a64_file(*path)}, {"bytes", fs::file_size(*path)}};
    start_ = std::chrono::steady_clock::now();
  }

  void open() {
    if (out_.empty()) throw dii::InputError("--out is required");
    fs::create_directories(out_);
    opened_ = true;
    flush_manifest();
  }

  void phase(const std::string& name, std::chrono::steady_clock::time_point since) {
    manifest_["timings_s"][name] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
  }

  std::ofstream result_file(const std::string& name) {
    manifest_["outputs"].push_back(name);
    std::ofstream f(fs::path(out_) / name, std::ios::binary);
    if (!f) throw dii::InputError("cannot write " + (fs::path(out_) / name).string());
    return f;
  }

  void write_json(const std::string& name, const json& j) { result_file(name) << j.dump(2) << '\n'; }

  Run(const Run&) = delete;
  Run& operator=(const Run&) = delete;

  // A run that never reached finish() was aborted by an exception.
  ~Run() {
    if (!finished_ && opened_) {
      manifest_["status"] = "failed";
      flush_manifest();
    }
  }

  void finish(const std::string& status, const std::string& message = {}) {
    finished_ = true;
    manifest_["status"] = status;
    if (!message.empty()) manifest_["message"] = message;
    phase("total", start_);
    flush_manifest();
  }

 private:
  void flush_manifest() {
    std::ofstream f(fs::path(out_) / "manifest.json", std::ios::binary);
    f << manifest_.dump(2) << '\n';
  }

  std::string command_;
  std::string out_;
  json manifest_;
  std::chrono::steady_clock::time_point start_;
  bool opened_ = false;
  bool finished_ = false;
};

/// Dataset plus the resolved ground-truth ranks for the chosen anchor rows.
struct Problem {
  dii::DatasetBundle bundle;
  dii::DataMatrix ground_truth;
  bool self_supervised = false;
  std::vector<std::size_t> rows;
  dii::RankMatrix ranks;
};

dii::DatasetBundle load_bundle(const Options& opt) {
  if (opt.data.empty()) throw dii::InputError("--data is required");
  if (!fs::exists(opt.data)) throw dii::InputError("input file '" + opt.data + "' does not exist");
  dii::ColumnRoles roles;
  roles.ignore = split_list(opt.ignore_cols);
  std::optional<dii::io::Sidecar> meta;
  if (!opt.meta.empty()) meta = dii::io::read_sidecar(opt.meta);
  if (!opt.gt_cols.empty()) {
    roles.ground_truth = split_list(opt.gt_cols);
  } else if (opt.gt_data.empty() && meta) {
    roles.ground_truth = meta->ground_truth_columns;
  }
  auto bundle = dii::load_csv(opt.data, roles);
  if (!opt.gt_data.empty()) {
    if (!fs::exists(opt.gt_data)) throw dii::InputError("ground-truth file '" + opt.gt_data + "' does not exist");
    auto gt = dii::load_csv(opt.gt_data);
    if (gt.features.n_points() != bundle.features.n_points())
      throw dii::InputError("--gt-data has " + std::to_string(gt.features.n_points()) + " rows, --data has " +
                            std::to_string(bundle.features.n_points()));
    bundle.ground_truth = gt.features;
    bundle.ground_truth_names = gt.feature_names;
  }
  if (meta && meta->gt_weights) {
    if (meta->gt_weights->size() == bundle.features.n_features()) {
      bundle.gt_weights = meta->gt_weights;
    } else {
      dii::log::warn("metadata gt_weights length does not match the feature count; ignored");
    }
  }
  if (meta) bundle.seed = meta->seed;
  return bundle;
}

Problem load_problem(const Options& opt) {
  Problem p{load_bundle(opt), {}, false, {}, {}};
  if (p.bundle.ground_truth) {
    p.ground_truth = *p.bundle.ground_truth;
  } else {
    // No ground truth given: the standardized input space is its own target.
    dii::log::info("no ground truth given; using the standardized input features");
    p.ground_truth = dii::standardize(p.bundle.features).data;
    p.self_supervised = true;
  }
  return p;
}

void select_rows(Problem& p, const Options& opt) {
  p.rows = dii::subsample_rows(p.bundle.features.n_points(), dii::RowMode::parse(opt.rows), opt.seed);
}

void rank_problem(Problem& p, const Options& opt) {
  p.ranks = dii::ground_truth_ranks(p.ground_truth, p.rows, opt.jobs);
}

dii::OptimizerConfig make_config(const Options& opt, const Problem* problem) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = opt.epochs;
  if (opt.eta0 != "auto") {
    try {
      cfg.eta0 = std::stod(opt.eta0);
    } catch (const std::exception&) {
      throw dii::InputError("--eta0 must be a number or 'auto'");
    }
  }
  cfg.schedule = dii::parse_schedule(opt.schedule);
  cfg.l1_penalty = opt.l1;
  if (opt.lambda != "adaptive") {
    try {
      cfg.lambda0 = std::stod(opt.lambda);
    } catch (const std::exception&) {
      throw dii::InputError("--lambda must be 'adaptive' or a positive number");
    }
  }
  if (!opt.init_weights.empty()) {
    cfg.initial_weights = dii::io::read_named_weights_csv(opt.init_weights);
    if (problem && cfg.initial_weights->size() != problem->bundle.features.n_features())
      throw dii::InputError("--init-weights length does not match the feature count");
  }
  cfg.seed = opt.seed;
  cfg.jobs = opt.jobs;
  cfg.validate();
  return cfg;
}

json config_json(const Options& opt, const dii::OptimizerConfig& cfg) {
  return {{"data", opt.data},
          {"gt_cols", opt.gt_cols},
          {"gt_data", opt.gt_data},
          {"ignore_cols", opt.ignore_cols},
          {"meta", opt.meta},
          {"epochs", cfg.n_epochs},
          {"eta0", cfg.eta0 ? json(*cfg.eta0) : json("auto")},
          {"schedule", dii::to_string(cfg.schedule)},
          {"l1", cfg.l1_penalty},
          {"lambda", cfg.lambda0 ? json(*cfg.lambda0) : json("adaptive")},
          {"rows", opt.rows},
          {"init_weights", opt.init_weights},
          {"seed", opt.seed},
          {"jobs", opt.jobs},
          {"out", opt.out}};
}

void add_cosine(json& j, const Problem& p, const dii::WeightVector& w) {
  if (p.bundle.gt_weights && !w.all_zero())
    j["cosine_similarity"] = dii::cosine_similarity(w, *p.bundle.gt_weights);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_optimize(const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  Problem p = load_problem(opt);
  const auto cfg = make_config(opt, &p);
  select_rows(p, opt);
  Run run("optimize", opt, config_json(opt, cfg));
  run.open();
  run.phase("load", t0);

  t0 = std::chrono::steady_clock::now();
  rank_problem(p, opt);
  run.phase("ranks", t0);

  t0 = std::chrono::steady_clock::now();
  const auto trace = dii::optimize_dii(p.bundle.features, p.ranks, cfg);
  run.phase("optimize", t0);

  {
    auto f = run.result_file("trace.jsonl");
    dii::io::write_trace_jsonl(f, trace);
  }
  {
    auto f = run.result_file("weights.csv");
    dii::io::write_weights_csv(f, p.bundle.feature_names, trace.selected().weights, trace.final_weights);
  }
  json result{{"selected_epoch", trace.selected_epoch},
               {"selected_dii", trace.selected().dii},
               {"best_epoch", trace.best_epoch},
               {"best_dii", trace.best().dii},
               {"final_dii", trace.records.back().dii},
               {"n_nonzero", trace.selected().weights.n_nonzero()},
               {"schedule_used", dii::to_string(trace.schedule)},
               {"eta0_used", trace.eta0},
               {"self_supervised", p.self_supervised}};
  add_cosine(result, p, trace.selected().weights);
  run.write_json("result.json", result);
  run.finish("ok");
  std::cout << "DII " << dii::io::format_number(trace.selected().dii) << " at epoch " << trace.selected_epoch
            << ", " << trace.selected().weights.n_nonzero() << " nonzero weights\n";
  return ok;
}

void write_path_outputs(Run& run, const Problem& p, const dii::SparsityPath& path) {
  {
    auto f = run.result_file("path.csv");
    dii::io::write_path_csv(f, path, p.bundle.feature_names);
  }
  {
    auto f = run.result_file("cardinality.csv");
    dii::io::write_cardinality_csv(f, path);
  }
  auto j = dii::io::to_json(path, p.bundle.feature_names);
  if (p.bundle.gt_weights) {
    json cos = json::object();
    for (const auto& [card, idx] : path.best_by_cardinality)
      cos[std::to_string(card)] = dii::cosine_similarity(path.entries[idx].weights, *p.bundle.gt_weights);
    j["cosine_similarity_by_cardinality"] = cos;
  }
  run.write_json("path.json", j);
  std::cout << "n_nonzero,dii\n";
  for (const auto& [card, idx] : path.best_by_cardinality)
    std::cout << card << ',' << dii::io::format_number(path.entries[idx].dii) << '\n';
}

int cmd_path(const std::string& which, const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  Problem p = load_problem(opt);
  const auto cfg = make_config(opt, &p);
  std::vector<double> grid = opt.grid.empty() ? dii::default_l1_grid() : parse_grid(opt.grid);
  if (which == "lasso" && grid.empty()) throw dii::InputError("--grid is empty");
  if (which == "exhaustive" && p.bundle.features.n_features() > opt.max_features)
    throw dii::InputError("exhaustive search over " + std::to_string(p.bundle.features.n_features()) +
                          " features exceeds --max-features " + std::to_string(opt.max_features));
  select_rows(p, opt);
  auto config = config_json(opt, cfg);
  if (which == "lasso") config["grid"] = grid;
  if (which == "exhaustive") config["max_features"] = opt.max_features;
  Run run(which, opt, config);
  run.open();
  run.phase("load", t0);

  t0 = std::chrono::steady_clock::now();
  rank_problem(p, opt);
  run.phase("ranks", t0);

  t0 = std::chrono::steady_clock::now();
  dii::SparsityPath path;
  if (which == "lasso") {
    path = dii::lasso_search(p.bundle.features, p.ranks, cfg, grid, opt.jobs);
  } else if (which == "greedy") {
    path = dii::greedy_backward(p.bundle.features, p.ranks, cfg);
  } else {
    path = dii::exhaustive_search(p.bundle.features, p.ranks, cfg, opt.max_features, opt.jobs);
  }
  run.phase(which, t0);
  write_path_outputs(run, p, path);
  run.finish("ok");
  return ok;
}

int cmd_eval(const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  Problem p = load_problem(opt);
  if (opt.weights.empty()) throw dii::InputError("--weights is required");
  const auto w = dii::io::read_named_weights_csv(opt.weights, opt.weights_column);
  if (w.size() != p.bundle.features.n_features())
    throw dii::InputError("weights file has " + std::to_string(w.size()) + " entries, data has " +
                          std::to_string(p.bundle.features.n_features()) + " features");
  const auto cfg = make_config(opt, &p);
  select_rows(p, opt);
  Run run("eval", opt, config_json(opt, cfg));
  run.open();
  run.phase("load", t0);
  t0 = std::chrono::steady_clock::now();
  rank_problem(p, opt);
  const auto ev = dii::evaluate_dii(p.bundle.features, w, p.ranks, cfg.lambda0, opt.jobs);
  json result{{"dii", ev.dii},
              {"lambda", ev.lambda},
              {"classic_imbalance", dii::classic_imbalance(ev.distances, p.ranks)},
              {"n_nonzero", w.n_nonzero()}};
  add_cosine(result, p, w);
  run.phase("evaluate", t0);
  run.write_json("result.json", result);
  run.finish("ok");
  std::cout << "DII " << dii::io::format_number(ev.dii) << '\n';
  return ok;
}

int cmd_crossval(const Options& opt) {
  auto t0 = std::chrono::steady_clock::now();
  Problem p = load_problem(opt);
  const auto cfg = make_config(opt, &p);
  if (opt.rows != "all") dii::log::warn("--rows is ignored by crossval; each block uses all its points");
  const auto split = dii::BlockSplit::make(p.bundle.features.n_points(), opt.blocks, opt.stride);
  if (split.n_blocks < 2) throw dii::InputError("cross-validation needs at least 2 blocks: validation set empty");
  auto config = config_json(opt, cfg);
  config["blocks"] = opt.blocks;
  config["stride"] = opt.stride;
  Run run("crossval", opt, config);
  run.open();
  run.phase("load", t0);

  t0 = std::chrono::steady_clock::now();
  const auto cv = dii::block_cross_validate(p.bundle.features, p.ground_truth, split, cfg, opt.jobs);
  run.phase("crossval", t0);

  json blocks = json::array();
  for (const auto& b : cv.blocks) {
    json jb{{"block", b.block},
            {"n_points", split.blocks[b.block].size()},
            {"train_dii", b.train_dii},
            {"validation_dii", b.validation_dii},
            {"weights", b.weights.vector()}};
    add_cosine(jb, p, b.weights);
    blocks.push_back(std::move(jb));
  }
  run.write_json("crossval.json", {{"feature_names", p.bundle.feature_names},
                                   {"blocks", blocks},
                                   {"train_mean", cv.train_mean},
                                   {"train_std", cv.train_std},
                                   {"validation_mean", cv.validation_mean},
                                   {"validation_std", cv.validation_std}});
  run.finish("ok");
  std::cout << "train DII " << cv.train_mean << " +- " << cv.train_std << ", validation DII "
            << cv.validation_mean << " +- " << cv.validation_std << '\n';
  return ok;
}

int cmd_generate(const Options& opt) {
  dii::DatasetBundle bundle;
  std::string generator;
  if (opt.benchmark == "gaussian") {
    bundle = dii::gen_gaussian_benchmark(opt.points, 10, std::nullopt, opt.seed);
    generator = "gaussian";
  } else if (opt.benchmark == "monomial") {
    bundle = dii::gen_monomial_benchmark(opt.points, 10, 3, dii::default_monomial_ground_truth(), opt.seed);
    generator = "monomial";
  } else {
    throw dii::InputError("--benchmark must be 'gaussian' or 'monomial'");
  }
  auto t0 = std::chrono::steady_clock::now();
  Run run("generate", opt, {{"benchmark", opt.benchmark}, {"points", opt.points}, {"seed", opt.seed}, {"out", opt.out}});
  run.open();
  {
    auto f = run.result_file("dataset.csv");
    auto names = bundle.feature_names;
    names.insert(names.end(), bundle.ground_truth_names.begin(), bundle.ground_truth_names.end());
    dii::write_csv(f, names, {&bundle.features, &*bundle.ground_truth});
  }
  run.write_json("dataset.json", dii::io::sidecar_json(bundle, generator));
  run.phase("generate", t0);
  run.finish("ok");
  std::cout << "wrote " << bundle.features.n_points() << " points, " << bundle.features.n_features()
            << " features, " << bundle.ground_truth->n_features() << " ground-truth columns\n";
  return ok;
}

int cmd_gradcheck(const Options& opt) {
  if (opt.check_points < 3 || opt.check_points > 200) throw dii::InputError("--points must lie in [3, 200]");
  if (opt.check_features < 1 || opt.check_features > 20) throw dii::InputError("--features must lie in [1, 20]");
  double worst = 0.0;
  for (std::size_t inst = 0; inst < opt.check_instances; ++inst) {
    dii::Rng rng(opt.seed, dii::Stream::gradcheck, inst);
    const std::size_t n = opt.check_points, d = opt.check_features;
    std::vector<double> a(n * d), b(n * d);
    std::vector<double> mix(d), w(d);
    for (auto& m : mix) m = 0.2 + 2.0 * rng.uniform();
    for (auto& v : w) v = 0.5 + 1.5 * rng.uniform();
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < d; ++k) {
        a[i * d + k] = (opt.constant_feature && k == 0) ? 1.0 : rng.normal();
        b[i * d + k] = mix[k] * a[i * d + k] + 0.3 * rng.normal();
      }
    }
    const dii::DataMatrix da(n, d, std::move(a)), db(n, d, std::move(b));
    const auto ranks = dii::ground_truth_ranks(db);
    auto check = dii::check_gradient(da, dii::WeightVector(w), ranks);
    if (opt.mutate_sign) {
      // Checker self-test: a sign-flipped gradient must be caught.
      check.max_relative_error = 0.0;
      for (std::size_t k = 0; k < d; ++k) {
        check.analytic[k] = -check.analytic[k];
        const double scale = std::max(std::abs(check.analytic[k]), std::abs(check.numeric[k]));
        check.relative_error[k] = scale > 0.0 ? std::abs(check.analytic[k] - check.numeric[k]) / scale : 0.0;
        check.max_relative_error = std::max(check.max_relative_error, check.relative_error[k]);
      }
    }
    std::cout << "instance " << inst << " (N=" << n << ", D=" << d << ", lambda=" << check.lambda << ")\n";
    std::cout << "feature,analytic,finite_difference,relative_error\n";
    for (std::size_t k = 0; k < d; ++k)
      std::cout << k << ',' << dii::io::format_number(check.analytic[k]) << ','
                << dii::io::format_number(check.numeric[k]) << ',' << check.relative_error[k] << '\n';
    worst = std::max(worst, check.max_relative_error);
  }
  const bool pass = worst < 1e-5;
  std::cout << "max relative error " << worst << (pass ? " < 1e-5: PASS\n" : " >= 1e-5: FAIL\n");
  return pass ? ok : check_failed;
}

void add_data_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--data", opt.data, "Input CSV (header required)");
  cmd->add_option("--gt-cols", opt.gt_cols, "Comma-separated ground-truth column names in --data");
  cmd->add_option("--gt-data", opt.gt_data, "Separate ground-truth CSV, row-aligned with --data");
  cmd->add_option("--ignore-cols", opt.ignore_cols, "Comma-separated columns to drop");
  cmd->add_option("--meta", opt.meta, "Dataset sidecar JSON (column roles, gt_weights)");
}

void add_optimizer_options(CLI::App* cmd, Options& opt) {
  cmd->add_option("--epochs", opt.epochs, "Training epochs")->check(CLI::PositiveNumber);
  cmd->add_option("--eta0", opt.eta0, "Initial learning rate or 'auto'");
  cmd->add_option("--schedule", opt.schedule, "Learning-rate decay")
      ->check(CLI::IsMember({"cosine", "exp", "both", "const"}));
  cmd->add_option("--l1", opt.l1, "L1 penalty strength")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lambda", opt.lambda, "'adaptive' or a fixed softmax scale");
  cmd->add_option("--rows", opt.rows, "Anchor rows: all | frac:<f> | fixed:<m>");
  cmd->add_option("--init-weights", opt.init_weights, "Initial weights CSV (feature,best[,final])");
  cmd->add_option("--seed", opt.seed, "Seed for every random stream");
  cmd->add_option("--jobs", opt.jobs, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--out", opt.out, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Differentiable information imbalance: feature weighting and selection"};
  app.set_version_flag("--version", dii::version);
  app.set_config("--config", "", "TOML/INI config file; command-line flags take precedence");
  app.require_subcommand(1);
  Options opt;

  auto* optimize = app.add_subcommand("optimize", "Learn feature weights by gradient descent");
  auto* lasso = app.add_subcommand("lasso", "Scan L1 strengths, report DII per cardinality");
  auto* greedy = app.add_subcommand("greedy", "Backward greedy elimination");
  auto* exhaustive = app.add_subcommand("exhaustive", "Optimize every feature subset");
  auto* eval = app.add_subcommand("eval", "DII of fixed weights");
  auto* crossval = app.add_subcommand("crossval", "Block cross-validation");
  for (auto* cmd : {optimize, lasso, greedy, exhaustive, eval, crossval}) {
    add_data_options(cmd, opt);
    add_optimizer_options(cmd, opt);
  }
  lasso->add_option("--grid", opt.grid, "Comma-separated L1 strengths (default: 24 log-spaced in [1e-6, 1e-1])");
  exhaustive->add_option("--max-features", opt.max_features, "Refuse inputs with more features");
  eval->add_option("--weights", opt.weights, "Weights CSV")->required();
  eval->add_option("--weights-column", opt.weights_column, "Column of the weights CSV to use");
  crossval->add_option("--blocks", opt.blocks, "Number of contiguous blocks");
  crossval->add_option("--stride", opt.stride, "Keep every stride-th point of each block")->check(CLI::PositiveNumber);

  auto* generate = app.add_subcommand("generate", "Write a synthetic benchmark dataset");
  generate->add_option("--benchmark", opt.benchmark, "gaussian | monomial")
      ->check(CLI::IsMember({"gaussian", "monomial"}));
  generate->add_option("--points", opt.points, "Number of points")->check(CLI::Range(3, 1000000));
  generate->add_option("--seed", opt.seed, "Seed");
  generate->add_option("--out", opt.out, "Output directory")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "Analytic gradient vs central differences");
  gradcheck->add_option("--points", opt.check_points, "Points per instance (<= 200)");
  gradcheck->add_option("--features", opt.check_features, "Features per instance (<= 20)");
  gradcheck->add_option("--instances", opt.check_instances, "Random instances")->check(CLI::PositiveNumber);
  gradcheck->add_option("--seed", opt.seed, "Seed");
  gradcheck->add_flag("--constant-feature", opt.constant_feature, "Make feature 0 constant");
  gradcheck->add_flag("--mutate-sign", opt.mutate_sign, "Flip the analytic gradient's sign (checker self-test)")
      ->group("Testing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : usage_error;
  }

  try {
    if (*optimize) return cmd_optimize(opt);
    if (*lasso) return cmd_path("lasso", opt);
    if (*greedy) return cmd_path("greedy", opt);
    if (*exhaustive) return cmd_path("exhaustive", opt);
    if (*eval) return cmd_eval(opt);
    if (*crossval) return cmd_crossval(opt);
    if (*generate) return cmd_generate(opt);
    if (*gradcheck) return cmd_gradcheck(opt);
  } catch (const dii::NumericalError& e) {
    std::cerr << "dii: numerical abort: " << e.what() << '\n';
    return numerical_abort;
  } catch (const dii::InputError& e) {
    std::cerr << "dii: input error: " << e.what() << '\n';
    return usage_error;
  } catch (const std::exception& e) {
    std::cerr << "dii: error: " << e.what() << '\n';
    return usage_error;
  }
  return usage_error;
}
