#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "dii/serialize.hpp"

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / "dii_test_serialize";
  fs::create_directories(dir);
  return dir / name;
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(dii::io::format_number(0.1), "0.1");
  EXPECT_EQ(dii::io::format_number(5.0), "5");
  EXPECT_EQ(dii::io::format_number(std::numeric_limits<double>::quiet_NaN()), "nan");
  const double v = 1.0 / 3.0;
  EXPECT_EQ(std::stod(dii::io::format_number(v)), v);
  EXPECT_TRUE(dii::io::number_or_null(std::nan("")).is_null());
}

TEST(Trace, JsonLinesRoundTrip) {
  dii::OptimizationTrace t;
  t.records.push_back({0, 0.5, dii::WeightVector{1, 2}, 0.0, 0.3});
  t.records.push_back({1, 0.25, dii::WeightVector{1.5, 0}, 0.1, 0.2});
  std::stringstream s;
  dii::io::write_trace_jsonl(s, t);
  auto back = dii::io::read_trace_jsonl(s);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].epoch, 1u);
  EXPECT_EQ(back[1].dii, 0.25);
  EXPECT_EQ(back[1].weights, (dii::WeightVector{1.5, 0}));
  EXPECT_EQ(back[1].learning_rate, 0.1);
  EXPECT_EQ(back[0].lambda, 0.3);
}

TEST(Weights, CsvRoundTrip) {
  const auto path = scratch("weights.csv");
  {
    std::ofstream f(path);
    dii::io::write_weights_csv(f, {"a", "b", "c"}, dii::WeightVector{0.1, 0, 3}, dii::WeightVector{0.2, 0, 4});
  }
  EXPECT_EQ(dii::io::read_named_weights_csv(path.string()), (dii::WeightVector{0.1, 0, 3}));
  EXPECT_EQ(dii::io::read_named_weights_csv(path.string(), "final"), (dii::WeightVector{0.2, 0, 4}));
  EXPECT_THROW(dii::io::read_named_weights_csv(path.string(), "nope"), dii::InputError);
  EXPECT_THROW(dii::io::read_named_weights_csv((path.string() + ".missing")), dii::InputError);
}

TEST(Path, CsvLayout) {
  dii::SparsityPath p;
  p.add(1e-3, dii::WeightVector{1, 0}, 0.2);
  p.add_over_regularized(1.0, 2);
  p.rebuild_bests();
  std::ostringstream out;
  dii::io::write_path_csv(out, p, {"u", "v"});
  EXPECT_EQ(out.str(), "control,n_nonzero,dii,u,v\n0.001,1,0.2,1,0\n1,0,nan,0,0\n");
  std::ostringstream card;
  dii::io::write_cardinality_csv(card, p);
  EXPECT_EQ(card.str(), "n_nonzero,dii\n1,0.2\n");
  auto j = dii::io::to_json(p, {"u", "v"});
  EXPECT_TRUE(j["entries"][1]["dii"].is_null());
  EXPECT_TRUE(j["entries"][1]["over_regularized"].get<bool>());
}

TEST(Sidecar, RoundTrip) {
  auto b = dii::gen_gaussian_benchmark(20, 10, std::nullopt, 5);
  const auto path = scratch("dataset.json");
  {
    std::ofstream f(path);
    f << dii::io::sidecar_json(b, "gaussian").dump(2);
  }
  auto s = dii::io::read_sidecar(path.string());
  EXPECT_EQ(s.feature_columns, b.feature_names);
  EXPECT_EQ(s.ground_truth_columns, b.ground_truth_names);
  EXPECT_EQ(*s.gt_weights, *b.gt_weights);
  EXPECT_EQ(*s.seed, 5u);
}

TEST(Sidecar, InvalidJson) {
  const auto path = scratch("bad.json");
  {
    std::ofstream f(path);
    f << "{not json";
  }
  EXPECT_THROW(dii::io::read_sidecar(path.string()), dii::InputError);
}

}  // namespace
