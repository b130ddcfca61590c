#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "dii/dataio.hpp"
#include "dii/error.hpp"
#include "dii/log.hpp"
#include "dii/optimizer.hpp"

namespace {

using dii::Schedule;
using dii::WeightVector;

struct Small {
  dii::DatasetBundle bundle = dii::gen_gaussian_benchmark(200, 10, std::nullopt, 3);
  dii::RankMatrix ranks = dii::ground_truth_ranks(*bundle.ground_truth);
};

const Small& small() {
  static const Small s;
  return s;
}

TEST(LearningRate, Cosine) {
  EXPECT_DOUBLE_EQ(dii::learning_rate(0, 2.0, 100, Schedule::cosine), 2.0);
  EXPECT_NEAR(dii::learning_rate(50, 2.0, 100, Schedule::cosine), 1.0, 1e-15);
  EXPECT_NEAR(dii::learning_rate(25, 2.0, 100, Schedule::cosine), 0.5 * 2.0 * (1 + std::cos(std::numbers::pi / 4)),
              1e-15);
}

TEST(LearningRate, ExponentialHalvesEveryTenEpochs) {
  EXPECT_DOUBLE_EQ(dii::learning_rate(0, 3.0, 100, Schedule::exponential), 3.0);
  EXPECT_DOUBLE_EQ(dii::learning_rate(10, 3.0, 100, Schedule::exponential), 1.5);
  EXPECT_DOUBLE_EQ(dii::learning_rate(30, 3.0, 100, Schedule::exponential), 0.375);
}

TEST(LearningRate, Constant) {
  EXPECT_EQ(dii::learning_rate(77, 0.4, 100, Schedule::constant), 0.4);
}

TEST(Schedule, ParseAndPrint) {
  for (auto s : {Schedule::constant, Schedule::cosine, Schedule::exponential, Schedule::best_of_both})
    EXPECT_EQ(dii::parse_schedule(dii::to_string(s)), s);
  EXPECT_THROW(dii::parse_schedule("linear"), dii::InputError);
}

TEST(L1Clip, Cases) {
  std::vector<double> half{0.05, -0.3, 0.0, 1.0, -0.05};
  auto w = dii::l1_clip_step(half, 1.0, 0.1);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_NEAR(w[1], 0.2, 1e-15);
  EXPECT_EQ(w[2], 0.0);
  EXPECT_NEAR(w[3], 0.9, 1e-15);
  EXPECT_EQ(w[4], 0.0);
  EXPECT_FALSE(std::signbit(w[0]));
}

TEST(L1Clip, ZeroPenaltyTakesMagnitudes) {
  std::vector<double> half{0.5, -0.25, 0.0};
  auto w = dii::l1_clip_step(half, 3.0, 0.0);
  EXPECT_EQ(w.vector(), (std::vector<double>{0.5, 0.25, 0.0}));
}

TEST(InitialWeights, InverseStd) {
  auto x = dii::DataMatrix::from_rows({{0, 1, 5}, {2, 1, 5}, {4, 1, 5}, {6, 1, 7}});
  std::vector<std::string> warnings;
  auto old = dii::log::set_sink([&](dii::log::Level, std::string_view m) { warnings.emplace_back(m); });
  auto w = dii::initial_weights(x);
  dii::log::set_sink(old);
  EXPECT_NEAR(w[0], 1.0 / std::sqrt(5.0), 1e-15);
  EXPECT_EQ(w[1], 0.0);
  EXPECT_NEAR(w[2], 1.0 / std::sqrt(0.75), 1e-15);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("constant"), std::string::npos);
}

TEST(Config, Validation) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 0;
  EXPECT_THROW(cfg.validate(), dii::InputError);
  cfg = {};
  cfg.eta0 = -1.0;
  EXPECT_THROW(cfg.validate(), dii::InputError);
  cfg = {};
  cfg.l1_penalty = -1e-3;
  EXPECT_THROW(cfg.validate(), dii::InputError);
  cfg = {};
  cfg.lambda0 = 0.0;
  EXPECT_THROW(cfg.validate(), dii::InputError);
}

TEST(Optimize, TraceShapeAndImprovement) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 20;
  cfg.eta0 = 10.0;
  auto t = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  ASSERT_EQ(t.records.size(), 21u);
  EXPECT_EQ(t.records[0].epoch, 0u);
  EXPECT_EQ(t.records[0].learning_rate, 0.0);
  EXPECT_EQ(t.records[1].learning_rate, 10.0);
  EXPECT_LT(t.best().dii, t.records[0].dii);
  EXPECT_EQ(t.final_weights, t.records.back().weights);
  for (const auto& r : t.records) {
    EXPECT_GT(r.lambda, 0.0);
    EXPECT_GT(r.dii, 0.0);
    EXPECT_LT(r.dii, 2.0);
  }
  for (std::size_t k = 0; k < t.records.size(); ++k) EXPECT_LE(t.best().dii, t.records[k].dii);
}

TEST(Optimize, EpochZeroIsInverseStd) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 2;
  cfg.eta0 = 1.0;
  auto t = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  EXPECT_EQ(t.records[0].weights, dii::initial_weights(small().bundle.features));
}

TEST(Optimize, Deterministic) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 10;
  cfg.eta0 = 5.0;
  cfg.l1_penalty = 1e-3;
  auto a = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  cfg.jobs = 3;
  auto b = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    EXPECT_EQ(a.records[k].dii, b.records[k].dii);
    EXPECT_EQ(a.records[k].weights, b.records[k].weights);
  }
}

TEST(Optimize, ZeroInitialWeightStaysZero) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 10;
  cfg.eta0 = 10.0;
  auto w0 = dii::initial_weights(small().bundle.features).with_zero(0);
  cfg.initial_weights = w0;
  auto t = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  for (const auto& r : t.records) EXPECT_EQ(r.weights[0], 0.0);
}

TEST(Optimize, L1ProducesExactZeros) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 40;
  cfg.eta0 = 10.0;
  cfg.l1_penalty = 1e-2;
  auto t = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  EXPECT_LT(t.final_weights.n_nonzero(), 10u);
  for (std::size_t a = 0; a < 10; ++a)
    if (!(t.final_weights[a] > 0.0)) EXPECT_EQ(t.final_weights[a], 0.0);
  // The selected epoch shares the final support.
  EXPECT_EQ(t.selected().weights.support(), t.final_weights.support());
}

TEST(Optimize, OverRegularizedAborts) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 10;
  cfg.eta0 = 10.0;
  cfg.l1_penalty = 10.0;
  try {
    dii::optimize_dii(small().bundle.features, small().ranks, cfg);
    FAIL() << "expected NumericalError";
  } catch (const dii::NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("over-regularized"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("epoch 1"), std::string::npos);
  }
}

TEST(Optimize, BestOfBothPicksLower) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 15;
  cfg.eta0 = 10.0;
  cfg.schedule = Schedule::cosine;
  const double cos_dii = dii::optimize_dii(small().bundle.features, small().ranks, cfg).selected().dii;
  cfg.schedule = Schedule::exponential;
  const double exp_dii = dii::optimize_dii(small().bundle.features, small().ranks, cfg).selected().dii;
  cfg.schedule = Schedule::best_of_both;
  auto both = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  EXPECT_EQ(both.selected().dii, std::min(cos_dii, exp_dii));
  EXPECT_NE(both.schedule, Schedule::best_of_both);
}

TEST(Optimize, FixedLambdaIsRecorded) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 3;
  cfg.eta0 = 1.0;
  cfg.lambda0 = 0.25;
  auto t = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  for (const auto& r : t.records) EXPECT_EQ(r.lambda, 0.25);
}

TEST(Optimize, AutoEtaPicksACandidate) {
  dii::OptimizerConfig cfg;
  cfg.n_epochs = 5;
  auto t = dii::optimize_dii(small().bundle.features, small().ranks, cfg);
  bool found = false;
  for (double c : dii::auto_eta_candidates) found |= (c == t.eta0);
  EXPECT_TRUE(found);
}

TEST(Optimize, GroundTruthWeightsBeatInverseStd) {
  const auto& s = small();
  const WeightVector gt = *s.bundle.gt_weights;
  EXPECT_LE(dii::evaluate_dii_fixed(s.bundle.features, s.ranks, gt),
            dii::evaluate_dii_fixed(s.bundle.features, s.ranks, dii::initial_weights(s.bundle.features)));
}

TEST(Optimize, ShapeMismatch) {
  dii::OptimizerConfig cfg;
  cfg.initial_weights = WeightVector{1.0, 2.0};
  EXPECT_THROW(dii::optimize_dii(small().bundle.features, small().ranks, cfg), dii::InputError);
}

}  // namespace
