#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pertrans/classify.hpp"

using namespace pertrans;
using pertrans::testing::finite_difference_gradient;

namespace {

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

/// Two overlapping Gaussian classes; never separable for n this large.
void overlapping_classes(std::mt19937_64& gen, std::size_t n, std::size_t q, Rows& z, std::vector<int>& y) {
  std::normal_distribution<double> noise(0.0, 1.0);
  z.assign(n, std::vector<double>(q));
  y.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = static_cast<int>(i % 2);
    for (std::size_t j = 0; j < q; ++j) z[i][j] = noise(gen) + (y[i] ? 0.7 : 0.0) * (j == 0);
  }
}

}  // namespace

// ---------------------------------------------------------------- logistic

TEST(Logistic, NoSignalGivesZeroCoefficients) {
  const Rows z{{0}, {0}, {0}, {0}};
  const auto m = fit_logistic(z, std::vector<int>{0, 1, 0, 1});
  ASSERT_EQ(m.beta.size(), 2u);
  EXPECT_NEAR(m.beta[0], 0.0, 1e-12);
  EXPECT_NEAR(m.beta[1], 0.0, 1e-12);
  EXPECT_EQ(m.status, FitStatus::Converged);
}

TEST(Logistic, InterceptOnlyMatchesLogOdds) {
  const Rows z(4, std::vector<double>{});
  const auto m = fit_logistic(z, std::vector<int>{1, 1, 1, 0});
  ASSERT_EQ(m.beta.size(), 1u);
  EXPECT_NEAR(m.beta[0], std::log(3.0), 1e-6);
  EXPECT_EQ(m.status, FitStatus::Converged);
}

TEST(Logistic, SeparatedDataIsFlaggedAndFitsTraining) {
  const Rows z{{0.0}, {1.0}, {2.0}, {3.0}};
  const std::vector<int> y{0, 0, 1, 1};
  const auto m = fit_logistic(z, y);
  EXPECT_EQ(m.status, FitStatus::Separated);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(predict_logistic(m, z[i]).label, y[i]);
  EXPECT_LE(m.iterations, 200);
}

TEST(Logistic, SingleClassSaturatesAndIsFlagged) {
  const Rows z{{1.0}, {2.0}, {3.0}};
  const auto m = fit_logistic(z, std::vector<int>{1, 1, 1});
  EXPECT_EQ(m.status, FitStatus::Separated);
  EXPECT_GT(predict_logistic(m, std::vector<double>{2.0}).probability, 1.0 - 1e-6);
}

TEST(Logistic, GradientMatchesFiniteDifferences) {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + gen() % 20, q = gen() % 6;
    Rows z(n, std::vector<double>(q));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : z[i]) v = nd(gen);
      y[i] = static_cast<int>(gen() % 2);
    }
    std::vector<double> beta(q + 1);
    for (auto& b : beta) b = nd(gen);
    const auto g = logistic_gradient(z, y, beta);
    const auto fd = finite_difference_gradient(z, y, beta);
    for (std::size_t j = 0; j < g.size(); ++j)
      EXPECT_LE(std::fabs(g[j] - fd[j]), 1e-5 * std::max(1.0, std::fabs(g[j]))) << trial << ":" << j;
  }
}

TEST(Logistic, StationaryOnNonSeparatedProblems) {
  std::mt19937_64 gen(23);
  for (int trial = 0; trial < 10; ++trial) {
    Rows z;
    std::vector<int> y;
    overlapping_classes(gen, 300, 4, z, y);
    const auto m = fit_logistic(z, y);
    ASSERT_EQ(m.status, FitStatus::Converged);
    EXPECT_LE(max_abs(logistic_gradient(z, y, m.beta)), 1e-6);
  }
}

TEST(Logistic, ZeroColumnsKeepZeroCoefficient) {
  std::mt19937_64 gen(2);
  Rows z;
  std::vector<int> y;
  overlapping_classes(gen, 100, 3, z, y);
  for (auto& row : z) row.insert(row.begin() + 1, 0.0);
  const auto m = fit_logistic(z, y);
  EXPECT_EQ(m.beta[2], 0.0);
  EXPECT_EQ(m.status, FitStatus::Converged);
}

TEST(Logistic, ScoreInvariantUnderColumnRescale) {
  LogisticModel m;
  m.beta = {0.3, -1.2, 2.5};
  LogisticModel scaled = m;
  const double c = 8.0;
  scaled.beta[2] /= c;
  const std::vector<double> z{0.4, 1.7}, zs{0.4, 1.7 * c};
  EXPECT_NEAR(m.score(z), scaled.score(zs), 1e-12);
}

TEST(Logistic, RejectsDimensionMismatch) {
  EXPECT_THROW(fit_logistic(Rows{{1.0}, {2.0}}, std::vector<int>{1}), ValidationError);
  EXPECT_THROW(fit_logistic(Rows{{1.0}, {2.0, 3.0}}, std::vector<int>{1, 0}), ValidationError);
  EXPECT_THROW(fit_logistic(Rows{}, std::vector<int>{}), ValidationError);
}

TEST(PredictLogistic, ZeroCoefficientsGiveHalfAndClassZero) {
  LogisticModel m;
  m.beta = {0.0, 0.0, 0.0};
  const auto p = predict_logistic(m, std::vector<double>{3.0, -1.0});
  EXPECT_EQ(p.probability, 0.5);
  EXPECT_EQ(p.label, 0);
}

TEST(PredictLogistic, LogThreeInterceptGivesThreeQuarters) {
  LogisticModel m;
  m.beta = {std::log(3.0), 0.0};
  const auto p = predict_logistic(m, std::vector<double>{42.0});
  EXPECT_NEAR(p.probability, 0.75, 1e-15);
  EXPECT_EQ(p.label, 1);
}

TEST(PredictLogistic, Saturation) {
  LogisticModel m;
  m.beta = {-100.0, 0.0};
  const auto p = predict_logistic(m, std::vector<double>{1.0});
  EXPECT_LT(p.probability, 1e-40);
  EXPECT_EQ(p.label, 0);
}

TEST(PredictLogistic, LengthMismatch) {
  LogisticModel m;
  m.beta = {0.0, 0.0};
  EXPECT_THROW(predict_logistic(m, std::vector<double>{1.0, 2.0}), ValidationError);
}

// ---------------------------------------------------------------- forest

TEST(Gini, PureAndBalanced) {
  EXPECT_EQ(gini(5, 0), 0.0);
  EXPECT_EQ(gini(0, 3), 0.0);
  EXPECT_EQ(gini(2, 2), 0.5);
}

TEST(Forest, FourPointStump) {
  const Rows z{{0}, {1}, {2}, {3}};
  const std::vector<int> y{0, 0, 1, 1};
  ForestParams p;
  p.n_trees = 1;
  p.mtry = 1;
  p.bootstrap = false;
  const auto f = fit_forest(z, y, p);
  ASSERT_EQ(f.trees.size(), 1u);
  const auto& root = f.trees[0].nodes[0];
  EXPECT_EQ(root.feature, 0);
  EXPECT_EQ(root.threshold, 1.5);
  EXPECT_EQ(f.trees[0].nodes.size(), 3u);
  for (std::size_t i = 0; i < z.size(); ++i) EXPECT_EQ(predict_forest(f, z[i]), y[i]);
}

TEST(Forest, DefaultParameters) {
  const ForestParams p;
  EXPECT_EQ(p.n_trees, 1000u);
  EXPECT_EQ(p.min_leaf, 1u);
  EXPECT_EQ(p.seed, 1234u);
  EXPECT_TRUE(p.bootstrap);
  EXPECT_EQ(default_mtry(1699), 42u);
  EXPECT_EQ(default_mtry(16), 4u);
  EXPECT_EQ(default_mtry(17), 5u);
}

namespace {

ForestModel vote_forest(std::vector<int> leaf_classes) {
  ForestModel f;
  f.width = 1;
  for (int c : leaf_classes) {
    DecisionTree t;
    TreeNode leaf;
    leaf.counts = c ? std::array<std::uint32_t, 2>{0, 3} : std::array<std::uint32_t, 2>{3, 0};
    t.nodes.push_back(leaf);
    f.trees.push_back(t);
  }
  return f;
}

}  // namespace

TEST(PredictForest, Votes) {
  const std::vector<double> z{0.0};
  EXPECT_EQ(predict_forest(vote_forest({1, 1, 1}), z), 1);
  EXPECT_EQ(predict_forest(vote_forest({1}), z), 1);
  EXPECT_EQ(predict_forest(vote_forest({0}), z), 0);
  EXPECT_EQ(predict_forest(vote_forest({1, 0}), z), 0);
  EXPECT_EQ(predict_forest(vote_forest({1, 0, 1, 0}), z), 0);
  EXPECT_THROW(predict_forest(vote_forest({1}), std::vector<double>{0.0, 1.0}), ValidationError);
}

TEST(PredictForest, TiedLeafGoesToClassZero) {
  DecisionTree t;
  TreeNode leaf;
  leaf.counts = {2, 2};
  t.nodes.push_back(leaf);
  EXPECT_EQ(t.predict(std::vector<double>{0.0}), 0);
}

TEST(Forest, FullTrainingAccuracyWithoutBootstrap) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 20 + gen() % 40, q = 1 + gen() % 8;
    Rows z(n, std::vector<double>(q));
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (auto& v : z[i]) v = std::uniform_real_distribution<double>(0.0, 1.0)(gen);  // distinct rows
      y[i] = static_cast<int>(gen() % 2);
    }
    ForestParams p;
    p.n_trees = 3;
    p.bootstrap = false;
    p.seed = trial;
    const auto f = fit_forest(z, y, p);
    std::vector<int> pred(n);
    for (std::size_t i = 0; i < n; ++i) pred[i] = predict_forest(f, z[i]);
    EXPECT_EQ(pred, y) << trial;
  }
}

TEST(Forest, DeterministicAcrossThreadCounts) {
  std::mt19937_64 gen(10);
  Rows z(60, std::vector<double>(6));
  std::vector<int> y(60);
  for (std::size_t i = 0; i < 60; ++i) {
    for (auto& v : z[i]) v = static_cast<double>(gen() % 100);
    y[i] = static_cast<int>(gen() % 2);
  }
  ForestParams p;
  p.n_trees = 25;
  p.threads = 1;
  const auto a = fit_forest(z, y, p);
  p.threads = 4;
  const auto b = fit_forest(z, y, p);
  EXPECT_EQ(a, b);
  p.seed = 4321;
  EXPECT_NE(fit_forest(z, y, p), a);
}

TEST(Forest, RescaledDuplicateColumnLeavesTreesUnchanged) {
  std::mt19937_64 gen(14);
  Rows z(80, std::vector<double>(3));
  std::vector<int> y(80);
  for (std::size_t i = 0; i < 80; ++i) {
    for (auto& v : z[i]) v = static_cast<double>(gen() % 50);
    y[i] = (z[i][0] + z[i][1] > 50) ? 1 : 0;
  }
  Rows zdup = z;
  for (auto& row : zdup) row.push_back(row[1] * 3.0);
  // With every column scored at every node, the copy ties the original on
  // impurity and loses on feature index, so each tree is unchanged.
  ForestParams p;
  p.n_trees = 15;
  p.mtry = 3;
  const auto base = fit_forest(z, y, p);
  p.mtry = 4;
  const auto dup = fit_forest(zdup, y, p);
  EXPECT_EQ(base.trees, dup.trees);
  std::mt19937_64 probe(3);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> row{static_cast<double>(probe() % 60), static_cast<double>(probe() % 60),
                            static_cast<double>(probe() % 60)};
    auto row_dup = row;
    row_dup.push_back(row[1] * 3.0);
    EXPECT_EQ(predict_forest(base, row), predict_forest(dup, row_dup));
  }
}

TEST(Forest, RejectsEmptyData) {
  EXPECT_THROW(fit_forest(Rows{}, std::vector<int>{}), ValidationError);
  EXPECT_THROW(fit_forest(Rows{{}, {}}, std::vector<int>{0, 1}), ValidationError);
}

// ---------------------------------------------------------------- metrics

TEST(BalancedAccuracy, Examples) {
  EXPECT_EQ(balanced_accuracy(std::vector<int>{1, 0, 1, 0}, std::vector<int>{1, 0, 1, 0}), 1.0);
  EXPECT_EQ(balanced_accuracy(std::vector<int>{1, 0, 0, 0}, std::vector<int>{1, 1, 1, 1}), 0.5);
  EXPECT_DOUBLE_EQ(balanced_accuracy(std::vector<int>{1, 1, 1, 0, 0}, std::vector<int>{1, 1, 0, 0, 1}),
                   7.0 / 12.0);
}

TEST(BalancedAccuracy, InvariantUnderRelabeling) {
  std::mt19937_64 gen(6);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 30;
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(gen() % 2);
      p[i] = static_cast<int>(gen() % 2);
    }
    t[0] = 0;
    t[1] = 1;
    std::vector<int> tf(n), pf(n);
    for (std::size_t i = 0; i < n; ++i) {
      tf[i] = 1 - t[i];
      pf[i] = 1 - p[i];
    }
    EXPECT_DOUBLE_EQ(balanced_accuracy(t, p), balanced_accuracy(tf, pf));
  }
}

TEST(BalancedAccuracy, Errors) {
  EXPECT_THROW(balanced_accuracy(std::vector<int>{1, 1}, std::vector<int>{1, 0}), ValidationError);
  EXPECT_THROW(balanced_accuracy(std::vector<int>{1, 0}, std::vector<int>{1}), ValidationError);
}

// ---------------------------------------------------------------- cross-validation

namespace {

std::vector<std::string> groups_of(std::size_t n_groups, std::size_t per_group) {
  std::vector<std::string> g;
  for (std::size_t i = 0; i < n_groups; ++i)
    for (std::size_t j = 0; j < per_group; ++j) g.push_back("TMA_" + std::to_string(i + 1));
  return g;
}

/// Spectra with one informative peak whose height depends on the label.
LabeledDataset peak_dataset(std::size_t n_groups, std::size_t per_group, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::size_t q = 40;
  std::vector<double> mz(q);
  for (std::size_t j = 0; j < q; ++j) mz[j] = 600.0 + j;
  const auto groups = groups_of(n_groups, per_group);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const int y = static_cast<int>(i % 2);
    std::vector<double> f(q);
    for (auto& v : f) v = 0.2 * u(gen);
    f[10] += 5.0;
    f[25] += y ? 4.0 : 0.5;
    rows.push_back(f);
    labels.push_back(y);
  }
  return LabeledDataset(mz, rows, labels, groups);
}

}  // namespace

TEST(Folds, LeaveOneGroupOut) {
  const auto groups = groups_of(8, 3);
  const auto folds = make_folds(groups, CvScheme::LeaveOneGroupOut);
  ASSERT_EQ(folds.size(), 8u);
  for (std::size_t f = 0; f < 8; ++f) {
    EXPECT_EQ(folds[f].test_groups, std::vector<std::string>{"TMA_" + std::to_string(f + 1)});
    EXPECT_EQ(folds[f].test.size(), 3u);
    EXPECT_EQ(folds[f].train.size(), 21u);
  }
}

TEST(Folds, TwoFoldAB) {
  const auto folds = make_folds(groups_of(8, 2), CvScheme::TwoFoldAB);
  ASSERT_EQ(folds.size(), 2u);
  EXPECT_EQ(folds[0].name, "train A");
  EXPECT_EQ(folds[0].test_groups, (std::vector<std::string>{"TMA_5", "TMA_6", "TMA_7", "TMA_8"}));
  EXPECT_EQ(folds[1].name, "train B");
  EXPECT_EQ(folds[1].test_groups, (std::vector<std::string>{"TMA_1", "TMA_2", "TMA_3", "TMA_4"}));
}

TEST(Folds, NaturalGroupOrder) {
  const std::vector<std::string> g{"TMA_10", "TMA_2", "TMA_1", "b", "a", "3"};
  EXPECT_EQ(sorted_groups(g), (std::vector<std::string>{"3", "TMA_1", "TMA_2", "TMA_10", "a", "b"}));
}

TEST(Folds, NeedTwoGroups) {
  EXPECT_THROW(make_folds(groups_of(1, 4), CvScheme::LeaveOneGroupOut), ValidationError);
}

TEST(CvReport, StatisticsUseSampleStd) {
  CVReport r;
  r.folds = {{"a", {}, 0, 0, 0.8, false}, {"b", {}, 0, 0, 1.0, false}, {"c", {}, 0, 0, 0.1, true}};
  summarize(r);
  EXPECT_DOUBLE_EQ(r.mean, 0.9);
  EXPECT_DOUBLE_EQ(r.min, 0.8);
  EXPECT_DOUBLE_EQ(r.max, 1.0);
  EXPECT_DOUBLE_EQ(r.median, 0.9);
  EXPECT_NEAR(r.std, std::sqrt(0.02), 1e-15);
}

TEST(GroupCv, TestRowsNeverInfluenceTraining) {
  auto data = peak_dataset(4, 20, 1);
  auto poisoned = data;
  const auto folds = make_folds(data.groups, CvScheme::LeaveOneGroupOut);
  for (auto r : folds[1].test)
    for (auto& v : poisoned.intensities[r]) v = 1e9;
  ClassifierConfig rf;
  rf.forest.n_trees = 10;
  EXPECT_EQ(train_fold(data, folds[1], rf, 30), train_fold(poisoned, folds[1], rf, 30));
  ClassifierConfig lr;
  lr.kind = ClassifierKind::Logistic;
  EXPECT_EQ(train_fold(data, folds[1], lr, 30), train_fold(poisoned, folds[1], lr, 30));
}

TEST(GroupCv, SkipsSingleClassFolds) {
  auto data = peak_dataset(3, 10, 2);
  for (std::size_t i = 0; i < data.size(); ++i)
    if (data.groups[i] == "TMA_2") data.labels[i] = 1;
  ClassifierConfig rf;
  rf.forest.n_trees = 10;
  const auto report = group_cv(data, CvScheme::LeaveOneGroupOut, rf, 50);
  ASSERT_EQ(report.folds.size(), 3u);
  EXPECT_TRUE(report.folds[1].skipped);
  EXPECT_EQ(report.warnings.size(), 1u);
}

TEST(GroupCv, SeparatesInformativePeak) {
  const auto data = peak_dataset(4, 20, 3);
  for (auto kind : {ClassifierKind::Logistic, ClassifierKind::RandomForest}) {
    ClassifierConfig cfg;
    cfg.kind = kind;
    cfg.forest.n_trees = 30;
    const auto report = group_cv(data, CvScheme::LeaveOneGroupOut, cfg, 100);
    EXPECT_EQ(report.folds.size(), 4u);
    EXPECT_GE(report.mean, 0.95);
  }
}
