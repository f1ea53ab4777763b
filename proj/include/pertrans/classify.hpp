#pragma once

// Binary classifiers on persistence features: unpenalised logistic regression
// fitted by damped Newton, a Breiman random forest with Gini splits, balanced
// accuracy and group-level cross-validation.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "pertrans/core.hpp"
#include "pertrans/features.hpp"
#include "pertrans/parallel.hpp"
#include "pertrans/random.hpp"

namespace pertrans {

using Rows = std::vector<std::vector<double>>;

namespace detail {

inline void check_design(std::span<const std::vector<double>> z, std::span<const int> y) {
  if (z.empty()) throw ValidationError("classifier needs at least one training row");
  if (z.size() != y.size())
    throw ValidationError("dimension mismatch: " + std::to_string(z.size()) + " rows but " +
                          std::to_string(y.size()) + " labels");
  const auto q = z.front().size();
  for (const auto& row : z)
    if (row.size() != q) throw ValidationError("dimension mismatch: ragged feature rows");
  for (int v : y)
    if (v != 0 && v != 1) throw ValidationError("labels must be binary");
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) { return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace detail

// ==========================================================================
// Logistic regression

enum class FitStatus { Converged, Separated, IterationLimit };

inline const char* to_string(FitStatus s) {
  switch (s) {
    case FitStatus::Converged: return "converged";
    case FitStatus::Separated: return "separated";
    case FitStatus::IterationLimit: return "iteration-limit";
  }
  return "?";
}

struct LogisticOptions {
  double gradient_tolerance = 1e-8;
  int max_iterations = 200;
  double threshold = 0.5;
};

struct LogisticModel {
  /// Intercept first, then one coefficient per feature column.
  std::vector<double> beta;
  double threshold = 0.5;
  FitStatus status = FitStatus::Converged;
  int iterations = 0;
  double log_likelihood = 0.0;

  std::size_t width() const noexcept { return beta.empty() ? 0 : beta.size() - 1; }

  double score(std::span<const double> z) const {
    if (z.size() != width())
      throw ValidationError("row length " + std::to_string(z.size()) + " != model width " +
                            std::to_string(width()));
    double eta = beta[0];
    for (std::size_t j = 0; j < z.size(); ++j) eta += beta[j + 1] * z[j];
    return eta;
  }

  friend bool operator==(const LogisticModel&, const LogisticModel&) = default;
};

struct LogisticPrediction {
  double probability = 0.0;
  int label = 0;
};

/// sum_i y_i eta_i - log(1 + exp(eta_i)), eta_i = beta_0 + z_i . beta_1..q
inline double logistic_log_likelihood(std::span<const std::vector<double>> z, std::span<const int> y,
                                      std::span<const double> beta) {
  double ll = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    double eta = beta[0];
    for (std::size_t j = 0; j < z[i].size(); ++j) eta += beta[j + 1] * z[i][j];
    ll += y[i] * eta - detail::softplus(eta);
  }
  return ll;
}

/// Gradient of the log-likelihood: sum_i (y_i - pi_i) (1, z_i).
inline std::vector<double> logistic_gradient(std::span<const std::vector<double>> z,
                                             std::span<const int> y, std::span<const double> beta) {
  std::vector<double> g(beta.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) {
    double eta = beta[0];
    for (std::size_t j = 0; j < z[i].size(); ++j) eta += beta[j + 1] * z[i][j];
    const double r = y[i] - detail::sigmoid(eta);
    g[0] += r;
    for (std::size_t j = 0; j < z[i].size(); ++j) g[j + 1] += r * z[i][j];
  }
  return g;
}

/// Maximum-likelihood fit without penalty.
///
/// Newton steps on the log-likelihood with step halving. The Hessian carries
/// a 1e-12 relative ridge so rank-deficient designs still factorise; the ridge
/// grows only if factorisation fails. Columns that are zero on
/// every training row cannot move the likelihood and keep a zero coefficient.
/// Stops when the gradient's max-norm drops to the tolerance or at the
/// iteration cap. If the final fit classifies every training row with
/// probability above 1 - 1e-6 the data are (quasi-)separated: the MLE does
/// not exist and the status says so.
inline LogisticModel fit_logistic(std::span<const std::vector<double>> z, std::span<const int> y,
                                  const LogisticOptions& opt = {}) {
  detail::check_design(z, y);
  if (!(opt.threshold > 0.0 && opt.threshold < 1.0))
    throw ValidationError("logistic threshold must lie in (0, 1)");
  const std::size_t n = z.size(), q = z.front().size();

  std::vector<std::size_t> active;
  for (std::size_t j = 0; j < q; ++j)
    if (std::any_of(z.begin(), z.end(), [j](const auto& r) { return r[j] != 0.0; }))
      active.push_back(j);
  const auto p = static_cast<Eigen::Index>(active.size() + 1);

  Eigen::MatrixXd x(static_cast<Eigen::Index>(n), p);
  Eigen::VectorXd yy(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    x(ii, 0) = 1.0;
    for (std::size_t a = 0; a < active.size(); ++a)
      x(ii, static_cast<Eigen::Index>(a + 1)) = z[i][active[a]];
    yy(ii) = y[i];
  }

  auto loglik = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd eta = x * b;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < eta.size(); ++i) ll += yy(i) * eta(i) - detail::softplus(eta(i));
    return ll;
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
  double ll = loglik(beta);
  int iter = 0;
  bool converged = false;
  for (; iter < opt.max_iterations; ++iter) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd prob(eta.size()), w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
      prob(i) = detail::sigmoid(eta(i));
      w(i) = prob(i) * (1.0 - prob(i));
    }
    const Eigen::VectorXd grad = x.transpose() * (yy - prob);
    if (grad.lpNorm<Eigen::Infinity>() <= opt.gradient_tolerance) {
      converged = true;
      break;
    }
    const Eigen::MatrixXd hess = x.transpose() * w.asDiagonal() * x;

    Eigen::VectorXd step;
    const double scale = std::max(1.0, hess.diagonal().maxCoeff());
    for (double ridge = 1e-12 * scale; ridge < 1e6 * scale; ridge *= 100) {
      Eigen::MatrixXd h = hess;
      h.diagonal().array() += ridge;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
      if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) continue;
      step = ldlt.solve(grad);
      if (step.allFinite() && step.dot(grad) > 0.0) break;
      step.resize(0);
    }
    if (step.size() == 0) step = grad;  // plain ascent as a last resort

    // Near the optimum the likelihood gain drops below rounding error, so a
    // step is also accepted when it loses no more than that.
    const double slack = 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::fabs(ll));
    double t = 1.0, next_ll = ll;
    Eigen::VectorXd next = beta;
    for (; t > 1e-12; t *= 0.5) {
      next = beta + t * step;
      next_ll = loglik(next);
      if (std::isfinite(next_ll) && next_ll >= ll - slack) break;
    }
    if (!(t > 1e-12) || next == beta) break;  // no further progress possible in floating point
    beta = std::move(next);
    ll = next_ll;
  }

  LogisticModel model;
  model.threshold = opt.threshold;
  model.iterations = iter;
  model.log_likelihood = ll;
  model.beta.assign(q + 1, 0.0);
  model.beta[0] = beta(0);
  for (std::size_t a = 0; a < active.size(); ++a)
    model.beta[active[a] + 1] = beta(static_cast<Eigen::Index>(a + 1));

  const Eigen::VectorXd eta = x * beta;
  bool separated = true;
  for (Eigen::Index i = 0; i < eta.size() && separated; ++i) {
    const double p_true = yy(i) == 1.0 ? detail::sigmoid(eta(i)) : detail::sigmoid(-eta(i));
    separated = p_true > 1.0 - 1e-6;
  }
  model.status = separated ? FitStatus::Separated
                 : converged ? FitStatus::Converged
                             : FitStatus::IterationLimit;
  return model;
}

/// P(Y=1|z) via the logistic response; class 1 iff probability > threshold.
inline LogisticPrediction predict_logistic(const LogisticModel& model, std::span<const double> z) {
  const double prob = detail::sigmoid(model.score(z));
  return {prob, prob > model.threshold ? 1 : 0};
}

// ==========================================================================
// Random forest

/// Defaults follow Breiman's forest: 1000 trees, mtry = ceil(sqrt(q)),
/// one sample per leaf, bootstrap of size n drawn with replacement.
struct ForestParams {
  std::size_t n_trees = 1000;
  std::size_t mtry = 0;  ///< 0 selects ceil(sqrt(q))
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1234;
  bool bootstrap = true;
  std::size_t threads = 1;
};

inline std::size_t default_mtry(std::size_t q) {
  const auto r = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(q))));
  return std::max<std::size_t>(1, std::min(r, q));
}

/// Gini impurity of a node with the given class counts.
inline double gini(std::size_t n0, std::size_t n1) {
  const double n = static_cast<double>(n0 + n1);
  if (n == 0) return 0.0;
  const double p0 = n0 / n, p1 = n1 / n;
  return 1.0 - p0 * p0 - p1 * p1;
}

struct TreeNode {
  /// -1 on leaves.
  std::int32_t feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::array<std::uint32_t, 2> counts{0, 0};

  bool leaf() const noexcept { return feature < 0; }
  friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

/// Binary tree; rows with z[feature] <= threshold go left. Node 0 is the root.
struct DecisionTree {
  std::vector<TreeNode> nodes;

  const TreeNode& leaf_for(std::span<const double> z) const {
    std::size_t at = 0;
    while (!nodes[at].leaf())
      at = static_cast<std::size_t>(z[static_cast<std::size_t>(nodes[at].feature)] <= nodes[at].threshold
                                        ? nodes[at].left
                                        : nodes[at].right);
    return nodes[at];
  }

  /// Leaf majority; ties go to class 0.
  int predict(std::span<const double> z) const {
    const auto& leaf = leaf_for(z);
    return leaf.counts[1] > leaf.counts[0] ? 1 : 0;
  }

  friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct ForestModel {
  std::vector<DecisionTree> trees;
  std::size_t width = 0;
  std::size_t mtry = 0;
  std::size_t min_leaf = 1;
  std::uint64_t seed = 1234;

  friend bool operator==(const ForestModel&, const ForestModel&) = default;
};

namespace detail {

struct SplitChoice {
  double impurity = 0.0;  // n * weighted child Gini
  std::size_t feature = 0;
  double threshold = 0.0;
  bool found = false;

  bool better_than(const SplitChoice& o) const {
    if (!o.found) return true;
    if (impurity != o.impurity) return impurity < o.impurity;
    if (feature != o.feature) return feature < o.feature;
    return threshold < o.threshold;
  }
};

/// Grows one CART tree on `sample` (row indices, repeats allowed).
///
/// At every node, features are visited in a random order until `mtry`
/// features that vary within the node have been scored (or none remain),
/// so sparse columns do not stop growth early. Among scored splits the lowest
/// weighted Gini wins; ties prefer the smaller feature index, then the
/// smaller threshold. Nodes stop at purity or when no split leaves
/// `min_leaf` rows on both sides.
inline DecisionTree grow_tree(std::span<const std::vector<double>> z, std::span<const int> y,
                              std::vector<std::size_t> sample, std::size_t mtry, std::size_t min_leaf,
                              Rng& rng) {
  const std::size_t q = z.front().size();
  DecisionTree tree;
  struct Pending {
    std::size_t node, begin, end;
  };
  tree.nodes.emplace_back();
  std::vector<Pending> stack{{0, 0, sample.size()}};
  std::vector<std::size_t> order(q);
  std::vector<std::pair<double, int>> column;

  while (!stack.empty()) {
    const auto [node, begin, end] = stack.back();
    stack.pop_back();
    std::array<std::uint32_t, 2> counts{0, 0};
    for (auto i = begin; i < end; ++i) ++counts[static_cast<std::size_t>(y[sample[i]])];
    tree.nodes[node].counts = counts;
    const std::size_t n = end - begin;
    if (counts[0] == 0 || counts[1] == 0 || n < 2 * min_leaf) continue;

    std::iota(order.begin(), order.end(), std::size_t{0});
    SplitChoice best;
    std::size_t scored = 0;
    for (std::size_t drawn = 0; drawn < q && scored < mtry; ++drawn) {
      const auto pick = drawn + static_cast<std::size_t>(rng.below(q - drawn));
      std::swap(order[drawn], order[pick]);
      const std::size_t f = order[drawn];

      column.clear();
      for (auto i = begin; i < end; ++i) column.emplace_back(z[sample[i]][f], y[sample[i]]);
      std::sort(column.begin(), column.end());
      if (column.front().first == column.back().first) continue;
      ++scored;

      std::array<double, 2> left{0, 0};
      const std::array<double, 2> total{static_cast<double>(counts[0]), static_cast<double>(counts[1])};
      for (std::size_t s = 0; s + 1 < n; ++s) {
        left[static_cast<std::size_t>(column[s].second)] += 1;
        if (column[s].first == column[s + 1].first) continue;
        const std::size_t nl = s + 1, nr = n - nl;
        if (nl < min_leaf || nr < min_leaf) continue;
        const double r0 = total[0] - left[0], r1 = total[1] - left[1];
        const double imp = (nl - (left[0] * left[0] + left[1] * left[1]) / nl) +
                           (nr - (r0 * r0 + r1 * r1) / nr);
        double thr = column[s].first + (column[s + 1].first - column[s].first) / 2.0;
        if (!(thr < column[s + 1].first)) thr = column[s].first;
        SplitChoice cand{imp, f, thr, true};
        if (cand.better_than(best)) best = cand;
      }
    }
    if (!best.found) continue;

    auto mid = std::partition(sample.begin() + static_cast<std::ptrdiff_t>(begin),
                              sample.begin() + static_cast<std::ptrdiff_t>(end),
                              [&](std::size_t r) { return z[r][best.feature] <= best.threshold; });
    const auto split = static_cast<std::size_t>(mid - sample.begin());
    const auto left_id = static_cast<std::int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes.emplace_back();
    auto& parent = tree.nodes[node];
    parent.feature = static_cast<std::int32_t>(best.feature);
    parent.threshold = best.threshold;
    parent.left = left_id;
    parent.right = left_id + 1;
    stack.push_back({static_cast<std::size_t>(left_id + 1), split, end});
    stack.push_back({static_cast<std::size_t>(left_id), begin, split});
  }
  return tree;
}

}  // namespace detail

/// Tree t draws from its own stream seeded by child_seed(seed, t), so the
/// forest is identical for any thread count.
inline ForestModel fit_forest(std::span<const std::vector<double>> z, std::span<const int> y,
                              const ForestParams& params = {}) {
  detail::check_design(z, y);
  const std::size_t n = z.size(), q = z.front().size();
  if (q == 0) throw ValidationError("random forest needs at least one feature column");
  if (params.n_trees == 0) throw ValidationError("random forest needs at least one tree");
  if (params.min_leaf == 0) throw ValidationError("min_leaf must be positive");

  ForestModel model;
  model.width = q;
  model.mtry = params.mtry == 0 ? default_mtry(q) : std::min(params.mtry, q);
  model.min_leaf = params.min_leaf;
  model.seed = params.seed;
  model.trees.resize(params.n_trees);
  parallel_for(params.n_trees, params.threads, [&](std::size_t t) {
    Rng rng(child_seed(params.seed, t));
    std::vector<std::size_t> sample(n);
    if (params.bootstrap)
      for (auto& s : sample) s = static_cast<std::size_t>(rng.below(n));
    else
      std::iota(sample.begin(), sample.end(), std::size_t{0});
    model.trees[t] = detail::grow_tree(z, y, std::move(sample), model.mtry, model.min_leaf, rng);
  });
  return model;
}

/// Majority vote over trees; a tied vote goes to class 0.
inline int predict_forest(const ForestModel& model, std::span<const double> z) {
  if (z.size() != model.width)
    throw ValidationError("row length " + std::to_string(z.size()) + " != forest width " +
                          std::to_string(model.width));
  std::size_t ones = 0;
  for (const auto& tree : model.trees) ones += static_cast<std::size_t>(tree.predict(z));
  return 2 * ones > model.trees.size() ? 1 : 0;
}

// ==========================================================================
// Evaluation

/// Mean of the per-class recalls.
inline double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  if (y_true.size() != y_pred.size())
    throw ValidationError("balanced_accuracy: length mismatch");
  std::array<std::size_t, 2> total{0, 0}, hit{0, 0};
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if ((y_true[i] != 0 && y_true[i] != 1) || (y_pred[i] != 0 && y_pred[i] != 1))
      throw ValidationError("balanced_accuracy: labels must be binary");
    const auto c = static_cast<std::size_t>(y_true[i]);
    ++total[c];
    if (y_pred[i] == y_true[i]) ++hit[c];
  }
  if (total[0] == 0 || total[1] == 0)
    throw ValidationError("balanced_accuracy: y_true must contain both classes");
  return (static_cast<double>(hit[1]) / total[1] + static_cast<double>(hit[0]) / total[0]) / 2.0;
}

enum class ClassifierKind { Logistic, RandomForest };

struct ClassifierConfig {
  ClassifierKind kind = ClassifierKind::RandomForest;
  LogisticOptions logistic{};
  ForestParams forest{};
};

using TrainedClassifier = std::variant<LogisticModel, ForestModel>;

inline TrainedClassifier train_classifier(std::span<const std::vector<double>> z, std::span<const int> y,
                                          const ClassifierConfig& config) {
  if (config.kind == ClassifierKind::Logistic) return fit_logistic(z, y, config.logistic);
  return fit_forest(z, y, config.forest);
}

inline int predict(const TrainedClassifier& model, std::span<const double> z) {
  if (const auto* lr = std::get_if<LogisticModel>(&model)) return predict_logistic(*lr, z).label;
  return predict_forest(std::get<ForestModel>(model), z);
}

enum class CvScheme { LeaveOneGroupOut, TwoFoldAB };

struct CvFold {
  std::string name;
  std::vector<std::string> test_groups;
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

struct FoldResult {
  std::string name;
  std::vector<std::string> test_groups;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double balanced_accuracy = 0.0;
  bool skipped = false;
};

struct CVReport {
  std::vector<FoldResult> folds;
  double mean = 0.0, min = 0.0, max = 0.0, median = 0.0, std = 0.0;
  std::vector<std::string> warnings;
};

namespace detail {

/// Natural order: digit runs compare by numeric value, so "TMA_2" < "TMA_10".
inline bool group_less(const std::string& a, const std::string& b) {
  auto digit = [](char c) { return c >= '0' && c <= '9'; };
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (digit(a[i]) && digit(b[j])) {
      std::size_t ie = i, je = j;
      while (ie < a.size() && digit(a[ie])) ++ie;
      while (je < b.size() && digit(b[je])) ++je;
      std::size_t is = i, js = j;
      while (is + 1 < ie && a[is] == '0') ++is;
      while (js + 1 < je && b[js] == '0') ++js;
      if (ie - is != je - js) return ie - is < je - js;
      const int c = a.compare(is, ie - is, b, js, je - js);
      if (c != 0) return c < 0;
      i = ie;
      j = je;
    } else {
      if (a[i] != b[j]) return a[i] < b[j];
      ++i;
      ++j;
    }
  }
  if (a.size() - i != b.size() - j) return a.size() - i < b.size() - j;
  return a < b;
}

}  // namespace detail

/// Distinct group identifiers in natural order.
inline std::vector<std::string> sorted_groups(std::span<const std::string> groups) {
  std::vector<std::string> out(groups.begin(), groups.end());
  std::sort(out.begin(), out.end(), detail::group_less);
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Leave-one-group-out: one fold per group. Two-fold A/B: A is the first
/// ceil(G/2) groups in natural order, B the rest; fold "train A" tests on B
/// and fold "train B" tests on A.
inline std::vector<CvFold> make_folds(std::span<const std::string> groups, CvScheme scheme) {
  const auto ids = sorted_groups(groups);
  if (ids.size() < 2)
    throw ValidationError("group cross-validation needs at least 2 groups, found " +
                          std::to_string(ids.size()));
  std::vector<std::vector<std::string>> test_sets;
  std::vector<std::string> names;
  if (scheme == CvScheme::LeaveOneGroupOut) {
    for (const auto& g : ids) {
      test_sets.push_back({g});
      names.push_back("test " + g);
    }
  } else {
    const std::size_t half = (ids.size() + 1) / 2;
    std::vector<std::string> a(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(half));
    std::vector<std::string> b(ids.begin() + static_cast<std::ptrdiff_t>(half), ids.end());
    test_sets = {b, a};
    names = {"train A", "train B"};
  }
  std::vector<CvFold> folds;
  for (std::size_t f = 0; f < test_sets.size(); ++f) {
    CvFold fold{names[f], test_sets[f], {}, {}};
    for (std::size_t i = 0; i < groups.size(); ++i) {
      const bool in_test =
          std::find(fold.test_groups.begin(), fold.test_groups.end(), groups[i]) != fold.test_groups.end();
      (in_test ? fold.test : fold.train).push_back(i);
    }
    folds.push_back(std::move(fold));
  }
  return folds;
}

/// Fits the classifier on the fold's training spectra only.
inline TrainedClassifier train_fold(const LabeledDataset& data, const CvFold& fold,
                                    const ClassifierConfig& config, double k_percent,
                                    std::size_t threads = 1) {
  const auto train = data.subset(fold.train);
  const auto z = build_matrix(train, k_percent, threads);
  return train_classifier(z.rows, train.labels, config);
}

inline void summarize(CVReport& report) {
  std::vector<double> acc;
  for (const auto& f : report.folds)
    if (!f.skipped) acc.push_back(f.balanced_accuracy);
  if (acc.empty()) throw ValidationError("no cross-validation fold could be evaluated");
  const double n = static_cast<double>(acc.size());
  report.mean = std::accumulate(acc.begin(), acc.end(), 0.0) / n;
  auto [lo, hi] = std::minmax_element(acc.begin(), acc.end());
  report.min = *lo;
  report.max = *hi;
  std::sort(acc.begin(), acc.end());
  const std::size_t mid = acc.size() / 2;
  report.median = acc.size() % 2 ? acc[mid] : (acc[mid - 1] + acc[mid]) / 2.0;
  double ss = 0.0;
  for (double a : acc) ss += (a - report.mean) * (a - report.mean);
  report.std = acc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
}

/// Group-level cross-validation. Each fold computes persistence features for
/// its training and test spectra separately, fits on the training groups and
/// scores balanced accuracy on the held-out group(s). Folds whose test set
/// lacks a class are skipped with a warning.
inline CVReport group_cv(const LabeledDataset& data, CvScheme scheme, const ClassifierConfig& config,
                         double k_percent, std::size_t threads = 1) {
  data.validate();
  top_k_count(0, k_percent);
  CVReport report;
  for (const auto& fold : make_folds(data.groups, scheme)) {
    FoldResult result{fold.name, fold.test_groups, fold.train.size(), fold.test.size(), 0.0, false};
    const auto test = data.subset(fold.test);
    const bool has0 = std::count(test.labels.begin(), test.labels.end(), 0) > 0;
    const bool has1 = std::count(test.labels.begin(), test.labels.end(), 1) > 0;
    if (!has0 || !has1 || fold.train.empty()) {
      result.skipped = true;
      report.warnings.push_back("fold '" + fold.name + "' skipped: " +
                                (fold.train.empty() ? std::string("empty training set")
                                                    : std::string("test set lacks a class")));
      report.folds.push_back(std::move(result));
      continue;
    }
    auto cfg = config;
    cfg.forest.threads = threads;
    const auto model = train_fold(data, fold, cfg, k_percent, threads);
    const auto zt = build_matrix(test, k_percent, threads);
    std::vector<int> pred(zt.size());
    for (std::size_t i = 0; i < zt.size(); ++i) pred[i] = predict(model, zt.rows[i]);
    result.balanced_accuracy = balanced_accuracy(test.labels, pred);
    report.folds.push_back(std::move(result));
  }
  summarize(report);
  return report;
}

}  // namespace pertrans
