#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "quesim/features.hpp"
#include "quesim/rng.hpp"

namespace quesim {

// Binary CART over FeatureRows. Nodes are stored in one array; feature < 0
// marks a leaf.
struct TreeNode {
  int feature = -1;          // split feature index, -1 for leaves
  double threshold = 0.0;    // go left when x[feature] <= threshold
  std::int32_t left = -1;
  std::int32_t right = -1;
  double positive_fraction = 0.0;  // leaf payload
  std::size_t samples = 0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  std::size_t max_depth = 0;

  double predict(const std::vector<double>& x) const;
};

struct RandomForest {
  std::vector<DecisionTree> trees;
  std::size_t n_trees = 0;
  std::size_t features_per_split = 2;
  std::size_t max_depth = 8;
  std::uint64_t seed = 0;
};

struct Stump {
  int feature = 0;
  double threshold = 0.0;
  double left_vote = -1.0;   // vote in {-1, +1} when x[feature] <= threshold
  double right_vote = 1.0;
};

struct AdaBoostModel {
  std::vector<Stump> stumps;
  std::vector<double> alphas;
};

struct SvmModel {
  std::array<double, kFeatureCount> w{};
  double b = 0.0;
  double platt_a = 1.0;
  double platt_b = 0.0;
  // z-score standardization fitted on the training set
  std::array<double, kFeatureCount> mean{};
  std::array<double, kFeatureCount> stddev{};
};

/// Greedy CART on Gini impurity. At each node a random subset of
/// `features_per_split` features is considered; thresholds are midpoints
/// between consecutive distinct sorted values. Ties break toward the lowest
/// feature index, then the lowest threshold.
DecisionTree fit_tree(const std::vector<FeatureRow>& rows, std::size_t max_depth,
                      std::size_t features_per_split, Rng& rng);

struct ForestOptions {
  std::size_t n_trees = 100;
  std::size_t max_depth = 8;
  std::size_t features_per_split = 2;
  std::uint64_t seed = 0;
  bool bootstrap = true;  // per-tree resample of the same size
};

RandomForest rf_fit(const std::vector<FeatureRow>& rows, const ForestOptions& opt);
double rf_predict(const RandomForest& forest, const FeatureRow& row);

/// Discrete AdaBoost with decision stumps; probability = sigmoid(2 F(x)).
AdaBoostModel ada_fit(const std::vector<FeatureRow>& rows, std::size_t n_rounds);
double ada_predict(const AdaBoostModel& model, const FeatureRow& row);

struct SvmOptions {
  double lambda = 1e-4;
  std::size_t epochs = 20;
  std::uint64_t seed = 0;
};

/// Pegasos-style primal hinge-loss SGD on z-scored features, followed by
/// Platt calibration on a held-out 20% split (Newton iterations, tol 1e-8).
SvmModel svm_fit(const std::vector<FeatureRow>& rows, const SvmOptions& opt);
double svm_margin(const SvmModel& model, const FeatureRow& row);
double svm_predict(const SvmModel& model, const FeatureRow& row);

/// Mean binary cross entropy with probabilities clipped to
/// [1e-15, 1 - 1e-15].
double log_loss(const std::vector<double>& probs, const std::vector<int>& labels);

/// Fraction of rows whose thresholded probability (at 0.5) matches the label.
double accuracy(const std::vector<double>& probs, const std::vector<int>& labels);

}  // namespace quesim
