#include "quesim/secondary.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "quesim/errors.hpp"

namespace quesim {

namespace {

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int label_of(const FeatureRow& r) {
  if (!r.label) throw DataError("secondary: unlabeled row id=" + std::to_string(r.id));
  return *r.label;
}

double gini(std::size_t pos, std::size_t n) {
  if (n == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(n);
  return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct SplitChoice {
  bool found = false;
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;
};

}  // namespace

double DecisionTree::predict(const std::vector<double>& x) const {
  std::size_t i = 0;
  for (;;) {
    const TreeNode& n = nodes[i];
    if (n.feature < 0) return n.positive_fraction;
    i = static_cast<std::size_t>(
        x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
  }
}

namespace {

class TreeBuilder {
 public:
  TreeBuilder(const std::vector<FeatureRow>& rows, std::size_t max_depth,
              std::size_t features_per_split, Rng& rng)
      : rows_(rows), max_depth_(max_depth),
        features_per_split_(std::min(features_per_split, kFeatureCount)),
        rng_(rng) {
    for (const auto& r : rows_) features_.push_back(r.as_vector());
  }

  DecisionTree build(std::vector<std::size_t> idx) {
    DecisionTree tree;
    tree.max_depth = max_depth_;
    tree_ = &tree;
    grow(std::move(idx), 0);
    return tree;
  }

 private:
  std::int32_t grow(std::vector<std::size_t> idx, std::size_t depth) {
    const std::size_t n = idx.size();
    std::size_t pos = 0;
    for (std::size_t i : idx) pos += static_cast<std::size_t>(label_of(rows_[i]));

    const auto leaf = [&]() {
      TreeNode node;
      node.positive_fraction = n ? static_cast<double>(pos) / n : 0.0;
      node.samples = n;
      tree_->nodes.push_back(node);
      return static_cast<std::int32_t>(tree_->nodes.size() - 1);
    };

    if (depth >= max_depth_ || n < 2 || pos == 0 || pos == n) return leaf();

    const SplitChoice split = best_split(idx);
    if (!split.found) return leaf();

    std::vector<std::size_t> left_idx, right_idx;
    for (std::size_t i : idx) {
      if (features_[i][static_cast<std::size_t>(split.feature)] <= split.threshold)
        left_idx.push_back(i);
      else
        right_idx.push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    TreeNode node;
    node.feature = split.feature;
    node.threshold = split.threshold;
    node.samples = n;
    const auto self = static_cast<std::int32_t>(tree_->nodes.size());
    tree_->nodes.push_back(node);
    tree_->nodes[static_cast<std::size_t>(self)].left = grow(std::move(left_idx), depth + 1);
    tree_->nodes[static_cast<std::size_t>(self)].right = grow(std::move(right_idx), depth + 1);
    return self;
  }

  SplitChoice best_split(const std::vector<std::size_t>& idx) {
    // random feature subset, evaluated in ascending index order so that
    // equal-impurity ties resolve deterministically
    std::array<std::size_t, kFeatureCount> feats = {0, 1, 2, 3};
    for (std::size_t i = 0; i < features_per_split_; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng_.below(kFeatureCount - i));
      std::swap(feats[i], feats[j]);
    }
    std::sort(feats.begin(), feats.begin() + static_cast<long>(features_per_split_));

    SplitChoice best;
    std::vector<std::pair<double, int>> vals;  // (value, label)
    for (std::size_t fi = 0; fi < features_per_split_; ++fi) {
      const std::size_t f = feats[fi];
      vals.clear();
      for (std::size_t i : idx)
        vals.emplace_back(features_[i][f], label_of(rows_[i]));
      std::sort(vals.begin(), vals.end());

      const std::size_t n = vals.size();
      std::size_t total_pos = 0;
      for (const auto& [v, y] : vals) total_pos += static_cast<std::size_t>(y);

      std::size_t left_pos = 0;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        left_pos += static_cast<std::size_t>(vals[i].second);
        if (vals[i].first == vals[i + 1].first) continue;
        const std::size_t nl = i + 1, nr = n - nl;
        const double impurity =
            (static_cast<double>(nl) * gini(left_pos, nl) +
             static_cast<double>(nr) * gini(total_pos - left_pos, nr)) /
            static_cast<double>(n);
        if (!best.found || impurity < best.impurity) {
          best.found = true;
          best.feature = static_cast<int>(f);
          best.threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
          best.impurity = impurity;
        }
      }
    }
    return best;
  }

  const std::vector<FeatureRow>& rows_;
  std::vector<std::vector<double>> features_;
  std::size_t max_depth_;
  std::size_t features_per_split_;
  Rng& rng_;
  DecisionTree* tree_ = nullptr;
};

}  // namespace

DecisionTree fit_tree(const std::vector<FeatureRow>& rows, std::size_t max_depth,
                      std::size_t features_per_split, Rng& rng) {
  if (rows.empty()) throw DataError("fit_tree: empty row set");
  std::vector<std::size_t> idx(rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  TreeBuilder builder(rows, max_depth, features_per_split, rng);
  return builder.build(std::move(idx));
}

RandomForest rf_fit(const std::vector<FeatureRow>& rows, const ForestOptions& opt) {
  if (rows.empty()) throw DataError("rf_fit: empty row set");
  if (opt.n_trees == 0) throw ConfigError("rf_fit: n_trees must be >= 1");
  RandomForest forest;
  forest.n_trees = opt.n_trees;
  forest.features_per_split = opt.features_per_split;
  forest.max_depth = opt.max_depth;
  forest.seed = opt.seed;
  for (std::size_t t = 0; t < opt.n_trees; ++t) {
    // each tree owns an independent stream so trees could be fit in parallel
    Rng rng(splitmix64_once(opt.seed, t));
    std::vector<FeatureRow> sample;
    if (opt.bootstrap) {
      sample.reserve(rows.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
        sample.push_back(rows[static_cast<std::size_t>(rng.below(rows.size()))]);
    } else {
      sample = rows;
    }
    forest.trees.push_back(
        fit_tree(sample, opt.max_depth, opt.features_per_split, rng));
  }
  return forest;
}

double rf_predict(const RandomForest& forest, const FeatureRow& row) {
  const auto x = row.as_vector();
  double sum = 0.0;
  for (const auto& tree : forest.trees) sum += tree.predict(x);
  return sum / static_cast<double>(forest.trees.size());
}

namespace {

double stump_value(const Stump& s, const std::vector<double>& x) {
  return x[static_cast<std::size_t>(s.feature)] <= s.threshold ? s.left_vote
                                                               : s.right_vote;
}

// Minimizes weighted error over feature, midpoint threshold and polarity.
Stump fit_stump(const std::vector<std::vector<double>>& xs,
                const std::vector<int>& ys, const std::vector<double>& w,
                double& best_err) {
  Stump best;
  best_err = 2.0;
  const std::size_t n = xs.size();
  std::vector<std::pair<double, std::size_t>> order(n);
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < n; ++i) order[i] = {xs[i][f], i};
    std::sort(order.begin(), order.end());

    // err(threshold, left=-1) = sum of w where (x<=thr, y=+1) or (x>thr, y=-1)
    double err_left_neg = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      if (ys[i] < 0) err_left_neg += w[i];

    for (std::size_t i = 0; i + 1 < n; ++i) {
      const auto [v, row] = order[i];
      err_left_neg += ys[row] > 0 ? w[row] : -w[row];
      if (v == order[i + 1].first) continue;
      const double thr = v + 0.5 * (order[i + 1].first - v);
      for (int pol = 0; pol < 2; ++pol) {
        const double err = pol == 0 ? err_left_neg : 1.0 - err_left_neg;
        if (err < best_err - 1e-15) {
          best_err = err;
          best.feature = static_cast<int>(f);
          best.threshold = thr;
          best.left_vote = pol == 0 ? -1.0 : 1.0;
          best.right_vote = pol == 0 ? 1.0 : -1.0;
        }
      }
    }
  }
  return best;
}

}  // namespace

AdaBoostModel ada_fit(const std::vector<FeatureRow>& rows, std::size_t n_rounds) {
  if (rows.empty()) throw DataError("ada_fit: empty row set");
  const std::size_t n = rows.size();
  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (const auto& r : rows) {
    xs.push_back(r.as_vector());
    ys.push_back(label_of(r) == 1 ? 1 : -1);
  }
  const bool has_pos = std::count(ys.begin(), ys.end(), 1) > 0;
  const bool has_neg = std::count(ys.begin(), ys.end(), -1) > 0;
  if (!has_pos || !has_neg)
    throw DataError("ada_fit: need both classes in the training rows");

  std::vector<double> w(n, 1.0 / static_cast<double>(n));
  AdaBoostModel model;
  for (std::size_t round = 0; round < n_rounds; ++round) {
    double err = 0.0;
    const Stump stump = fit_stump(xs, ys, w, err);
    if (err >= 0.5) break;  // no better than chance; stop without adding
    const double eps = std::clamp(err, 1e-12, 1.0 - 1e-12);
    const double alpha = 0.5 * std::log((1.0 - eps) / eps);
    model.stumps.push_back(stump);
    model.alphas.push_back(alpha);
    if (err <= 1e-12) break;  // perfect stump

    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      w[i] *= std::exp(-alpha * ys[i] * stump_value(stump, xs[i]));
      z += w[i];
    }
    for (double& wi : w) wi /= z;
  }
  return model;
}

double ada_predict(const AdaBoostModel& model, const FeatureRow& row) {
  const auto x = row.as_vector();
  double f = 0.0;
  for (std::size_t i = 0; i < model.stumps.size(); ++i)
    f += model.alphas[i] * stump_value(model.stumps[i], x);
  return sigmoid(2.0 * f);
}

namespace {

std::array<double, kFeatureCount> standardized(const SvmModel& m,
                                               const FeatureRow& row) {
  const auto x = row.as_vector();
  std::array<double, kFeatureCount> out{};
  for (std::size_t f = 0; f < kFeatureCount; ++f)
    out[f] = (x[f] - m.mean[f]) / m.stddev[f];
  return out;
}

// Logistic fit of sigma(a * margin + b) to binary labels, Newton's method.
void platt_calibrate(const std::vector<double>& margins,
                     const std::vector<int>& labels, double& a, double& b) {
  a = 1.0;
  b = 0.0;
  const std::size_t n = margins.size();
  for (int iter = 0; iter < 200; ++iter) {
    double g0 = 0.0, g1 = 0.0, h00 = 0.0, h01 = 0.0, h11 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double p = sigmoid(a * margins[i] + b);
      const double d = p - labels[i];
      const double s = p * (1.0 - p);
      g0 += d * margins[i];
      g1 += d;
      h00 += s * margins[i] * margins[i];
      h01 += s * margins[i];
      h11 += s;
    }
    h00 += 1e-12;
    h11 += 1e-12;
    const double det = h00 * h11 - h01 * h01;
    if (std::abs(det) < 1e-300) break;
    const double da = (h11 * g0 - h01 * g1) / det;
    const double db = (h00 * g1 - h01 * g0) / det;
    a -= da;
    b -= db;
    if (std::abs(da) < 1e-8 && std::abs(db) < 1e-8) break;
  }
}

}  // namespace

SvmModel svm_fit(const std::vector<FeatureRow>& rows, const SvmOptions& opt) {
  if (rows.empty()) throw DataError("svm_fit: empty row set");
  if (opt.lambda <= 0.0) throw ConfigError("svm_fit: lambda must be > 0");
  const std::size_t n = rows.size();

  SvmModel model;
  for (std::size_t f = 0; f < kFeatureCount; ++f) {
    double mean = 0.0;
    for (const auto& r : rows) mean += r.as_vector()[f];
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (const auto& r : rows) {
      const double d = r.as_vector()[f] - mean;
      var += d * d;
    }
    var /= static_cast<double>(n);
    model.mean[f] = mean;
    model.stddev[f] = var > 0.0 ? std::sqrt(var) : 1.0;
  }

  // 20% of the rows are held out for Platt calibration
  Rng rng(splitmix64_once(opt.seed, 0x51a7));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t i = n; i > 1; --i)
    std::swap(idx[i - 1], idx[rng.below(i)]);
  const std::size_t cal_n = std::max<std::size_t>(1, n / 5);
  std::vector<std::size_t> cal(idx.begin(), idx.begin() + static_cast<long>(cal_n));
  std::vector<std::size_t> tr(idx.begin() + static_cast<long>(cal_n), idx.end());
  if (tr.empty()) tr = cal;

  std::vector<std::array<double, kFeatureCount>> xs(n);
  std::vector<int> ys(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs[i] = standardized(model, rows[i]);
    ys[i] = label_of(rows[i]) == 1 ? 1 : -1;
  }
  {
    int pos = 0, neg = 0;
    for (std::size_t i : tr) (ys[i] > 0 ? pos : neg)++;
    if (pos == 0 || neg == 0)
      throw DataError("svm_fit: need both classes in the training rows");
  }

  // Pegasos: step 1/(lambda * t) with projection onto the 1/sqrt(lambda)
  // ball. The bias rides along as a regularized constant feature; Platt
  // calibration re-fits the decision threshold afterwards anyway.
  std::size_t t = 0;
  for (std::size_t epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = tr.size(); i > 1; --i)
      std::swap(tr[i - 1], tr[rng.below(i)]);
    for (std::size_t i : tr) {
      ++t;
      const double eta = 1.0 / (opt.lambda * static_cast<double>(t));
      double margin = model.b;
      for (std::size_t f = 0; f < kFeatureCount; ++f)
        margin += model.w[f] * xs[i][f];
      const double decay = 1.0 - eta * opt.lambda;
      for (double& wf : model.w) wf *= decay;
      model.b *= decay;
      if (ys[i] * margin < 1.0) {
        for (std::size_t f = 0; f < kFeatureCount; ++f)
          model.w[f] += eta * ys[i] * xs[i][f];
        model.b += eta * ys[i];
      }
      double sq = model.b * model.b;
      for (double wf : model.w) sq += wf * wf;
      const double limit = 1.0 / std::sqrt(opt.lambda);
      if (sq > limit * limit) {
        const double scale = limit / std::sqrt(sq);
        for (double& wf : model.w) wf *= scale;
        model.b *= scale;
      }
    }
  }

  std::vector<double> margins;
  std::vector<int> labels01;
  int cal_pos = 0, cal_neg = 0;
  for (std::size_t i : cal) {
    double m = model.b;
    for (std::size_t f = 0; f < kFeatureCount; ++f) m += model.w[f] * xs[i][f];
    margins.push_back(m);
    labels01.push_back(ys[i] > 0 ? 1 : 0);
    (ys[i] > 0 ? cal_pos : cal_neg)++;
  }
  if (cal_pos == 0 || cal_neg == 0) {
    std::fprintf(stderr,
                 "svm_fit: calibration split is single-class, "
                 "falling back to identity calibration (a=1, b=0)\n");
    model.platt_a = 1.0;
    model.platt_b = 0.0;
  } else {
    platt_calibrate(margins, labels01, model.platt_a, model.platt_b);
  }
  return model;
}

double svm_margin(const SvmModel& model, const FeatureRow& row) {
  const auto x = standardized(model, row);
  double m = model.b;
  for (std::size_t f = 0; f < kFeatureCount; ++f) m += model.w[f] * x[f];
  return m;
}

double svm_predict(const SvmModel& model, const FeatureRow& row) {
  return sigmoid(model.platt_a * svm_margin(model, row) + model.platt_b);
}

double log_loss(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size())
    throw DataError("log_loss: probs/labels length mismatch");
  if (probs.empty()) throw DataError("log_loss: empty input");
  double total = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const double p = std::clamp(probs[i], 1e-15, 1.0 - 1e-15);
    total += labels[i] ? -std::log(p) : -std::log(1.0 - p);
  }
  return total / static_cast<double>(probs.size());
}

double accuracy(const std::vector<double>& probs, const std::vector<int>& labels) {
  if (probs.size() != labels.size())
    throw DataError("accuracy: probs/labels length mismatch");
  if (probs.empty()) throw DataError("accuracy: empty input");
  std::size_t correct = 0;
  for (std::size_t i = 0; i < probs.size(); ++i)
    if ((probs[i] >= 0.5 ? 1 : 0) == labels[i]) ++correct;
  return static_cast<double>(correct) / static_cast<double>(probs.size());
}

}  // namespace quesim
