#include "shapley_sets/boosting.hpp"

#include <algorithm>
#include <numeric>

#include "shapley_sets/error.hpp"

namespace shapsets {

double RegressionTree::predict(std::span<const double> x) const {
  int at = 0;
  while (nodes[static_cast<std::size_t>(at)].feature >= 0) {
    const Node& node = nodes[static_cast<std::size_t>(at)];
    at = x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left : node.right;
  }
  return nodes[static_cast<std::size_t>(at)].value;
}

BoostedTreesModel::BoostedTreesModel(std::size_t dimension, double base, double learning_rate,
                                     std::vector<RegressionTree> trees)
    : PredictiveModel(dimension), base_(base), learning_rate_(learning_rate), trees_(std::move(trees)) {
  for (const RegressionTree& tree : trees_) {
    if (tree.nodes.empty()) throw InvalidDataError("boosted model contains an empty tree");
    for (const auto& node : tree.nodes) {
      if (node.feature >= static_cast<int>(dimension)) {
        throw InvalidDataError("tree splits on a feature outside the model dimension");
      }
      if (node.feature >= 0 &&
          (node.left <= 0 || node.right <= 0 || node.left >= static_cast<int>(tree.nodes.size()) ||
           node.right >= static_cast<int>(tree.nodes.size()))) {
        throw InvalidDataError("tree node has an invalid child index");
      }
    }
  }
}

double BoostedTreesModel::predict(std::span<const double> x) const {
  double sum = 0.0;
  for (const RegressionTree& tree : trees_) sum += tree.predict(x);
  return base_ + learning_rate_ * sum;
}

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const Matrix& samples, const std::vector<std::vector<std::size_t>>& order, int depth)
      : samples_(samples), order_(order), depth_(depth), node_of_(static_cast<std::size_t>(samples.rows())) {}

  RegressionTree build(const std::vector<double>& residual) {
    residual_ = &residual;
    tree_ = RegressionTree{};
    std::fill(node_of_.begin(), node_of_.end(), 0);
    tree_.nodes.emplace_back();
    grow(0, 0);
    return tree_;
  }

 private:
  void grow(int node, int level) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < node_of_.size(); ++i) {
      if (node_of_[i] == node) {
        sum += (*residual_)[i];
        ++count;
      }
    }
    tree_.nodes[static_cast<std::size_t>(node)].value = count ? sum / static_cast<double>(count) : 0.0;
    if (level >= depth_ || count < 2) return;

    const Split split = best_split(node, sum, count);
    if (split.feature < 0) return;
    const int left = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    tree_.nodes.emplace_back();
    auto& parent = tree_.nodes[static_cast<std::size_t>(node)];
    parent.feature = split.feature;
    parent.threshold = split.threshold;
    parent.left = left;
    parent.right = left + 1;
    for (std::size_t i = 0; i < node_of_.size(); ++i) {
      if (node_of_[i] != node) continue;
      const double v = samples_(static_cast<Eigen::Index>(i), split.feature);
      node_of_[i] = v <= split.threshold ? left : left + 1;
    }
    grow(left, level + 1);
    grow(left + 1, level + 1);
  }

  Split best_split(int node, double total, std::size_t count) const {
    Split best;
    const double parent_score = total * total / static_cast<double>(count);
    const double min_gain = 1e-12 * std::max(1.0, std::abs(parent_score));
    for (std::size_t j = 0; j < order_.size(); ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      double left_sum = 0.0;
      std::size_t left_count = 0;
      double prev = 0.0;
      bool have_prev = false;
      for (std::size_t row : order_[j]) {
        if (node_of_[row] != node) continue;
        const double v = samples_(static_cast<Eigen::Index>(row), col);
        if (have_prev && v > prev && left_count < count) {
          const double right_sum = total - left_sum;
          const auto right_count = count - left_count;
          const double gain = left_sum * left_sum / static_cast<double>(left_count) +
                              right_sum * right_sum / static_cast<double>(right_count) - parent_score;
          if (gain > min_gain && gain > best.gain) {
            double threshold = prev + (v - prev) / 2.0;
            if (!(threshold < v)) threshold = prev;
            best = {static_cast<int>(j), threshold, gain};
          }
        }
        left_sum += (*residual_)[row];
        ++left_count;
        prev = v;
        have_prev = true;
      }
    }
    return best;
  }

  const Matrix& samples_;
  const std::vector<std::vector<std::size_t>>& order_;
  int depth_;
  std::vector<int> node_of_;
  const std::vector<double>* residual_ = nullptr;
  RegressionTree tree_;
};

}  // namespace

std::shared_ptr<const BoostedTreesModel> fit_boosted_stumps(const Matrix& samples,
                                                            std::span<const double> targets,
                                                            int rounds, int depth,
                                                            double learning_rate) {
  const auto k = static_cast<std::size_t>(samples.rows());
  const auto n = static_cast<std::size_t>(samples.cols());
  if (k == 0) throw FitError("cannot fit a boosted model on empty data");
  if (targets.size() != k) {
    throw DimensionError("targets have length " + std::to_string(targets.size()) + ", expected " +
                         std::to_string(k));
  }
  if (rounds < 1) throw PreconditionError("boosting requires rounds >= 1");
  if (depth < 1 || depth > 3) throw PreconditionError("tree depth must be 1, 2, or 3");
  if (!(learning_rate > 0.0)) throw PreconditionError("learning rate must be > 0");

  const double base = std::accumulate(targets.begin(), targets.end(), 0.0) / static_cast<double>(k);
  std::vector<std::vector<std::size_t>> order(n, std::vector<std::size_t>(k));
  for (std::size_t j = 0; j < n; ++j) {
    std::iota(order[j].begin(), order[j].end(), std::size_t{0});
    const auto col = static_cast<Eigen::Index>(j);
    std::stable_sort(order[j].begin(), order[j].end(), [&](std::size_t a, std::size_t b) {
      return samples(static_cast<Eigen::Index>(a), col) < samples(static_cast<Eigen::Index>(b), col);
    });
  }

  std::vector<double> prediction(k, base);
  std::vector<double> residual(k);
  std::vector<RegressionTree> trees;
  trees.reserve(static_cast<std::size_t>(rounds));
  TreeBuilder builder(samples, order, depth);
  for (int round = 0; round < rounds; ++round) {
    for (std::size_t i = 0; i < k; ++i) residual[i] = targets[i] - prediction[i];
    RegressionTree tree = builder.build(residual);
    if (tree.nodes.size() == 1) break;  // residuals are constant within every candidate split
    for (std::size_t i = 0; i < k; ++i) {
      prediction[i] += learning_rate * tree.predict(
          {samples.data() + static_cast<Eigen::Index>(i) * samples.cols(), n});
    }
    trees.push_back(std::move(tree));
  }
  return std::make_shared<BoostedTreesModel>(n, base, learning_rate, std::move(trees));
}

}  // namespace shapsets
