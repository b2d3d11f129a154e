#ifndef SHAPLEY_SETS_BOOSTING_HPP
#define SHAPLEY_SETS_BOOSTING_HPP

#include <memory>
#include <span>
#include <vector>

#include "shapley_sets/core.hpp"

namespace shapsets {

/// Axis-aligned regression tree stored as flat node arrays. A node with
/// feature < 0 is a leaf.
struct RegressionTree {
  struct Node {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
  };
  std::vector<Node> nodes;

  double predict(std::span<const double> x) const;
};

/// base + learning_rate · Σ_t tree_t(x)
class BoostedTreesModel final : public PredictiveModel {
 public:
  BoostedTreesModel(std::size_t dimension, double base, double learning_rate,
                    std::vector<RegressionTree> trees);

  double base() const { return base_; }
  double learning_rate() const { return learning_rate_; }
  const std::vector<RegressionTree>& trees() const { return trees_; }

 protected:
  double predict(std::span<const double> x) const override;

 private:
  double base_;
  double learning_rate_;
  std::vector<RegressionTree> trees_;
};

/// Least-squares gradient boosting. Splits are exact greedy searches over
/// midpoints between distinct sorted values; ties keep the lowest feature
/// index and lowest threshold, so the fit is deterministic in the row order.
std::shared_ptr<const BoostedTreesModel> fit_boosted_stumps(const Matrix& samples,
                                                            std::span<const double> targets,
                                                            int rounds, int depth,
                                                            double learning_rate);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_BOOSTING_HPP
