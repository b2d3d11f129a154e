#include <gtest/gtest.h>

#include <cmath>

#include "shapley_sets/attribution.hpp"
#include "shapley_sets/error.hpp"
#include "shapley_sets/eval.hpp"
#include "shapley_sets/experiments.hpp"
#include "shapley_sets/models.hpp"

using namespace shapsets;
namespace ex = shapsets::experiments;

TEST(Mae, PerSampleMeanAndPopulationStd) {
  Matrix a(2, 2), t(2, 2);
  a << 1, 2, 3, 4;
  t << 0, 0, 3, 6;
  const MetricResult r = mae(a, t);
  EXPECT_EQ(r.per_sample, (std::vector<double>{1.5, 1.0}));
  EXPECT_DOUBLE_EQ(r.mean, 1.25);
  EXPECT_DOUBLE_EQ(r.std, 0.25);
  EXPECT_THROW(mae(a, Matrix(2, 3)), DimensionError);
}

TEST(Mae, ZeroWhenEqual) {
  Matrix a(1, 3);
  a << -1, 0, 1;
  const MetricResult r = mae(a, a);
  EXPECT_DOUBLE_EQ(r.mean, 0.0);
  EXPECT_DOUBLE_EQ(r.std, 0.0);
}

TEST(Deletion, RemovesLargestGroup) {
  const auto model = make_synthetic(SyntheticId::example2).first;
  const CoalitionValue v(*model, nullptr, ValueFunctionConfig::with_baseline({0, 0, 0}));
  const FeatureVector x = {1, 1, 1};
  const Partition p({FeatureIndexSet{0}, FeatureIndexSet{1, 2}}, 3);
  const AttributionReport r = shapley_sets(v, x, p);
  EXPECT_DOUBLE_EQ(deletion(v, x, r), 1.0);
  EXPECT_DOUBLE_EQ(sensitivity(v, x, r), 0.0);

  const DeletionCurve c = deletion_curve(v, x, r);
  EXPECT_EQ(c.order, (std::vector<std::size_t>{1, 0}));
  EXPECT_EQ(c.predictions, (std::vector<double>{3.0, 1.0, 0.0}));
  EXPECT_DOUBLE_EQ(c.original_prediction, 3.0);
  EXPECT_DOUBLE_EQ(c.target_prediction, 0.0);
}

TEST(Deletion, TiesKeepLowerGroup) {
  const FunctionModel f(2, [](std::span<const double> x) { return x[0] + x[1]; });
  const CoalitionValue v(f, nullptr, ValueFunctionConfig::with_baseline({0, 0}));
  const FeatureVector x = {1, -1};
  const AttributionReport r = shapley_sets(v, x, Partition::singletons(2));
  EXPECT_EQ(deletion_curve(v, x, r).order, (std::vector<std::size_t>{0, 1}));
  EXPECT_DOUBLE_EQ(deletion(v, x, r), 1.0);
}

TEST(Sensitivity, DetectsMissingInteraction) {
  const auto model = make_synthetic(SyntheticId::example2).first;
  const CoalitionValue v(*model, nullptr, ValueFunctionConfig::with_baseline({0, 0, 0}));
  const FeatureVector x = {1, 1, 1};
  const AttributionReport r = shapley_sets(v, x, Partition::singletons(3));
  EXPECT_DOUBLE_EQ(sensitivity(v, x, r), 2.0);
  EXPECT_DOUBLE_EQ(r.efficiency_residual, 2.0);
}

TEST(Sensitivity, BoundedForRecoveredPartition) {
  const auto model = make_synthetic(SyntheticId::f1).first;
  const DatasetMatrix data = generate_data(ex::independent_setup(3));
  const auto result = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, 3);
  const double bound = static_cast<double>(result.partition.group_count()) * result.epsilon_used;
  for (std::size_t i = 0; i < 20; ++i) {
    const auto x = data.row(i);
    const auto z = data.row(i + 20);
    const CoalitionValue v(*model, nullptr, ValueFunctionConfig::with_baseline({z.begin(), z.end()}));
    EXPECT_LE(sensitivity(v, x, shapley_sets(v, x, result.partition)), bound);
  }
}

TEST(Deletion, RejectsMalformedReport) {
  const FunctionModel f(2, [](std::span<const double> x) { return x[0]; });
  const CoalitionValue v(f, nullptr, ValueFunctionConfig::with_baseline({0, 0}));
  const FeatureVector x = {1, 1};
  AttributionReport r;
  EXPECT_THROW(deletion(v, x, r), PreconditionError);
  r.partition = Partition::singletons(2);
  r.values = {1.0};
  EXPECT_THROW(sensitivity(v, x, r), PreconditionError);
  r.partition = Partition::singletons(3);
  r.values = {1.0, 0.0, 0.0};
  EXPECT_THROW(deletion_curve(v, x, r), DimensionError);
}
