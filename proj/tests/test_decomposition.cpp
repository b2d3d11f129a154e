#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "shapley_sets/decomposition.hpp"
#include "shapley_sets/error.hpp"
#include "shapley_sets/experiments.hpp"
#include "shapley_sets/models.hpp"

using namespace shapsets;
namespace ex = shapsets::experiments;

namespace {

DatasetMatrix iid(std::size_t n, std::uint64_t seed, std::size_t k = 500) {
  GeneratorConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.seed = seed;
  return generate_data(cfg);
}

}  // namespace

TEST(Epsilon, ScalesSmallestSampledOutput) {
  const DatasetMatrix data = iid(3, 1);
  const FunctionModel f(3, [](std::span<const double> x) { return 5.0 + x[0]; });
  const EpsilonPolicy eps = compute_epsilon(f, data, 1e-3, 10, 4);
  EXPECT_GT(eps.resolved_epsilon, 0.0);
  // The minimum over ten rows can be no smaller than the dataset-wide minimum.
  double smallest = INFINITY;
  for (std::size_t i = 0; i < data.rows(); ++i) smallest = std::min(smallest, std::abs(f.evaluate(data.row(i))));
  EXPECT_GE(eps.resolved_epsilon, 1e-3 * smallest - 1e-18);
  EXPECT_EQ(compute_epsilon(f, data, 1e-3, 10, 4).resolved_epsilon, eps.resolved_epsilon);
  EXPECT_DOUBLE_EQ(compute_epsilon(f, data, 2e-3, 10, 4).resolved_epsilon, 2.0 * eps.resolved_epsilon);
}

TEST(Epsilon, ConstantModel) {
  const DatasetMatrix data = iid(2, 3);
  const FunctionModel f(2, [](std::span<const double>) { return -4.0; });
  EXPECT_DOUBLE_EQ(compute_epsilon(f, data, 0.5, 3, 0).resolved_epsilon, 2.0);
  EXPECT_DOUBLE_EQ(EpsilonPolicy::fixed(0.25).resolved_epsilon, 0.25);
}

TEST(Discrepancy, BaselineFormHandValues) {
  const FunctionModel f(3, [](std::span<const double> x) { return x[0] + 2.0 * x[1] * x[2]; });
  const FeatureVector x = {1, 1, 1};
  const FeatureVector z = {0, 0, 0};
  EXPECT_DOUBLE_EQ(interaction_discrepancy_bs(f, FeatureIndexSet{0}, FeatureIndexSet{1}, x, z), 0.0);
  EXPECT_DOUBLE_EQ(interaction_discrepancy_bs(f, FeatureIndexSet{1}, FeatureIndexSet{2}, x, z), 2.0);
  EXPECT_DOUBLE_EQ(interaction_discrepancy_bs(f, FeatureIndexSet{0}, FeatureIndexSet{1, 2}, x, z), 0.0);
}

TEST(Discrepancy, ConditionalAdditiveIndependentIsSmall) {
  const DatasetMatrix data = iid(3, 5, 4000);
  const FunctionModel f(3, [](std::span<const double> x) { return x[0] + std::sin(x[1]) + x[2]; });
  const ValueFunctionConfig cfg = ValueFunctionConfig::conditional(2000, 6);
  const FeatureVector x = {0.5, -0.5, 1.0};
  const double d = interaction_discrepancy_cond(f, data, FeatureIndexSet{0}, FeatureIndexSet{1}, x, cfg, 0);
  EXPECT_LT(std::abs(d), 0.05);
  const FunctionModel g(3, [](std::span<const double> x) { return 3.0 * x[0] * x[1]; });
  const double e = interaction_discrepancy_cond(g, data, FeatureIndexSet{0}, FeatureIndexSet{1}, x, cfg, 0);
  EXPECT_GT(std::abs(e), 0.3);
}

TEST(Decompose, AdditiveModelGivesSingletons) {
  const DatasetMatrix data = iid(6, 8);
  const auto model = ex::additive_model(6);
  InteractionProbe probe(ex::pairwise_baseline(), 3, 2);
  const DecompositionResult r = decompose(*model, data, probe, compute_epsilon(*model, data, 1e-3, 10, 1));
  EXPECT_EQ(r.partition, Partition::singletons(6));
  EXPECT_EQ(r.value_evaluations, probe.evaluations());
  EXPECT_GT(r.epsilon_used, 0.0);
}

TEST(Decompose, RecoversExampleTwoStructure) {
  const DatasetMatrix data = iid(3, 11);
  const auto model = make_synthetic(SyntheticId::example2).first;
  const auto r = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, 11);
  EXPECT_EQ(r.partition, Partition({FeatureIndexSet{0}, FeatureIndexSet{1, 2}}, 3));
}

TEST(Decompose, RecoversF1AndF3) {
  for (SyntheticId id : {SyntheticId::f1, SyntheticId::f3}) {
    const auto [model, spec] = make_synthetic(id);
    const DatasetMatrix data = generate_data(ex::independent_setup(4));
    const auto r = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, 4);
    EXPECT_EQ(r.partition, spec.partition) << to_string(id) << " got " << r.partition.to_string();
    ASSERT_EQ(r.seps.size() + r.nonseps.size(), r.partition.group_count());
  }
}

TEST(Decompose, FullyInteractingModelIsOneGroup) {
  const DatasetMatrix data = iid(4, 2);
  const FunctionModel f(4, [](std::span<const double> x) { return x[0] * x[1] * x[2] * x[3]; });
  const auto r = ex::run_decomposition(f, data, ex::pairwise_baseline(), {}, 3);
  EXPECT_EQ(r.partition, Partition::grand(4));
}

TEST(Decompose, SingleFeature) {
  const DatasetMatrix data = iid(1, 2);
  const FunctionModel f(1, [](std::span<const double> x) { return x[0] * x[0]; });
  const auto r = ex::run_decomposition(f, data, ex::pairwise_baseline(), {}, 0);
  EXPECT_EQ(r.partition, Partition::singletons(1));
}

TEST(Decompose, DeterministicAndTraced) {
  const DatasetMatrix data = generate_data(ex::independent_setup(2, 300));
  const auto model = make_synthetic(SyntheticId::f1).first;
  std::ostringstream a, b;
  const auto r1 = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, 6, &a);
  const auto r2 = ex::run_decomposition(*model, data, ex::pairwise_baseline(), {}, 6, &b);
  EXPECT_EQ(r1.partition, r2.partition);
  EXPECT_EQ(r1.value_evaluations, r2.value_evaluations);
  EXPECT_EQ(a.str(), b.str());
  std::istringstream lines(a.str());
  std::string line;
  std::size_t count = 0;
  while (std::getline(lines, line)) {
    const auto j = nlohmann::json::parse(line);
    EXPECT_TRUE(j.contains("rows"));
    EXPECT_TRUE(j.contains("epsilon"));
    EXPECT_EQ(j.at("rows").size() % 2, 0U);
    ++count;
  }
  EXPECT_GT(count, 0U);
}

TEST(Decompose, RejectsMismatchedData) {
  const DatasetMatrix data = iid(3, 1);
  const FunctionModel f(4, [](std::span<const double> x) { return x[0]; });
  InteractionProbe probe(ex::pairwise_baseline(), 3, 0);
  EXPECT_THROW(decompose(f, data, probe, EpsilonPolicy::fixed(1e-3)), DimensionError);
}

TEST(ValueInteract, FindsOnlyInteractingMembers) {
  const DatasetMatrix data = iid(5, 9);
  const FunctionModel f(5, [](std::span<const double> x) { return x[0] * x[3] + x[1] + x[2] + x[4]; });
  InteractionProbe probe(ex::pairwise_baseline(), 3, 1);
  const FeatureIndexSet grown =
      value_interact(FeatureIndexSet{0}, FeatureIndexSet{1, 2, 3, 4}, probe, EpsilonPolicy::fixed(1e-6), f, data);
  EXPECT_EQ(grown, (FeatureIndexSet{0, 3}));
  EXPECT_GT(probe.fitness_tests(), 0U);
}
