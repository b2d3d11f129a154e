#ifndef SHAPLEY_SETS_EXPERIMENTS_HPP
#define SHAPLEY_SETS_EXPERIMENTS_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "shapley_sets/attribution.hpp"
#include "shapley_sets/decomposition.hpp"
#include "shapley_sets/eval.hpp"
#include "shapley_sets/models.hpp"

// Drivers for the synthetic experiments. The CLI and the acceptance suite
// both call these so that a reproduced table and its check share one code path.
namespace shapsets::experiments {

struct DecomposeSettings {
  double alpha = 1e-3;
  int epsilon_candidates = 10;
  int repetitions = 3;
};

/// Resolves ε and runs the decomposition with seeds derived from `seed`:
/// ε draws from substream (seed, 1), the probe from (seed, 2).
DecompositionResult run_decomposition(const PredictiveModel& model, const DatasetMatrix& data,
                                      const ValueFunctionConfig& value, const DecomposeSettings& s,
                                      std::uint64_t seed, std::ostream* trace = nullptr);

/// Baseline-kind configuration for decomposition; candidate pairs come from
/// the data so no reference vector is attached.
ValueFunctionConfig pairwise_baseline();

/// Seven iid Normal(-1, 1) features.
GeneratorConfig independent_setup(std::uint64_t seed, std::size_t k = 2000);

struct GoldenRun {
  SyntheticId id = SyntheticId::f1;
  std::uint64_t seed = 0;
  Partition expected;
  DecompositionResult result;
  bool recovered() const { return result.partition == expected; }
};

std::vector<GoldenRun> golden_decompositions(const std::vector<std::uint64_t>& seeds,
                                             const DecomposeSettings& s = {});

/// Per-sample MAE rows for one method on one model.
struct MethodScore {
  std::string method;
  MetricResult mae;
  /// samples × features
  Matrix attributions;
};

struct Table1Row {
  SyntheticId id = SyntheticId::f1;
  Partition partition;
  MethodScore shapley_sets;
  MethodScore shapley_values;
};

struct Table1Config {
  std::size_t samples = 100;
  std::uint64_t seed = 0;
  DecomposeSettings decomposition;
};

/// SS and exact per-feature Shapley under the marginal value function on
/// f1..f3, scored against ground truth referenced to the dataset mean.
std::vector<Table1Row> table1(const Table1Config& cfg);

struct Table2Config {
  std::size_t train = 2000;
  std::size_t test = 100;
  double rho = 0.8;
  int mc_samples = 256;
  int boost_rounds = 500;
  int boost_depth = 1;
  double learning_rate = 0.2;
  std::uint64_t seed = 0;
  DecomposeSettings decomposition;
};

struct Table2Row {
  std::string model;
  std::size_t n = 0;
  double train_r_squared = 0.0;
  Partition partition;
  MethodScore shapley_sets;
  MethodScore shapley_marginal;
  MethodScore shapley_conditional;
};

/// g1 (least squares) and g2 (boosted stumps) fit to the linear target on
/// correlated data; g3 is g2 retrained with a duplicate of feature 0 appended.
/// Ground truth for feature i is c_i (x_i - mean_i); a group is scored
/// against the sum over its members.
std::vector<Table2Row> table2(const Table2Config& cfg, bool with_dummy = true);

struct DummySummary {
  /// MAE between SS attributions of g2 and g3 on the shared features.
  double shapley_sets_shift = 0.0;
  double conditional_mae_g2 = 0.0;
  double conditional_mae_g3 = 0.0;
};

/// Requires rows named g2 and g3.
DummySummary dummy_summary(const std::vector<Table2Row>& rows);

struct Prop1Row {
  std::string function;
  ValueKind kind = ValueKind::baseline;
  Partition partition;
  std::size_t samples = 0;
  std::size_t comparisons = 0;
  std::size_t bit_identical = 0;
  double max_abs_difference = 0.0;
  /// Largest |difference| / standard error (conditional kind only).
  double max_standard_errors = 0.0;
};

struct Prop1Config {
  std::size_t samples = 20;
  int mc_samples = 4096;
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> decomposition_seeds{0};
  DecomposeSettings decomposition;
};

/// Compares exact Shapley over the super-feature game with SS values, for each
/// distinct partition returned by the golden decompositions.
std::vector<Prop1Row> prop1(const Prop1Config& cfg);

struct CurveRecord {
  std::string method;
  std::size_t sample = 0;
  Partition partition;
  DeletionCurve curve;
};

struct CurvesConfig {
  SyntheticId id = SyntheticId::f1;
  std::size_t samples = 3;
  std::uint64_t seed = 0;
  DecomposeSettings decomposition;
};

/// Deletion curves under the marginal value function for SS and for exact
/// per-feature Shapley.
std::vector<CurveRecord> curves(const CurvesConfig& cfg);

struct ComplexityPoint {
  std::size_t n = 0;
  std::size_t evaluations = 0;
};

/// Decomposition cost on additive models with iid features.
std::vector<ComplexityPoint> complexity_sweep(const std::vector<std::size_t>& sizes,
                                              std::uint64_t seed, const DecomposeSettings& s = {});

/// Least-squares fit y ≈ c·n·log2(n) through the origin.
struct NLogNFit {
  double c = 0.0;
  double r_squared = 0.0;
};
NLogNFit fit_n_log_n(const std::vector<ComplexityPoint>& points);

/// Additive model Σ (1 + (i mod 3)/2) x_i.
std::shared_ptr<const PredictiveModel> additive_model(std::size_t n);

}  // namespace shapsets::experiments

#endif  // SHAPLEY_SETS_EXPERIMENTS_HPP
