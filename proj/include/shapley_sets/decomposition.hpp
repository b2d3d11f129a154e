#ifndef SHAPLEY_SETS_DECOMPOSITION_HPP
#define SHAPLEY_SETS_DECOMPOSITION_HPP

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "shapley_sets/core.hpp"
#include "shapley_sets/rng.hpp"
#include "shapley_sets/value_function.hpp"

namespace shapsets {

/// Interaction threshold ε = alpha * min_t |f(x_t)| over sampled rows x_t.
struct EpsilonPolicy {
  double alpha = 1e-3;
  int num_candidates = 10;
  double resolved_epsilon = 0.0;
  std::uint64_t seed = 0;

  static EpsilonPolicy fixed(double epsilon);
};

/// Samples `k` rows with replacement and resolves the threshold.
EpsilonPolicy compute_epsilon(const PredictiveModel& model, const DatasetMatrix& data,
                              double alpha = 1e-3, int k = 10, std::uint64_t seed = 0);

/// Candidate sampling state for one decomposition run. Each fitness test
/// draws `repetitions` fresh candidates from the dataset rows (pairs x, x'
/// for the off-manifold kinds, single rows for the conditional kind),
/// distinct within the test.
class InteractionProbe {
 public:
  explicit InteractionProbe(ValueFunctionConfig value, int repetitions = 3, std::uint64_t seed = 0);

  const ValueFunctionConfig& value_config() const { return value_; }
  int repetitions() const { return repetitions_; }
  std::uint64_t seed() const { return seed_; }
  /// Value-function calls issued so far.
  std::size_t evaluations() const { return evaluations_; }
  std::size_t fitness_tests() const { return tests_; }

  /// One JSON object per fitness test is written to `os` when set: the sets,
  /// the candidate rows consumed (x, x' interleaved for the off-manifold
  /// kinds), the last σ1 and σ2, ε and the verdict.
  void set_trace(std::ostream* os) { trace_ = os; }

 private:
  friend bool fitness_interacts(const FeatureIndexSet&, const FeatureIndexSet&, InteractionProbe&,
                                const EpsilonPolicy&, const PredictiveModel&, const DatasetMatrix&);

  std::vector<std::size_t> draw_rows(std::size_t k, std::size_t count);

  ValueFunctionConfig value_;
  int repetitions_;
  std::uint64_t seed_;
  Rng rng_;
  std::size_t evaluations_ = 0;
  std::size_t tests_ = 0;
  std::ostream* trace_ = nullptr;
};

/// (v(x,A∪B) - v(x,B)) - v(x,A) under the baseline form with reference z.
double interaction_discrepancy_bs(const PredictiveModel& model, const FeatureIndexSet& A,
                                  const FeatureIndexSet& B, std::span<const double> x,
                                  std::span<const double> z);

/// The same discrepancy under the conditional value function. The four
/// conditional expectations share the MC substream `stream`; the empty
/// coalition's expectation is estimated with the same draws rather than
/// replaced by the row mean, so common noise cancels.
double interaction_discrepancy_cond(const PredictiveModel& model, const DatasetMatrix& data,
                                    const FeatureIndexSet& A, const FeatureIndexSet& B,
                                    std::span<const double> x, const ValueFunctionConfig& cfg,
                                    std::uint64_t stream);

/// True iff |σ1 - σ2| > ε for any of the probe's repetitions.
bool fitness_interacts(const FeatureIndexSet& A, const FeatureIndexSet& B, InteractionProbe& probe,
                       const EpsilonPolicy& eps, const PredictiveModel& model,
                       const DatasetMatrix& data);

/// Grows X1 by the members of X2 it interacts with, halving X2 recursively.
FeatureIndexSet value_interact(const FeatureIndexSet& X1, const FeatureIndexSet& X2,
                               InteractionProbe& probe, const EpsilonPolicy& eps,
                               const PredictiveModel& model, const DatasetMatrix& data);

struct DecompositionResult {
  std::vector<FeatureIndexSet> seps;
  std::vector<FeatureIndexSet> nonseps;
  Partition partition;
  std::size_t value_evaluations = 0;
  double epsilon_used = 0.0;
};

DecompositionResult decompose(const PredictiveModel& model, const DatasetMatrix& data,
                              InteractionProbe& probe, const EpsilonPolicy& eps);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_DECOMPOSITION_HPP
