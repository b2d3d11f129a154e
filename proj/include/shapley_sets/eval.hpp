#ifndef SHAPLEY_SETS_EVAL_HPP
#define SHAPLEY_SETS_EVAL_HPP

#include <span>
#include <vector>

#include "shapley_sets/attribution.hpp"
#include "shapley_sets/core.hpp"
#include "shapley_sets/value_function.hpp"

namespace shapsets {

struct MetricResult {
  double mean = 0.0;
  /// Population standard deviation of per_sample.
  double std = 0.0;
  std::vector<double> per_sample;

  static MetricResult from_samples(std::vector<double> per_sample);
};

/// Rows are samples, columns are features. Per sample: mean over features of
/// |attribution - ground truth|.
MetricResult mae(const Matrix& attributions, const Matrix& ground_truth);

/// |v(x, N ∖ top)| where `top` is the group with the largest |attribution|
/// (lowest group index on ties).
double deletion(const CoalitionValue& v, std::span<const double> x, const AttributionReport& report);

/// |v(x, N) - Σ attributions|
double sensitivity(const CoalitionValue& v, std::span<const double> x,
                   const AttributionReport& report);

struct DeletionCurve {
  /// Group indices in removal order (descending |attribution|).
  std::vector<std::size_t> order;
  /// predictions[0] = v(x, N); predictions[s] = v(x, groups left after s removals).
  std::vector<double> predictions;
  double original_prediction = 0.0;
  double target_prediction = 0.0;
};

DeletionCurve deletion_curve(const CoalitionValue& v, std::span<const double> x,
                             const AttributionReport& report);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_EVAL_HPP
