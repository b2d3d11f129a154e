#include "shapley_sets/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "shapley_sets/error.hpp"

namespace shapsets {

MetricResult MetricResult::from_samples(std::vector<double> per_sample) {
  MetricResult r;
  r.per_sample = std::move(per_sample);
  if (r.per_sample.empty()) return r;
  const auto k = static_cast<double>(r.per_sample.size());
  r.mean = std::accumulate(r.per_sample.begin(), r.per_sample.end(), 0.0) / k;
  double ss = 0.0;
  for (double v : r.per_sample) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / k);
  return r;
}

MetricResult mae(const Matrix& attributions, const Matrix& ground_truth) {
  if (attributions.rows() != ground_truth.rows() || attributions.cols() != ground_truth.cols()) {
    throw DimensionError("attribution and ground-truth shapes differ");
  }
  if (attributions.cols() == 0) throw DimensionError("mae requires at least one feature");
  std::vector<double> per_sample(static_cast<std::size_t>(attributions.rows()));
  for (Eigen::Index j = 0; j < attributions.rows(); ++j) {
    per_sample[static_cast<std::size_t>(j)] =
        (attributions.row(j) - ground_truth.row(j)).cwiseAbs().mean();
  }
  return MetricResult::from_samples(std::move(per_sample));
}

namespace {

void check_report(const CoalitionValue& v, std::span<const double> x, const AttributionReport& report) {
  if (report.values.empty()) throw PreconditionError("attribution report is empty");
  if (report.values.size() != report.partition.group_count()) {
    throw PreconditionError("attribution report has one value per group");
  }
  if (report.partition.feature_count() != v.model().dimension()) {
    throw DimensionError("report partition does not match the model dimension");
  }
  validate_vector(x, v.model().dimension(), "sample");
}

/// Descending |value|; stable so ties keep ascending group order.
std::vector<std::size_t> importance_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(values[a]) > std::abs(values[b]);
  });
  return order;
}

}  // namespace

double deletion(const CoalitionValue& v, std::span<const double> x, const AttributionReport& report) {
  check_report(v, x, report);
  const std::size_t top = importance_order(report.values).front();
  const FeatureIndexSet rest = report.partition.group(top).complement(report.partition.feature_count());
  return std::abs(v(x, rest, report.stream));
}

double sensitivity(const CoalitionValue& v, std::span<const double> x,
                   const AttributionReport& report) {
  check_report(v, x, report);
  const double total = std::accumulate(report.values.begin(), report.values.end(), 0.0);
  return std::abs(v.grand(x) - total);
}

DeletionCurve deletion_curve(const CoalitionValue& v, std::span<const double> x,
                             const AttributionReport& report) {
  check_report(v, x, report);
  DeletionCurve curve;
  curve.order = importance_order(report.values);
  const std::size_t n = report.partition.feature_count();
  FeatureIndexSet remaining = FeatureIndexSet::all(n);
  curve.predictions.push_back(v.grand(x));
  for (std::size_t g : curve.order) {
    remaining = remaining.minus(report.partition.group(g));
    curve.predictions.push_back(remaining.empty() ? 0.0 : v(x, remaining, report.stream));
  }
  curve.target_prediction = v.reference_output();
  curve.original_prediction = v.model().evaluate(x);
  return curve;
}

}  // namespace shapsets
