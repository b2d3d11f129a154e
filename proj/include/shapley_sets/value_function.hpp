#ifndef SHAPLEY_SETS_VALUE_FUNCTION_HPP
#define SHAPLEY_SETS_VALUE_FUNCTION_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>

#include <Eigen/Dense>

#include "shapley_sets/core.hpp"

namespace shapsets {

/// Coalition value functions.
///   baseline:    v(x, S) = f(x_S, z_rest) - f(z) for a fixed reference z
///   marginal:    the baseline form with z = the dataset mean vector
///   conditional: v(x, S) = E[f(x_S, X_rest) | X_S = x_S] - mean_rows f(X), with
///                X_rest drawn from a Gaussian fitted to the dataset
enum class ValueKind { baseline, marginal, conditional };

std::string to_string(ValueKind kind);
ValueKind parse_value_kind(const std::string& name);

struct ValueFunctionConfig {
  ValueKind kind = ValueKind::marginal;
  /// Required iff kind == baseline.
  std::optional<FeatureVector> baseline;
  /// Monte-Carlo draws per conditional query.
  int mc_samples = 256;
  /// Ridge added to the conditioning block. Unset means 1e-6 times the mean
  /// diagonal of the dataset covariance.
  std::optional<double> ridge;
  std::uint64_t seed = 0;

  static ValueFunctionConfig with_baseline(FeatureVector z);
  static ValueFunctionConfig marginal();
  static ValueFunctionConfig conditional(int mc_samples = 256, std::uint64_t seed = 0);

  void validate(std::size_t n) const;
};

/// Distribution of the free features S̄ given X_S = x_S.
struct ConditionalGaussian {
  FeatureIndexSet free;
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;
};

/// Gaussian conditioning with a ridge on Σ_SS:
///   mean = μ_S̄ + Σ_S̄S (Σ_SS + λI)^-1 (x_S - μ_S)
///   cov  = Σ_S̄S̄ - Σ_S̄S (Σ_SS + λI)^-1 Σ_SS̄
/// `x_S` lists the conditioning values in ascending index order. Empty S
/// returns the unconditional distribution; S = all features returns an empty
/// one. Throws SingularityError when the regularized block cannot be factorized.
ConditionalGaussian condition_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                       const FeatureIndexSet& S, std::span<const double> x_S,
                                       double ridge);

/// Lower-triangular L with L L^T = A for symmetric positive semidefinite A.
/// Pivots at or below round-off produce zero columns instead of failing.
Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& A);

double resolve_ridge(const ValueFunctionConfig& cfg, const DatasetMatrix& data);

double v_bs(const PredictiveModel& model, std::span<const double> x, std::span<const double> z,
            const FeatureIndexSet& S);

double v_marg(const PredictiveModel& model, const DatasetMatrix& data, std::span<const double> x,
              const FeatureIndexSet& S);

struct McEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Estimate of E[f(x_S, X_S̄) | X_S = x_S] from cfg.mc_samples conditional
/// draws. The standard-normal variates for feature j come from the substream
/// (cfg.seed, stream, j), so two queries sharing `stream` reuse identical
/// noise for every feature they both leave free. S = all features evaluates
/// f(x) exactly; S = ∅ samples the unconditional Gaussian.
McEstimate conditional_expectation(const PredictiveModel& model, const DatasetMatrix& data,
                                   std::span<const double> x, const FeatureIndexSet& S,
                                   const ValueFunctionConfig& cfg, std::uint64_t stream = 0);

McEstimate v_cond_estimate(const PredictiveModel& model, const DatasetMatrix& data,
                           std::span<const double> x, const FeatureIndexSet& S,
                           const ValueFunctionConfig& cfg, std::uint64_t stream = 0);

double v_cond(const PredictiveModel& model, const DatasetMatrix& data, std::span<const double> x,
              const FeatureIndexSet& S, const ValueFunctionConfig& cfg, std::uint64_t stream = 0);

/// A value function bound to a model, dataset, and configuration. Counts the
/// coalition evaluations it performs.
class CoalitionValue {
 public:
  /// `data` may be null only for kind == baseline.
  CoalitionValue(const PredictiveModel& model, const DatasetMatrix* data, ValueFunctionConfig cfg);

  double operator()(std::span<const double> x, const FeatureIndexSet& S,
                    std::uint64_t stream = 0) const;

  /// Value of the grand coalition; never sampled and not counted.
  double grand(std::span<const double> x) const;
  /// f at the reference point: f(z) for off-manifold kinds, mean_rows f(X) for
  /// the conditional kind.
  double reference_output() const;

  std::size_t calls() const { return calls_; }
  void reset_calls() { calls_ = 0; }
  const ValueFunctionConfig& config() const { return cfg_; }
  const PredictiveModel& model() const { return model_; }
  const DatasetMatrix* data() const { return data_; }

 private:
  const PredictiveModel& model_;
  const DatasetMatrix* data_;
  ValueFunctionConfig cfg_;
  FeatureVector reference_;
  mutable std::size_t calls_ = 0;
};

}  // namespace shapsets

#endif  // SHAPLEY_SETS_VALUE_FUNCTION_HPP
