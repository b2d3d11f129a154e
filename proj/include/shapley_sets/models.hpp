#ifndef SHAPLEY_SETS_MODELS_HPP
#define SHAPLEY_SETS_MODELS_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "shapley_sets/core.hpp"

namespace shapsets {

/// Builtin target functions (0-based feature indices):
///   f1        X0 + X1/(2+X4) + 2·X2·X3 + sin(2·X5 + X6)
///   f2        2·sgn(X0) + sgn(X1·X2·X3) + sgn(X4·X5·X6)
///   f3        2·X0·X2·X3 + 4·X4·X5 - 3·X1² - X6
///   example1  X0 + X2, with X2 = X1 in its data
///   example2  X0 + 2·X1·X2
///   linear_g  X0 + 0.5·X1 + 0.2·X2 + 0.8·X3 + 0.5·X4
enum class SyntheticId { f1, f2, f3, example1, example2, linear_g };

std::string to_string(SyntheticId id);
SyntheticId parse_synthetic_id(const std::string& name);

/// Ground truth for a builtin function: its additive structure and one
/// sub-function per group (aligned with partition.groups()).
struct SyntheticSpec {
  SyntheticId id = SyntheticId::f1;
  std::size_t n = 0;
  Partition partition;
  std::vector<std::function<double(std::span<const double>)>> components;
};

std::pair<std::shared_ptr<const PredictiveModel>, SyntheticSpec> make_synthetic(SyntheticId id);

/// linear_g extended by an unused trailing feature (coefficient 0).
std::pair<std::shared_ptr<const PredictiveModel>, SyntheticSpec> make_linear_g_with_dummy();

/// Sub-function value of `group` at x minus its value at `baseline`
/// (zero vector when empty). Throws PreconditionError when the group is not
/// one of the ground-truth groups listed in `spec`.
double ground_truth_attribution(const SyntheticSpec& spec, std::span<const double> x,
                                const FeatureIndexSet& group, std::span<const double> baseline = {});

/// Per-feature ground truth: feature i receives the attribution of its
/// ground-truth group.
std::vector<double> ground_truth_per_feature(const SyntheticSpec& spec, std::span<const double> x,
                                             std::span<const double> baseline = {});

enum class Dependence { iid, rho_link, with_dummy };

std::string to_string(Dependence d);
Dependence parse_dependence(const std::string& name);

struct GeneratorConfig {
  std::size_t n = 7;
  std::size_t k = 2000;
  double mean = -1.0;
  double variance = 1.0;
  Dependence dependence = Dependence::iid;
  double rho = 0.8;
  std::uint64_t seed = 0;

  void validate() const;
};

/// iid: every entry ~ Normal(mean, variance). rho_link: column 1 = rho·column 0.
/// with_dummy: rho_link plus an appended column equal to column 0, so the
/// result has n + 1 columns whose first n match rho_link for the same seed.
Matrix generate_samples(const GeneratorConfig& cfg);
DatasetMatrix generate_data(const GeneratorConfig& cfg);

/// Binary data for example1: X0, X1 ~ Bernoulli(1/2), X2 = X1.
Matrix generate_example1_samples(std::size_t k, std::uint64_t seed);

/// Applies the model to every row.
std::vector<double> predict_rows(const PredictiveModel& model, const Matrix& samples);

class LinearModel final : public PredictiveModel {
 public:
  LinearModel(std::vector<double> coefficients, double intercept);
  const std::vector<double>& coefficients() const { return coefficients_; }
  double intercept() const { return intercept_; }

 protected:
  double predict(std::span<const double> x) const override;

 private:
  std::vector<double> coefficients_;
  double intercept_;
};

/// Least squares with intercept via the centered normal equations. A
/// rank-deficient design falls back to ridge λ = 1e-8.
std::shared_ptr<const LinearModel> fit_ols(const Matrix& samples, std::span<const double> targets);

/// Coefficient of determination of `predicted` against `actual`.
double r_squared(std::span<const double> actual, std::span<const double> predicted);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_MODELS_HPP
