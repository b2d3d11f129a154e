#include "shapley_sets/value_function.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "shapley_sets/error.hpp"
#include "shapley_sets/rng.hpp"

namespace shapsets {

std::string to_string(ValueKind kind) {
  switch (kind) {
    case ValueKind::baseline:
      return "baseline";
    case ValueKind::marginal:
      return "marginal";
    case ValueKind::conditional:
      return "conditional";
  }
  return "unknown";
}

ValueKind parse_value_kind(const std::string& name) {
  if (name == "baseline" || name == "bs") return ValueKind::baseline;
  if (name == "marginal" || name == "marg") return ValueKind::marginal;
  if (name == "conditional" || name == "cond") return ValueKind::conditional;
  throw PreconditionError("unknown value function '" + name + "'");
}

ValueFunctionConfig ValueFunctionConfig::with_baseline(FeatureVector z) {
  ValueFunctionConfig cfg;
  cfg.kind = ValueKind::baseline;
  cfg.baseline = std::move(z);
  return cfg;
}

ValueFunctionConfig ValueFunctionConfig::marginal() { return {}; }

ValueFunctionConfig ValueFunctionConfig::conditional(int mc_samples, std::uint64_t seed) {
  ValueFunctionConfig cfg;
  cfg.kind = ValueKind::conditional;
  cfg.mc_samples = mc_samples;
  cfg.seed = seed;
  return cfg;
}

void ValueFunctionConfig::validate(std::size_t n) const {
  if (kind == ValueKind::baseline) {
    if (!baseline) throw PreconditionError("baseline value function requires a baseline vector");
    validate_vector(*baseline, n, "baseline");
  }
  if (mc_samples < 1) throw PreconditionError("mc_samples must be >= 1");
  if (ridge && !(*ridge > 0.0)) throw PreconditionError("ridge must be > 0");
}

ConditionalGaussian condition_gaussian(const Eigen::VectorXd& mu, const Eigen::MatrixXd& sigma,
                                       const FeatureIndexSet& S, std::span<const double> x_S,
                                       double ridge) {
  const auto n = static_cast<std::size_t>(mu.size());
  if (static_cast<std::size_t>(sigma.rows()) != n || static_cast<std::size_t>(sigma.cols()) != n) {
    throw DimensionError("covariance shape does not match the mean vector");
  }
  S.validate(n);
  if (x_S.size() != S.size()) {
    throw DimensionError("conditioning values have length " + std::to_string(x_S.size()) +
                         ", expected " + std::to_string(S.size()));
  }
  ConditionalGaussian out;
  out.free = S.complement(n);
  const auto s = static_cast<Eigen::Index>(S.size());
  const auto r = static_cast<Eigen::Index>(out.free.size());
  if (S.empty()) {
    out.mean = mu;
    out.covariance = sigma;
    return out;
  }
  if (r == 0) {
    out.mean.resize(0);
    out.covariance.resize(0, 0);
    return out;
  }

  Eigen::MatrixXd block_ss(s, s);
  Eigen::MatrixXd block_fs(r, s);
  Eigen::MatrixXd block_ff(r, r);
  Eigen::VectorXd delta(s);
  for (Eigen::Index a = 0; a < s; ++a) {
    const auto ia = static_cast<Eigen::Index>(S[a]);
    delta(a) = x_S[a] - mu(ia);
    for (Eigen::Index b = 0; b < s; ++b) block_ss(a, b) = sigma(ia, static_cast<Eigen::Index>(S[b]));
  }
  for (Eigen::Index a = 0; a < r; ++a) {
    const auto ia = static_cast<Eigen::Index>(out.free[a]);
    for (Eigen::Index b = 0; b < s; ++b) block_fs(a, b) = sigma(ia, static_cast<Eigen::Index>(S[b]));
    for (Eigen::Index b = 0; b < r; ++b) {
      block_ff(a, b) = sigma(ia, static_cast<Eigen::Index>(out.free[b]));
    }
  }
  block_ss.diagonal().array() += ridge;

  Eigen::LLT<Eigen::MatrixXd> llt(block_ss);
  if (llt.info() != Eigen::Success || !(llt.rcond() > 1e3 * std::numeric_limits<double>::epsilon())) {
    throw SingularityError("conditioning block " + S.to_string() +
                           " is singular after regularization");
  }
  const Eigen::MatrixXd gain = llt.solve(block_fs.transpose()).transpose();
  Eigen::VectorXd free_mu(r);
  for (Eigen::Index a = 0; a < r; ++a) free_mu(a) = mu(static_cast<Eigen::Index>(out.free[a]));
  out.mean = free_mu + gain * delta;
  out.covariance = block_ff - gain * block_fs.transpose();
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose()).eval();
  return out;
}

Eigen::MatrixXd psd_cholesky(const Eigen::MatrixXd& A) {
  const Eigen::Index n = A.rows();
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  double scale = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) scale = std::max(scale, std::abs(A(i, i)));
  const double tol = 1e-12 * std::max(scale, std::numeric_limits<double>::min());
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = A(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= L(j, k) * L(j, k);
    if (d <= tol) continue;
    const double root = std::sqrt(d);
    L(j, j) = root;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double v = A(i, j);
      for (Eigen::Index k = 0; k < j; ++k) v -= L(i, k) * L(j, k);
      L(i, j) = v / root;
    }
  }
  return L;
}

double resolve_ridge(const ValueFunctionConfig& cfg, const DatasetMatrix& data) {
  if (cfg.ridge) return *cfg.ridge;
  const double mean_diag = data.covariance().diagonal().mean();
  // A zero-variance dataset still needs a positive ridge.
  return mean_diag > 0.0 ? 1e-6 * mean_diag : 1e-12;
}

double v_bs(const PredictiveModel& model, std::span<const double> x, std::span<const double> z,
            const FeatureIndexSet& S) {
  validate_vector(x, model.dimension(), "sample");
  validate_vector(z, model.dimension(), "baseline");
  if (S.empty()) return 0.0;
  const FeatureVector spliced = compose_vector(x, z, S);
  return model.evaluate(spliced) - model.evaluate(z);
}

double v_marg(const PredictiveModel& model, const DatasetMatrix& data, std::span<const double> x,
              const FeatureIndexSet& S) {
  if (data.cols() != model.dimension()) {
    throw DimensionError("dataset has " + std::to_string(data.cols()) + " columns, model expects " +
                         std::to_string(model.dimension()));
  }
  const FeatureVector mean = data.mean_vector();
  return v_bs(model, x, mean, S);
}

McEstimate conditional_expectation(const PredictiveModel& model, const DatasetMatrix& data,
                                   std::span<const double> x, const FeatureIndexSet& S,
                                   const ValueFunctionConfig& cfg, std::uint64_t stream) {
  const std::size_t n = model.dimension();
  if (data.cols() != n) {
    throw DimensionError("dataset has " + std::to_string(data.cols()) + " columns, model expects " +
                         std::to_string(n));
  }
  validate_vector(x, n, "sample");
  S.validate(n);
  if (cfg.mc_samples < 1) throw PreconditionError("mc_samples must be >= 1");
  if (S.size() == n) return {model.evaluate(x), 0.0};

  std::vector<double> x_S;
  x_S.reserve(S.size());
  for (std::size_t i : S) x_S.push_back(x[i]);
  const ConditionalGaussian cond =
      condition_gaussian(data.mean(), data.covariance(), S, x_S, resolve_ridge(cfg, data));
  const Eigen::MatrixXd L = psd_cholesky(cond.covariance);
  const auto r = static_cast<Eigen::Index>(cond.free.size());
  const auto m = static_cast<Eigen::Index>(cfg.mc_samples);

  Eigen::MatrixXd noise(r, m);
  for (Eigen::Index a = 0; a < r; ++a) {
    Rng rng = make_rng(cfg.seed, {stream, static_cast<std::uint64_t>(cond.free[a])});
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Eigen::Index t = 0; t < m; ++t) noise(a, t) = normal(rng);
  }
  const Eigen::MatrixXd draws = (L * noise).colwise() + cond.mean;

  FeatureVector point(x.begin(), x.end());
  double mean = 0.0;
  double m2 = 0.0;
  for (Eigen::Index t = 0; t < m; ++t) {
    for (Eigen::Index a = 0; a < r; ++a) point[cond.free[a]] = draws(a, t);
    const double y = model.evaluate(point);
    const double d = y - mean;
    mean += d / static_cast<double>(t + 1);
    m2 += d * (y - mean);
  }
  const double se = m > 1 ? std::sqrt(m2 / static_cast<double>(m - 1) / static_cast<double>(m)) : 0.0;
  return {mean, se};
}

McEstimate v_cond_estimate(const PredictiveModel& model, const DatasetMatrix& data,
                           std::span<const double> x, const FeatureIndexSet& S,
                           const ValueFunctionConfig& cfg, std::uint64_t stream) {
  if (S.empty()) {
    validate_vector(x, model.dimension(), "sample");
    return {0.0, 0.0};
  }
  McEstimate e = conditional_expectation(model, data, x, S, cfg, stream);
  e.value -= data.mean_output(model);
  return e;
}

double v_cond(const PredictiveModel& model, const DatasetMatrix& data, std::span<const double> x,
              const FeatureIndexSet& S, const ValueFunctionConfig& cfg, std::uint64_t stream) {
  return v_cond_estimate(model, data, x, S, cfg, stream).value;
}

CoalitionValue::CoalitionValue(const PredictiveModel& model, const DatasetMatrix* data,
                               ValueFunctionConfig cfg)
    : model_(model), data_(data), cfg_(std::move(cfg)) {
  cfg_.validate(model.dimension());
  if (cfg_.kind != ValueKind::baseline) {
    if (data_ == nullptr) {
      throw PreconditionError(to_string(cfg_.kind) + " value function requires a dataset");
    }
    if (data_->cols() != model.dimension()) {
      throw DimensionError("dataset has " + std::to_string(data_->cols()) +
                           " columns, model expects " + std::to_string(model.dimension()));
    }
  }
  if (cfg_.kind == ValueKind::baseline) reference_ = *cfg_.baseline;
  if (cfg_.kind == ValueKind::marginal) reference_ = data_->mean_vector();
}

double CoalitionValue::operator()(std::span<const double> x, const FeatureIndexSet& S,
                                  std::uint64_t stream) const {
  ++calls_;
  if (cfg_.kind == ValueKind::conditional) return v_cond(model_, *data_, x, S, cfg_, stream);
  return v_bs(model_, x, reference_, S);
}

double CoalitionValue::grand(std::span<const double> x) const {
  validate_vector(x, model_.dimension(), "sample");
  return model_.evaluate(x) - reference_output();
}

double CoalitionValue::reference_output() const {
  if (cfg_.kind == ValueKind::conditional) return data_->mean_output(model_);
  return model_.evaluate(reference_);
}

}  // namespace shapsets
