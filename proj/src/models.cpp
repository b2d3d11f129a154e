#include "shapley_sets/models.hpp"

#include <cmath>
#include <limits>

#include "shapley_sets/error.hpp"
#include "shapley_sets/rng.hpp"

namespace shapsets {

namespace {

double sgn(double v) { return static_cast<double>((v > 0.0) - (v < 0.0)); }

using Component = std::function<double(std::span<const double>)>;

std::pair<std::shared_ptr<const PredictiveModel>, SyntheticSpec> assemble(
    SyntheticId id, std::size_t n, FunctionModel::Function formula,
    std::vector<std::pair<FeatureIndexSet, Component>> parts) {
  SyntheticSpec spec;
  spec.id = id;
  spec.n = n;
  std::vector<FeatureIndexSet> groups;
  for (const auto& part : parts) groups.push_back(part.first);
  spec.partition = Partition(groups, n);
  // Align components with the partition's canonical group order.
  spec.components.resize(parts.size());
  for (auto& part : parts) {
    for (std::size_t g = 0; g < spec.partition.group_count(); ++g) {
      if (spec.partition.group(g) == part.first) spec.components[g] = std::move(part.second);
    }
  }
  return {std::make_shared<FunctionModel>(n, std::move(formula)), std::move(spec)};
}

std::pair<std::shared_ptr<const PredictiveModel>, SyntheticSpec> linear_spec(
    SyntheticId id, std::vector<double> c) {
  const std::size_t n = c.size();
  std::vector<std::pair<FeatureIndexSet, Component>> parts;
  for (std::size_t i = 0; i < n; ++i) {
    const double ci = c[i];
    parts.emplace_back(FeatureIndexSet{i}, [ci, i](std::span<const double> x) { return ci * x[i]; });
  }
  return assemble(id, n,
                  [c](std::span<const double> x) {
                    double y = 0.0;
                    for (std::size_t i = 0; i < c.size(); ++i) y += c[i] * x[i];
                    return y;
                  },
                  std::move(parts));
}

}  // namespace

std::string to_string(SyntheticId id) {
  switch (id) {
    case SyntheticId::f1:
      return "f1";
    case SyntheticId::f2:
      return "f2";
    case SyntheticId::f3:
      return "f3";
    case SyntheticId::example1:
      return "example1";
    case SyntheticId::example2:
      return "example2";
    case SyntheticId::linear_g:
      return "linear_g";
  }
  return "unknown";
}

SyntheticId parse_synthetic_id(const std::string& name) {
  for (SyntheticId id : {SyntheticId::f1, SyntheticId::f2, SyntheticId::f3, SyntheticId::example1,
                         SyntheticId::example2, SyntheticId::linear_g}) {
    if (to_string(id) == name) return id;
  }
  throw PreconditionError("unknown builtin model '" + name + "'");
}

std::pair<std::shared_ptr<const PredictiveModel>, SyntheticSpec> make_synthetic(SyntheticId id) {
  using X = std::span<const double>;
  switch (id) {
    case SyntheticId::f1:
      return assemble(id, 7,
                      [](X x) {
                        return x[0] + (x[1] / (2.0 + x[4])) + 2.0 * (x[2] * x[3]) +
                               std::sin(2.0 * x[5] + x[6]);
                      },
                      {{{0}, [](X x) { return x[0]; }},
                       {{1, 4}, [](X x) { return x[1] / (2.0 + x[4]); }},
                       {{2, 3}, [](X x) { return 2.0 * (x[2] * x[3]); }},
                       {{5, 6}, [](X x) { return std::sin(2.0 * x[5] + x[6]); }}});
    case SyntheticId::f2:
      return assemble(id, 7,
                      [](X x) {
                        return 2.0 * sgn(x[0]) + sgn(x[1] * x[2] * x[3]) + sgn(x[4] * x[5] * x[6]);
                      },
                      {{{0}, [](X x) { return 2.0 * sgn(x[0]); }},
                       {{1, 2, 3}, [](X x) { return sgn(x[1] * x[2] * x[3]); }},
                       {{4, 5, 6}, [](X x) { return sgn(x[4] * x[5] * x[6]); }}});
    case SyntheticId::f3:
      return assemble(id, 7,
                      [](X x) {
                        return 2.0 * (x[0] * x[2] * x[3]) + 4.0 * (x[4] * x[5]) -
                               3.0 * (x[1] * x[1]) - x[6];
                      },
                      {{{0, 2, 3}, [](X x) { return 2.0 * (x[0] * x[2] * x[3]); }},
                       {{1}, [](X x) { return -3.0 * (x[1] * x[1]); }},
                       {{4, 5}, [](X x) { return 4.0 * (x[4] * x[5]); }},
                       {{6}, [](X x) { return -x[6]; }}});
    case SyntheticId::example1:
      return assemble(id, 3, [](X x) { return x[0] + x[2]; },
                      {{{0}, [](X x) { return x[0]; }},
                       {{1}, [](X) { return 0.0; }},
                       {{2}, [](X x) { return x[2]; }}});
    case SyntheticId::example2:
      return assemble(id, 3, [](X x) { return x[0] + 2.0 * x[1] * x[2]; },
                      {{{0}, [](X x) { return x[0]; }},
                       {{1, 2}, [](X x) { return 2.0 * x[1] * x[2]; }}});
    case SyntheticId::linear_g:
      return linear_spec(id, {1.0, 0.5, 0.2, 0.8, 0.5});
  }
  throw PreconditionError("unknown builtin model");
}

std::pair<std::shared_ptr<const PredictiveModel>, SyntheticSpec> make_linear_g_with_dummy() {
  return linear_spec(SyntheticId::linear_g, {1.0, 0.5, 0.2, 0.8, 0.5, 0.0});
}

double ground_truth_attribution(const SyntheticSpec& spec, std::span<const double> x,
                                const FeatureIndexSet& group, std::span<const double> baseline) {
  validate_vector(x, spec.n, "sample");
  const FeatureVector zero(spec.n, 0.0);
  if (baseline.empty()) baseline = zero;
  validate_vector(baseline, spec.n, "baseline");
  for (std::size_t g = 0; g < spec.partition.group_count(); ++g) {
    if (spec.partition.group(g) == group) {
      return spec.components[g](x) - spec.components[g](baseline);
    }
  }
  throw PreconditionError("group " + group.to_string() + " is not a ground-truth group of " +
                          to_string(spec.id));
}

std::vector<double> ground_truth_per_feature(const SyntheticSpec& spec, std::span<const double> x,
                                             std::span<const double> baseline) {
  std::vector<double> group_values;
  for (const FeatureIndexSet& group : spec.partition.groups()) {
    group_values.push_back(ground_truth_attribution(spec, x, group, baseline));
  }
  std::vector<double> out(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) out[i] = group_values[spec.partition.group_of(i)];
  return out;
}

std::string to_string(Dependence d) {
  switch (d) {
    case Dependence::iid:
      return "iid";
    case Dependence::rho_link:
      return "rho_link";
    case Dependence::with_dummy:
      return "with_dummy";
  }
  return "unknown";
}

Dependence parse_dependence(const std::string& name) {
  for (Dependence d : {Dependence::iid, Dependence::rho_link, Dependence::with_dummy}) {
    if (to_string(d) == name) return d;
  }
  throw PreconditionError("unknown dependence mode '" + name + "'");
}

void GeneratorConfig::validate() const {
  if (k < 2) throw PreconditionError("generator requires k >= 2");
  if (!(variance > 0.0)) throw PreconditionError("generator variance must be > 0");
  if (n == 0) throw PreconditionError("generator requires n >= 1");
  if (dependence != Dependence::iid && n < 2) {
    throw PreconditionError("rho_link dependence requires n >= 2");
  }
}

Matrix generate_samples(const GeneratorConfig& cfg) {
  cfg.validate();
  const std::size_t cols = cfg.n + (cfg.dependence == Dependence::with_dummy ? 1 : 0);
  Matrix out(static_cast<Eigen::Index>(cfg.k), static_cast<Eigen::Index>(cols));
  Rng rng = make_rng(cfg.seed, {0xda7aULL});
  std::normal_distribution<double> normal(cfg.mean, std::sqrt(cfg.variance));
  for (std::size_t i = 0; i < cfg.k; ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < cfg.n; ++j) {
      const auto c = static_cast<Eigen::Index>(j);
      if (j == 1 && cfg.dependence != Dependence::iid) {
        out(r, 1) = cfg.rho * out(r, 0);
      } else {
        out(r, c) = normal(rng);
      }
    }
    if (cfg.dependence == Dependence::with_dummy) out(r, static_cast<Eigen::Index>(cfg.n)) = out(r, 0);
  }
  return out;
}

DatasetMatrix generate_data(const GeneratorConfig& cfg) { return estimate_statistics(generate_samples(cfg)); }

Matrix generate_example1_samples(std::size_t k, std::uint64_t seed) {
  Matrix out(static_cast<Eigen::Index>(k), 3);
  Rng rng = make_rng(seed, {0xe1ULL});
  std::bernoulli_distribution coin(0.5);
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out(i, 0) = coin(rng) ? 1.0 : 0.0;
    out(i, 1) = coin(rng) ? 1.0 : 0.0;
    out(i, 2) = out(i, 1);
  }
  return out;
}

std::vector<double> predict_rows(const PredictiveModel& model, const Matrix& samples) {
  std::vector<double> out(static_cast<std::size_t>(samples.rows()));
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    out[static_cast<std::size_t>(i)] =
        model.evaluate({samples.data() + i * samples.cols(), static_cast<std::size_t>(samples.cols())});
  }
  return out;
}

LinearModel::LinearModel(std::vector<double> coefficients, double intercept)
    : PredictiveModel(coefficients.size()), coefficients_(std::move(coefficients)), intercept_(intercept) {
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw InvalidDataError("linear model coefficient is not finite");
  }
  if (!std::isfinite(intercept_)) throw InvalidDataError("linear model intercept is not finite");
}

double LinearModel::predict(std::span<const double> x) const {
  double y = intercept_;
  for (std::size_t i = 0; i < coefficients_.size(); ++i) y += coefficients_[i] * x[i];
  return y;
}

std::shared_ptr<const LinearModel> fit_ols(const Matrix& samples, std::span<const double> targets) {
  const auto k = samples.rows();
  const auto n = samples.cols();
  if (static_cast<std::size_t>(k) != targets.size()) {
    throw DimensionError("targets have length " + std::to_string(targets.size()) + ", expected " +
                         std::to_string(k));
  }
  if (k <= n) throw FitError("least squares requires more rows than features");
  const Eigen::Map<const Eigen::VectorXd> y(targets.data(), k);
  const Eigen::RowVectorXd x_mean = samples.colwise().mean();
  const double y_mean = y.mean();
  const Eigen::MatrixXd centered = samples.rowwise() - x_mean;
  const Eigen::VectorXd y_centered = y.array() - y_mean;
  Eigen::MatrixXd gram = centered.transpose() * centered;
  const Eigen::VectorXd moment = centered.transpose() * y_centered;

  Eigen::VectorXd beta;
  Eigen::LLT<Eigen::MatrixXd> llt(gram);
  const double rcond_floor = 1e-12;
  if (llt.info() == Eigen::Success && llt.rcond() > rcond_floor) {
    beta = llt.solve(moment);
  } else {
    gram.diagonal().array() += 1e-8;
    Eigen::LLT<Eigen::MatrixXd> ridge(gram);
    if (ridge.info() != Eigen::Success) throw FitError("ridge fallback failed on a degenerate design");
    beta = ridge.solve(moment);
  }
  if (!beta.allFinite()) throw FitError("least squares produced non-finite coefficients");
  const double intercept = y_mean - x_mean.dot(beta);
  return std::make_shared<LinearModel>(std::vector<double>(beta.data(), beta.data() + beta.size()),
                                       intercept);
}

double r_squared(std::span<const double> actual, std::span<const double> predicted) {
  if (actual.size() != predicted.size() || actual.empty()) {
    throw DimensionError("r_squared requires equal, non-empty inputs");
  }
  double mean = 0.0;
  for (double a : actual) mean += a;
  mean /= static_cast<double>(actual.size());
  double ss_res = 0.0;
  double ss_tot = 0.0;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    ss_res += (actual[i] - predicted[i]) * (actual[i] - predicted[i]);
    ss_tot += (actual[i] - mean) * (actual[i] - mean);
  }
  if (ss_tot == 0.0) return ss_res == 0.0 ? 1.0 : 0.0;
  return 1.0 - ss_res / ss_tot;
}

}  // namespace shapsets
