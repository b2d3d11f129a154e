#ifndef SHAPLEY_SETS_CORE_HPP
#define SHAPLEY_SETS_CORE_HPP

#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace shapsets {

/// Row-major so that each sample is a contiguous span.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// An ordered n-tuple of feature values. Indices are 0-based.
using FeatureVector = std::vector<double>;

/// Throws DimensionError when `x.size() != n` and InvalidDataError on a
/// non-finite entry. `what` names the vector in the message.
void validate_vector(std::span<const double> x, std::size_t n, const std::string& what);

/// A set of distinct feature indices, kept sorted ascending.
class FeatureIndexSet {
 public:
  FeatureIndexSet() = default;
  FeatureIndexSet(std::initializer_list<std::size_t> indices);
  explicit FeatureIndexSet(std::vector<std::size_t> indices);

  static FeatureIndexSet range(std::size_t first, std::size_t last);
  static FeatureIndexSet all(std::size_t n) { return range(0, n); }

  std::size_t size() const { return indices_.size(); }
  bool empty() const { return indices_.empty(); }
  bool contains(std::size_t i) const;
  std::size_t front() const { return indices_.front(); }
  std::size_t operator[](std::size_t k) const { return indices_[k]; }
  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }
  const std::vector<std::size_t>& indices() const { return indices_; }

  /// All indices must be < n.
  void validate(std::size_t n) const;

  FeatureIndexSet unite(const FeatureIndexSet& other) const;
  FeatureIndexSet minus(const FeatureIndexSet& other) const;
  FeatureIndexSet complement(std::size_t n) const;
  bool intersects(const FeatureIndexSet& other) const;

  std::string to_string() const;

  friend bool operator==(const FeatureIndexSet&, const FeatureIndexSet&) = default;
  friend auto operator<=>(const FeatureIndexSet& a, const FeatureIndexSet& b) {
    return a.indices_ <=> b.indices_;
  }

 private:
  std::vector<std::size_t> indices_;
};

/// Disjoint, non-empty groups covering {0, ..., n-1}. Groups are stored in
/// ascending order of their smallest index.
class Partition {
 public:
  Partition() = default;
  Partition(std::vector<FeatureIndexSet> groups, std::size_t n);

  static Partition singletons(std::size_t n);
  static Partition grand(std::size_t n);

  std::size_t feature_count() const { return n_; }
  std::size_t group_count() const { return groups_.size(); }
  const std::vector<FeatureIndexSet>& groups() const { return groups_; }
  const FeatureIndexSet& group(std::size_t g) const { return groups_[g]; }
  /// Index of the group containing feature i.
  std::size_t group_of(std::size_t i) const { return owner_[i]; }

  /// Union of the groups selected by bits of `mask`.
  FeatureIndexSet coalition(std::uint64_t mask) const;

  std::string to_string() const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.n_ == b.n_ && a.groups_ == b.groups_;
  }

 private:
  std::vector<FeatureIndexSet> groups_;
  std::vector<std::size_t> owner_;
  std::size_t n_ = 0;
};

/// Deterministic f : R^n -> R. Evaluation rejects vectors of the wrong length.
class PredictiveModel {
 public:
  explicit PredictiveModel(std::size_t dimension);
  virtual ~PredictiveModel() = default;
  PredictiveModel(const PredictiveModel&) = delete;
  PredictiveModel& operator=(const PredictiveModel&) = delete;

  std::size_t dimension() const { return dimension_; }
  double evaluate(std::span<const double> x) const;
  /// Process-unique identity, used to key per-model caches.
  std::uint64_t id() const { return id_; }

 protected:
  virtual double predict(std::span<const double> x) const = 0;

 private:
  std::size_t dimension_;
  std::uint64_t id_;
};

/// Wraps a callable as a PredictiveModel.
class FunctionModel final : public PredictiveModel {
 public:
  using Function = std::function<double(std::span<const double>)>;
  FunctionModel(std::size_t dimension, Function fn)
      : PredictiveModel(dimension), fn_(std::move(fn)) {}

 protected:
  double predict(std::span<const double> x) const override { return fn_(x); }

 private:
  Function fn_;
};

/// In-memory sample matrix with its sample mean and unbiased covariance.
/// Immutable after construction; the per-model mean-output cache is filled
/// lazily and is safe to populate from concurrent readers.
class DatasetMatrix {
 public:
  std::size_t rows() const { return static_cast<std::size_t>(samples_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(samples_.cols()); }
  std::span<const double> row(std::size_t i) const {
    return {samples_.data() + i * cols(), cols()};
  }
  const Matrix& samples() const { return samples_; }
  const Eigen::VectorXd& mean() const { return mean_; }
  const Eigen::MatrixXd& covariance() const { return covariance_; }
  FeatureVector mean_vector() const { return {mean_.data(), mean_.data() + mean_.size()}; }

  /// Empirical mean of f over all rows.
  double mean_output(const PredictiveModel& model) const;

 private:
  friend DatasetMatrix estimate_statistics(const Matrix& data);

  struct OutputCache {
    std::mutex mutex;
    std::map<std::uint64_t, double> values;
  };

  Matrix samples_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  std::shared_ptr<OutputCache> cache_ = std::make_shared<OutputCache>();
};

/// Sample mean and covariance with divisor k-1. Requires k >= 2 and finite
/// entries.
DatasetMatrix estimate_statistics(const Matrix& data);

/// result[i] = x[i] if i in S, else background[i].
FeatureVector compose_vector(std::span<const double> x, std::span<const double> background,
                             const FeatureIndexSet& S);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_CORE_HPP
