#include "shapley_sets/core.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>

#include "shapley_sets/error.hpp"

namespace shapsets {

void validate_vector(std::span<const double> x, std::size_t n, const std::string& what) {
  if (x.size() != n) {
    throw DimensionError(what + " has length " + std::to_string(x.size()) + ", expected " +
                         std::to_string(n));
  }
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i])) {
      throw InvalidDataError(what + " has a non-finite entry at index " + std::to_string(i));
    }
  }
}

FeatureIndexSet::FeatureIndexSet(std::initializer_list<std::size_t> indices)
    : FeatureIndexSet(std::vector<std::size_t>(indices)) {}

FeatureIndexSet::FeatureIndexSet(std::vector<std::size_t> indices) : indices_(std::move(indices)) {
  std::sort(indices_.begin(), indices_.end());
  if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end()) {
    throw PreconditionError("feature index set contains duplicates");
  }
}

FeatureIndexSet FeatureIndexSet::range(std::size_t first, std::size_t last) {
  FeatureIndexSet s;
  for (std::size_t i = first; i < last; ++i) s.indices_.push_back(i);
  return s;
}

bool FeatureIndexSet::contains(std::size_t i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

void FeatureIndexSet::validate(std::size_t n) const {
  if (!indices_.empty() && indices_.back() >= n) {
    throw PreconditionError("feature index " + std::to_string(indices_.back()) +
                            " out of range for n = " + std::to_string(n));
  }
}

FeatureIndexSet FeatureIndexSet::unite(const FeatureIndexSet& other) const {
  FeatureIndexSet out;
  std::set_union(indices_.begin(), indices_.end(), other.indices_.begin(), other.indices_.end(),
                 std::back_inserter(out.indices_));
  return out;
}

FeatureIndexSet FeatureIndexSet::minus(const FeatureIndexSet& other) const {
  FeatureIndexSet out;
  std::set_difference(indices_.begin(), indices_.end(), other.indices_.begin(),
                      other.indices_.end(), std::back_inserter(out.indices_));
  return out;
}

FeatureIndexSet FeatureIndexSet::complement(std::size_t n) const {
  return all(n).minus(*this);
}

bool FeatureIndexSet::intersects(const FeatureIndexSet& other) const {
  auto a = indices_.begin();
  auto b = other.indices_.begin();
  while (a != indices_.end() && b != other.indices_.end()) {
    if (*a == *b) return true;
    if (*a < *b) {
      ++a;
    } else {
      ++b;
    }
  }
  return false;
}

std::string FeatureIndexSet::to_string() const {
  std::ostringstream os;
  os << '{';
  for (std::size_t k = 0; k < indices_.size(); ++k) {
    if (k) os << ',';
    os << indices_[k];
  }
  os << '}';
  return os.str();
}

Partition::Partition(std::vector<FeatureIndexSet> groups, std::size_t n)
    : groups_(std::move(groups)), owner_(n, n), n_(n) {
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (groups_[g].empty()) throw PreconditionError("partition contains an empty group");
    groups_[g].validate(n);
  }
  std::sort(groups_.begin(), groups_.end(),
            [](const FeatureIndexSet& a, const FeatureIndexSet& b) { return a.front() < b.front(); });
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    for (std::size_t i : groups_[g]) {
      if (owner_[i] != n) {
        throw PreconditionError("partition groups overlap at feature " + std::to_string(i));
      }
      owner_[i] = g;
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (owner_[i] == n) {
      throw PreconditionError("partition does not cover feature " + std::to_string(i));
    }
  }
}

Partition Partition::singletons(std::size_t n) {
  std::vector<FeatureIndexSet> groups;
  for (std::size_t i = 0; i < n; ++i) groups.push_back(FeatureIndexSet{i});
  return Partition(std::move(groups), n);
}

Partition Partition::grand(std::size_t n) {
  if (n == 0) return Partition({}, 0);
  return Partition({FeatureIndexSet::all(n)}, n);
}

FeatureIndexSet Partition::coalition(std::uint64_t mask) const {
  std::vector<std::size_t> members;
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (mask >> g & 1u) members.insert(members.end(), groups_[g].begin(), groups_[g].end());
  }
  return FeatureIndexSet(std::move(members));
}

std::string Partition::to_string() const {
  std::string out = "{";
  for (std::size_t g = 0; g < groups_.size(); ++g) {
    if (g) out += ',';
    out += groups_[g].to_string();
  }
  return out + "}";
}

namespace {
std::atomic<std::uint64_t> next_model_id{1};
}  // namespace

PredictiveModel::PredictiveModel(std::size_t dimension)
    : dimension_(dimension), id_(next_model_id.fetch_add(1)) {}

double PredictiveModel::evaluate(std::span<const double> x) const {
  if (x.size() != dimension_) {
    throw DimensionError("model of dimension " + std::to_string(dimension_) +
                         " evaluated on a vector of length " + std::to_string(x.size()));
  }
  return predict(x);
}

double DatasetMatrix::mean_output(const PredictiveModel& model) const {
  {
    std::lock_guard lock(cache_->mutex);
    auto it = cache_->values.find(model.id());
    if (it != cache_->values.end()) return it->second;
  }
  // Computed outside the lock; racing writers store the same value.
  double sum = 0.0;
  for (std::size_t i = 0; i < rows(); ++i) sum += model.evaluate(row(i));
  const double value = sum / static_cast<double>(rows());
  std::lock_guard lock(cache_->mutex);
  return cache_->values.emplace(model.id(), value).first->second;
}

DatasetMatrix estimate_statistics(const Matrix& data) {
  const auto k = data.rows();
  if (k < 2) {
    throw InsufficientDataError("at least 2 rows are required to estimate a covariance, got " +
                                std::to_string(k));
  }
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
      if (!std::isfinite(data(i, j))) {
        throw InvalidDataError("non-finite value at row " + std::to_string(i) + ", column " +
                               std::to_string(j));
      }
    }
  }
  DatasetMatrix out;
  out.samples_ = data;
  out.mean_ = data.colwise().mean().transpose();
  const Eigen::MatrixXd centered = data.rowwise() - out.mean_.transpose();
  out.covariance_ = (centered.transpose() * centered) / static_cast<double>(k - 1);
  // Enforce exact symmetry.
  out.covariance_ = 0.5 * (out.covariance_ + out.covariance_.transpose()).eval();
  return out;
}

FeatureVector compose_vector(std::span<const double> x, std::span<const double> background,
                             const FeatureIndexSet& S) {
  if (x.size() != background.size()) {
    throw DimensionError("cannot splice vectors of lengths " + std::to_string(x.size()) + " and " +
                         std::to_string(background.size()));
  }
  S.validate(x.size());
  FeatureVector out(background.begin(), background.end());
  for (std::size_t i : S) out[i] = x[i];
  return out;
}

}  // namespace shapsets
