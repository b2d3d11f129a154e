#include "shapley_sets/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "shapley_sets/error.hpp"

namespace shapsets {

EpsilonPolicy EpsilonPolicy::fixed(double epsilon) {
  EpsilonPolicy p;
  p.alpha = 0.0;
  p.num_candidates = 0;
  p.resolved_epsilon = epsilon;
  return p;
}

EpsilonPolicy compute_epsilon(const PredictiveModel& model, const DatasetMatrix& data,
                              double alpha, int k, std::uint64_t seed) {
  if (data.rows() == 0) throw InsufficientDataError("cannot resolve epsilon on an empty dataset");
  if (k < 1) throw PreconditionError("epsilon candidate count must be >= 1");
  if (!(alpha > 0.0)) throw PreconditionError("epsilon alpha must be > 0");
  Rng rng = make_rng(seed, {0xe9511071ULL});
  std::uniform_int_distribution<std::size_t> pick(0, data.rows() - 1);
  double smallest = std::numeric_limits<double>::infinity();
  for (int t = 0; t < k; ++t) smallest = std::min(smallest, std::abs(model.evaluate(data.row(pick(rng)))));
  EpsilonPolicy p;
  p.alpha = alpha;
  p.num_candidates = k;
  p.seed = seed;
  p.resolved_epsilon = alpha * smallest;
  return p;
}

InteractionProbe::InteractionProbe(ValueFunctionConfig value, int repetitions, std::uint64_t seed)
    : value_(std::move(value)),
      repetitions_(repetitions),
      seed_(seed),
      rng_(make_rng(seed, {0x9e0be5ULL})) {
  if (repetitions_ < 1) throw PreconditionError("probe repetitions must be >= 1");
}

std::vector<std::size_t> InteractionProbe::draw_rows(std::size_t k, std::size_t count) {
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);
  std::vector<std::size_t> rows;
  rows.reserve(count);
  if (count > k) {
    // Not enough rows for a fully distinct draw: keep each pair distinct.
    while (rows.size() < count) {
      std::size_t r = pick(rng_);
      if (rows.size() % 2 == 1 && r == rows.back()) continue;
      rows.push_back(r);
    }
    return rows;
  }
  while (rows.size() < count) {
    std::size_t r = pick(rng_);
    if (std::find(rows.begin(), rows.end(), r) == rows.end()) rows.push_back(r);
  }
  return rows;
}

double interaction_discrepancy_bs(const PredictiveModel& model, const FeatureIndexSet& A,
                                  const FeatureIndexSet& B, std::span<const double> x,
                                  std::span<const double> z) {
  const double sigma1 = v_bs(model, x, z, A.unite(B)) - v_bs(model, x, z, B);
  const double sigma2 = v_bs(model, x, z, A);
  return sigma1 - sigma2;
}

double interaction_discrepancy_cond(const PredictiveModel& model, const DatasetMatrix& data,
                                    const FeatureIndexSet& A, const FeatureIndexSet& B,
                                    std::span<const double> x, const ValueFunctionConfig& cfg,
                                    std::uint64_t stream) {
  auto e = [&](const FeatureIndexSet& S) {
    return conditional_expectation(model, data, x, S, cfg, stream).value;
  };
  const double sigma1 = e(A.unite(B)) - e(B);
  const double sigma2 = e(A) - e(FeatureIndexSet{});
  return sigma1 - sigma2;
}

namespace {

void check_disjoint(const FeatureIndexSet& A, const FeatureIndexSet& B, std::size_t n) {
  A.validate(n);
  B.validate(n);
  if (A.empty() || B.empty()) throw PreconditionError("fitness test requires non-empty sets");
  if (A.intersects(B)) {
    throw PreconditionError("fitness test sets overlap: " + A.to_string() + " and " + B.to_string());
  }
}

}  // namespace

bool fitness_interacts(const FeatureIndexSet& A, const FeatureIndexSet& B, InteractionProbe& probe,
                       const EpsilonPolicy& eps, const PredictiveModel& model,
                       const DatasetMatrix& data) {
  const std::size_t n = model.dimension();
  if (data.cols() != n) {
    throw DimensionError("dataset has " + std::to_string(data.cols()) + " columns, model expects " +
                         std::to_string(n));
  }
  check_disjoint(A, B, n);
  const bool conditional = probe.value_.kind == ValueKind::conditional;
  const auto reps = static_cast<std::size_t>(probe.repetitions_);
  if (!conditional && data.rows() < 2) {
    throw InsufficientDataError("candidate pairs need at least 2 dataset rows");
  }
  if (data.rows() == 0) throw InsufficientDataError("no candidate rows");
  const std::vector<std::size_t> rows = probe.draw_rows(data.rows(), conditional ? reps : 2 * reps);
  const std::uint64_t test_index = probe.tests_++;

  bool interacts = false;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  std::size_t used = 0;
  const FeatureIndexSet AB = A.unite(B);
  for (std::size_t rep = 0; rep < reps && !interacts; ++rep) {
    ++used;
    if (conditional) {
      const auto x = data.row(rows[rep]);
      const std::uint64_t stream = substream_seed(probe.seed_, {test_index, rep});
      auto e = [&](const FeatureIndexSet& S) {
        return conditional_expectation(model, data, x, S, probe.value_, stream).value;
      };
      sigma1 = e(AB) - e(B);
      sigma2 = e(A) - e(FeatureIndexSet{});
      probe.evaluations_ += 4;
    } else {
      const auto x = data.row(rows[2 * rep]);
      const auto z = data.row(rows[2 * rep + 1]);
      sigma1 = v_bs(model, x, z, AB) - v_bs(model, x, z, B);
      sigma2 = v_bs(model, x, z, A);
      probe.evaluations_ += 3;
    }
    interacts = std::abs(sigma1 - sigma2) > eps.resolved_epsilon;
  }

  if (probe.trace_ != nullptr) {
    const auto count = static_cast<std::ptrdiff_t>(conditional ? used : 2 * used);
    const std::vector<std::size_t> consumed(rows.begin(), rows.begin() + count);
    nlohmann::json line = {{"test", test_index},
                           {"A", A.indices()},
                           {"B", B.indices()},
                           {"rows", consumed},
                           {"sigma1", sigma1},
                           {"sigma2", sigma2},
                           {"epsilon", eps.resolved_epsilon},
                           {"repetitions_used", used},
                           {"interacts", interacts}};
    *probe.trace_ << line.dump() << '\n';
  }
  return interacts;
}

FeatureIndexSet value_interact(const FeatureIndexSet& X1, const FeatureIndexSet& X2,
                               InteractionProbe& probe, const EpsilonPolicy& eps,
                               const PredictiveModel& model, const DatasetMatrix& data) {
  if (X2.empty()) throw PreconditionError("value_interact requires a non-empty second set");
  if (!fitness_interacts(X1, X2, probe, eps, model, data)) return X1;
  if (X2.size() == 1) return X1.unite(X2);
  const std::size_t half = (X2.size() + 1) / 2;
  const FeatureIndexSet G1(std::vector<std::size_t>(X2.begin(), X2.begin() + half));
  const FeatureIndexSet G2(std::vector<std::size_t>(X2.begin() + half, X2.end()));
  const FeatureIndexSet left = value_interact(X1, G1, probe, eps, model, data);
  const FeatureIndexSet right = value_interact(X1, G2, probe, eps, model, data);
  return left.unite(right);
}

DecompositionResult decompose(const PredictiveModel& model, const DatasetMatrix& data,
                              InteractionProbe& probe, const EpsilonPolicy& eps) {
  const std::size_t n = model.dimension();
  if (n == 0) throw PreconditionError("cannot decompose a zero-dimensional model");
  if (data.cols() != n) {
    throw DimensionError("dataset has " + std::to_string(data.cols()) + " columns, model expects " +
                         std::to_string(n));
  }
  const std::size_t start = probe.evaluations();
  DecompositionResult result;
  auto route = [&](const FeatureIndexSet& group) {
    (group.size() == 1 ? result.seps : result.nonseps).push_back(group);
  };

  FeatureIndexSet X1{0};
  FeatureIndexSet X2 = FeatureIndexSet::range(1, n);
  while (!X2.empty()) {
    const FeatureIndexSet grown = value_interact(X1, X2, probe, eps, model, data);
    if (grown == X1) {
      route(X1);
      X1 = FeatureIndexSet{X2.front()};
      X2 = X2.minus(X1);
    } else {
      X1 = grown;
      X2 = X2.minus(X1);
    }
  }
  route(X1);

  auto by_front = [](const FeatureIndexSet& a, const FeatureIndexSet& b) { return a.front() < b.front(); };
  std::sort(result.seps.begin(), result.seps.end(), by_front);
  std::sort(result.nonseps.begin(), result.nonseps.end(), by_front);
  std::vector<FeatureIndexSet> groups = result.seps;
  groups.insert(groups.end(), result.nonseps.begin(), result.nonseps.end());
  result.partition = Partition(std::move(groups), n);
  result.value_evaluations = probe.evaluations() - start;
  result.epsilon_used = eps.resolved_epsilon;
  return result;
}

}  // namespace shapsets
