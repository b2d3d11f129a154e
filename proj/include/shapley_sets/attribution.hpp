#ifndef SHAPLEY_SETS_ATTRIBUTION_HPP
#define SHAPLEY_SETS_ATTRIBUTION_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "shapley_sets/core.hpp"
#include "shapley_sets/value_function.hpp"

namespace shapsets {

inline constexpr std::size_t kMaxEnumerationPlayers = 20;

/// Per-group attribution for one sample together with everything needed to
/// rerun it: value-function configuration, MC stream, and the seeds and ε of
/// the decomposition that produced the partition.
struct AttributionReport {
  Partition partition;
  std::vector<double> values;
  ValueFunctionConfig value;
  FeatureVector sample;
  std::uint64_t stream = 0;
  double epsilon_used = 0.0;
  std::map<std::string, std::uint64_t> seeds;
  /// v(x, N) and |v(x, N) - Σ values|.
  double grand_value = 0.0;
  double efficiency_residual = 0.0;
  /// Coalition evaluations spent on `values`.
  std::size_t value_calls = 0;
};

/// φ_g = v(x, group g) for every group: one value call per group.
AttributionReport shapley_sets(const CoalitionValue& v, std::span<const double> x,
                               const Partition& partition, std::uint64_t stream = 0);

AttributionReport shapley_sets(const PredictiveModel& model, const DatasetMatrix* data,
                               std::span<const double> x, const Partition& partition,
                               const ValueFunctionConfig& cfg, std::uint64_t stream = 0);

/// Characteristic function over players {0, ..., m-1}; coalitions are bit masks.
/// worth(0) must be 0.
class SetGame {
 public:
  SetGame(std::size_t players, const std::function<double(std::uint64_t)>& worth);
  static SetGame from_table(std::vector<double> worths);

  std::size_t players() const { return players_; }
  double worth(std::uint64_t mask) const { return table_[mask]; }
  const std::vector<double>& table() const { return table_; }

 private:
  SetGame() = default;
  std::size_t players_ = 0;
  std::vector<double> table_;
};

/// Exact Shapley value by subset enumeration:
///   φ_i = Σ_{S ⊆ N∖{i}} |S|!(m-|S|-1)!/m! · [worth(S ∪ {i}) - worth(S)]
/// Marginal contributions are summed per coalition size, multiplied by the
/// integer weight numerators, and divided by m! once. Throws CapacityError
/// for m > 20.
std::vector<double> exact_shapley(const SetGame& game);

/// Game whose players are the partition's groups:
/// worth(T) = v(x, union of groups in T). All coalitions share `stream`.
SetGame super_feature_game(const CoalitionValue& v, std::span<const double> x,
                           const Partition& partition, std::uint64_t stream = 0);

/// Exact per-feature Shapley values under v (n <= 20).
std::vector<double> shapley_over_features(const CoalitionValue& v, std::span<const double> x,
                                          std::uint64_t stream = 0);

/// Broadcasts group values to features: out[i] = values[group_of(i)].
std::vector<double> per_feature(const Partition& partition, const std::vector<double>& values);

}  // namespace shapsets

#endif  // SHAPLEY_SETS_ATTRIBUTION_HPP
