#include "shapley_sets/attribution.hpp"

#include <bit>
#include <cmath>

#include "shapley_sets/error.hpp"

namespace shapsets {

AttributionReport shapley_sets(const CoalitionValue& v, std::span<const double> x,
                               const Partition& partition, std::uint64_t stream) {
  const std::size_t n = v.model().dimension();
  validate_vector(x, n, "sample");
  if (partition.feature_count() != n) {
    throw DimensionError("partition covers " + std::to_string(partition.feature_count()) +
                         " features, model has " + std::to_string(n));
  }
  AttributionReport report;
  report.partition = partition;
  report.value = v.config();
  report.sample.assign(x.begin(), x.end());
  report.stream = stream;

  const std::size_t before = v.calls();
  report.values.reserve(partition.group_count());
  for (const FeatureIndexSet& group : partition.groups()) report.values.push_back(v(x, group, stream));
  report.value_calls = v.calls() - before;

  report.grand_value = v.grand(x);
  double total = 0.0;
  for (double value : report.values) total += value;
  report.efficiency_residual = std::abs(report.grand_value - total);
  report.seeds["value"] = v.config().seed;
  return report;
}

AttributionReport shapley_sets(const PredictiveModel& model, const DatasetMatrix* data,
                               std::span<const double> x, const Partition& partition,
                               const ValueFunctionConfig& cfg, std::uint64_t stream) {
  const CoalitionValue v(model, data, cfg);
  return shapley_sets(v, x, partition, stream);
}

SetGame::SetGame(std::size_t players, const std::function<double(std::uint64_t)>& worth)
    : players_(players) {
  if (players > kMaxEnumerationPlayers) {
    throw CapacityError("exact enumeration supports at most " +
                        std::to_string(kMaxEnumerationPlayers) + " players, got " +
                        std::to_string(players));
  }
  const std::uint64_t count = std::uint64_t{1} << players;
  table_.resize(count);
  table_[0] = 0.0;
  for (std::uint64_t mask = 1; mask < count; ++mask) table_[mask] = worth(mask);
  const double empty = worth(0);
  if (empty != 0.0) throw PreconditionError("game worth of the empty coalition must be 0");
}

SetGame SetGame::from_table(std::vector<double> worths) {
  const std::size_t size = worths.size();
  if (size == 0 || (size & (size - 1)) != 0) {
    throw PreconditionError("worth table length must be a power of two");
  }
  SetGame game;
  game.players_ = static_cast<std::size_t>(std::countr_zero(size));
  if (game.players_ > kMaxEnumerationPlayers) {
    throw CapacityError("exact enumeration supports at most " +
                        std::to_string(kMaxEnumerationPlayers) + " players");
  }
  if (worths[0] != 0.0) throw PreconditionError("game worth of the empty coalition must be 0");
  game.table_ = std::move(worths);
  return game;
}

std::vector<double> exact_shapley(const SetGame& game) {
  const std::size_t m = game.players();
  if (m > kMaxEnumerationPlayers) {
    throw CapacityError("exact enumeration supports at most " +
                        std::to_string(kMaxEnumerationPlayers) + " players");
  }
  if (m == 0) return {};

  // 20! < 2^64, and every factorial up to 20! is exact in a 64-bit mantissa.
  std::vector<std::uint64_t> factorial(m + 1, 1);
  for (std::size_t k = 1; k <= m; ++k) factorial[k] = factorial[k - 1] * k;

  const std::uint64_t count = std::uint64_t{1} << m;
  std::vector<double> phi(m);
  std::vector<long double> sum(m);
  std::vector<long double> carry(m);
  for (std::size_t i = 0; i < m; ++i) {
    std::fill(sum.begin(), sum.end(), 0.0L);
    std::fill(carry.begin(), carry.end(), 0.0L);
    const std::uint64_t bit = std::uint64_t{1} << i;
    for (std::uint64_t mask = 0; mask < count; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(mask));
      const long double delta =
          static_cast<long double>(game.worth(mask | bit)) - static_cast<long double>(game.worth(mask));
      // Neumaier summation per coalition size.
      const long double t = sum[s] + delta;
      if (std::fabs(sum[s]) >= std::fabs(delta)) {
        carry[s] += (sum[s] - t) + delta;
      } else {
        carry[s] += (delta - t) + sum[s];
      }
      sum[s] = t;
    }
    long double numerator = 0.0L;
    for (std::size_t s = 0; s < m; ++s) {
      const auto weight = static_cast<long double>(factorial[s] * factorial[m - s - 1]);
      numerator += weight * (sum[s] + carry[s]);
    }
    phi[i] = static_cast<double>(numerator / static_cast<long double>(factorial[m]));
  }
  return phi;
}

SetGame super_feature_game(const CoalitionValue& v, std::span<const double> x,
                           const Partition& partition, std::uint64_t stream) {
  validate_vector(x, v.model().dimension(), "sample");
  if (partition.feature_count() != v.model().dimension()) {
    throw DimensionError("partition does not match the model dimension");
  }
  if (partition.group_count() > kMaxEnumerationPlayers) {
    throw CapacityError("super-feature game supports at most " +
                        std::to_string(kMaxEnumerationPlayers) + " groups, got " +
                        std::to_string(partition.group_count()));
  }
  return SetGame(partition.group_count(), [&](std::uint64_t mask) {
    return v(x, partition.coalition(mask), stream);
  });
}

std::vector<double> shapley_over_features(const CoalitionValue& v, std::span<const double> x,
                                          std::uint64_t stream) {
  const std::size_t n = v.model().dimension();
  if (n > kMaxEnumerationPlayers) {
    throw CapacityError("exact per-feature Shapley supports at most " +
                        std::to_string(kMaxEnumerationPlayers) + " features, got " +
                        std::to_string(n));
  }
  return exact_shapley(super_feature_game(v, x, Partition::singletons(n), stream));
}

std::vector<double> per_feature(const Partition& partition, const std::vector<double>& values) {
  if (values.size() != partition.group_count()) {
    throw DimensionError("one value per group is required");
  }
  std::vector<double> out(partition.feature_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = values[partition.group_of(i)];
  return out;
}

}  // namespace shapsets
