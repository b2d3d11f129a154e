#ifndef SHAPLEY_SETS_RNG_HPP
#define SHAPLEY_SETS_RNG_HPP

#include <cstdint>
#include <initializer_list>
#include <random>

namespace shapsets {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t x);

/// Derives an independent substream seed from a root seed and a key path.
std::uint64_t substream_seed(std::uint64_t root, std::initializer_list<std::uint64_t> keys);

inline Rng make_rng(std::uint64_t root, std::initializer_list<std::uint64_t> keys) {
  return Rng(substream_seed(root, keys));
}

}  // namespace shapsets

#endif  // SHAPLEY_SETS_RNG_HPP
