// Deterministic sampling helpers. mt19937_64 with rejection-sampled bounds
// keeps draws identical across platforms and compilers.

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace promptlog::detail {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform draw in [0, n).
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t value;
    do {
      value = gen_();
    } while (value >= limit);
    return value % n;
  }

 private:
  std::mt19937_64 gen_;
};

/// k distinct indices drawn uniformly from [0, population), in draw order
/// (partial Fisher-Yates).
inline std::vector<std::size_t> sample_indices(std::size_t population, std::size_t k, Rng& rng) {
  std::vector<std::size_t> pool(population);
  for (std::size_t i = 0; i < population; ++i) pool[i] = i;
  std::vector<std::size_t> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(population - i));
    std::swap(pool[i], pool[j]);
    out.push_back(pool[i]);
  }
  return out;
}

}  // namespace promptlog::detail
