#ifndef PREMSEL_RNG_HPP
#define PREMSEL_RNG_HPP

#include <cstdint>
#include <string_view>
#include <vector>

namespace premsel {

// Deterministic splitmix64 generator. Used instead of <random> so that every
// stream reproduces bit-for-bit across platforms and standard-library
// versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Unbiased integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Partial Fisher-Yates: permutes items so that the first `take` elements
  // are a uniform sample without replacement, in draw order.
  template <typename T>
  void sample_prefix(std::vector<T>& items, std::size_t take) {
    if (take > items.size()) take = items.size();
    for (std::size_t i = 0; i < take; ++i) {
      std::size_t j = i + static_cast<std::size_t>(below(items.size() - i));
      if (j != i) std::swap(items[i], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    if (!items.empty()) sample_prefix(items, items.size());
  }

 private:
  std::uint64_t state_;
};

// Every random decision in a run draws from a stream derived from the single
// run seed and a stream name (e.g. "split", "negatives/t12"). Streams are
// independent of each other and of evaluation order.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream);
Rng derive_rng(std::uint64_t seed, std::string_view stream);

}  // namespace premsel

#endif  // PREMSEL_RNG_HPP
