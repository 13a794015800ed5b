#include "premsel/rng.hpp"

#include "premsel/util.hpp"

namespace premsel {

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling to remove modulo bias.
  std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    std::uint64_t r = next();
    if (r >= threshold) return r % bound;
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t z = seed ^ fnv1a(stream);
  // splitmix64 finalizer
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

Rng derive_rng(std::uint64_t seed, std::string_view stream) {
  return Rng(derive_seed(seed, stream));
}

}  // namespace premsel
